#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cgfl/commands.hpp"
#include "test_support.hpp"

namespace cgfl {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

class TempDir {
 public:
  TempDir() {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    path_ = fs::temp_directory_path() /
            (std::string("cgfl_cmd_") + info->test_suite_name() + "_" + info->name());
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }

  fs::path write(const std::string& name, const std::string& text) const {
    std::ofstream(path_ / name, std::ios::binary) << text;
    return path_ / name;
  }

 private:
  fs::path path_;
};

RunConfig config_for(std::vector<Technique> techniques, OutputFormat format = OutputFormat::Json) {
  RunConfig c;
  c.techniques = std::move(techniques);
  c.format = format;
  return c;
}

TEST(Localize, CgflJsonPutsFaultFirst) {
  const auto r = cmd_localize(testing::worked_example_path(), config_for({Technique::CGFL}));
  ASSERT_EQ(r.exit_code, kExitOk) << r.err;
  const auto doc = json::parse(r.out);
  const auto& report = doc.at("reports").at(0);
  EXPECT_EQ(report.at("technique"), "cgfl");
  EXPECT_EQ(report.at("empty_groups"), json::array({2}));
  const auto& first = report.at("statements").at(0);
  EXPECT_EQ(first.at("index"), 3);
  EXPECT_EQ(first.at("label"), "find_mid.c:5");
  EXPECT_EQ(first.at("group"), 4);
  EXPECT_EQ(first.at("score"), 3.0);
  EXPECT_EQ(first.at("best_rank"), 1);
  EXPECT_EQ(first.at("worst_rank"), 1);
  EXPECT_TRUE(report.at("statements").at(1).at("psi_su").is_null());
}

TEST(Localize, CpflTsvUsesMinusInfinityToken) {
  const auto r = cmd_localize(testing::worked_example_path(), config_for({Technique::CPFL}, OutputFormat::Tsv));
  ASSERT_EQ(r.exit_code, kExitOk) << r.err;
  std::istringstream in(r.out);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, kLocalizeTsvHeader);
  int minus_inf = 0;
  int rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    if (line.find("\t-inf\t") != std::string::npos) ++minus_inf;
  }
  EXPECT_EQ(rows, 13);
  EXPECT_EQ(minus_inf, 9);
}

TEST(Localize, JsonAndTsvCarryTheSameValues) {
  for (auto t : {Technique::CGFL, Technique::CPFL, Technique::Tarantula, Technique::Ochiai, Technique::DStar2}) {
    const auto j = cmd_localize(testing::worked_example_path(), config_for({t}));
    const auto tsv = cmd_localize(testing::worked_example_path(), config_for({t}, OutputFormat::Tsv));
    ASSERT_EQ(j.exit_code, kExitOk);
    const auto& rows = json::parse(j.out).at("reports").at(0).at("statements");
    std::istringstream in(tsv.out);
    std::string line;
    std::getline(in, line);
    for (const auto& row : rows) {
      ASSERT_TRUE(std::getline(in, line));
      std::vector<std::string> cells;
      std::istringstream fields(line);
      std::string cell;
      while (std::getline(fields, cell, '\t')) cells.push_back(cell);
      cells.resize(10);
      EXPECT_EQ(std::stoul(cells[0]), row.at("index").get<std::size_t>());
      EXPECT_EQ(parse_score_token(cells[7]),
                row.at("score").is_string() ? parse_score_token(row.at("score").get<std::string>())
                                            : Suspiciousness::finite(row.at("score").get<double>()));
      EXPECT_EQ(std::stoul(cells[8]), row.at("best_rank").get<std::size_t>());
      EXPECT_EQ(std::stoul(cells[9]), row.at("worst_rank").get<std::size_t>());
      if (row.contains("psi_fc")) {
        const auto& fc = row.at("psi_fc");
        if (fc.is_null()) {
          EXPECT_EQ(cells[3], kUndefinedToken);
        } else {
          EXPECT_EQ(std::stod(cells[3]), fc.get<double>());
        }
      } else {
        EXPECT_EQ(cells[3], "");
      }
    }
  }
}

TEST(Localize, MultipleTechniquesInTsvAreLabelled) {
  const auto r = cmd_localize(testing::worked_example_path(),
                              config_for({Technique::CGFL, Technique::Ochiai}, OutputFormat::Tsv));
  EXPECT_EQ(r.out.rfind("# technique: cgfl\n", 0), 0u);
  EXPECT_NE(r.out.find("\n# technique: ochiai\n"), std::string::npos);
}

TEST(Localize, AllPassingVersionIsExcluded) {
  TempDir dir;
  auto m = load_spectra_file(testing::worked_example_path());
  for (auto& t : m.tests) t.verdict = Verdict::Pass;
  const auto path = dir.write("all_pass.json", serialize_spectra(m));
  const auto r = cmd_localize(path, config_for({Technique::CGFL}));
  EXPECT_EQ(r.exit_code, kExitExcluded);
  EXPECT_TRUE(r.out.empty());
  EXPECT_NE(r.err.find("no failing tests"), std::string::npos);
}

TEST(Localize, MalformedInputIsAnInputError) {
  TempDir dir;
  const auto path = dir.write("bad.json", R"({"schema_version": 1})");
  const auto r = cmd_localize(path, config_for({Technique::CGFL}));
  EXPECT_EQ(r.exit_code, kExitInputError);
  EXPECT_NE(r.err.find("missing field 'program'"), std::string::npos) << r.err;
  EXPECT_EQ(cmd_localize(dir.path() / "absent.json", config_for({Technique::CGFL})).exit_code, kExitInputError);
}

fs::path worked_example_corpus(const TempDir& dir) {
  fs::copy_file(testing::worked_example_path(), dir.path() / "find_mid_v1.json");
  return dir.path();
}

TEST(Evaluate, WorkedExampleExamAndTopN) {
  TempDir dir;
  auto config = config_for({Technique::CGFL, Technique::CPFL});
  config.top_n_values = {5.0, 10.0};
  const auto r = cmd_evaluate(worked_example_corpus(dir), config);
  ASSERT_EQ(r.exit_code, kExitOk) << r.err;
  const auto doc = json::parse(r.out);
  const auto& v = doc.at("versions").at(0);
  EXPECT_NEAR(v.at("results").at("cgfl").at("exam_best").get<double>(), 100.0 / 13.0, 0.01);
  EXPECT_NEAR(v.at("results").at("cgfl").at("exam_worst").get<double>(), 7.692, 0.01);
  for (const auto& e : doc.at("top_n")) {
    if (e.at("technique") != "cgfl") continue;
    EXPECT_EQ(e.at("percent").get<double>(), e.at("n").get<double>() == 5.0 ? 0.0 : 100.0);
  }
}

TEST(Evaluate, TechniquesWithEqualRanksCompareEqual) {
  TempDir dir;
  const auto r = cmd_evaluate(worked_example_corpus(dir), config_for({Technique::CGFL, Technique::CPFL}));
  ASSERT_EQ(r.exit_code, kExitOk) << r.err;
  for (const auto& e : json::parse(r.out).at("pairwise")) {
    EXPECT_EQ(e.at("equal").get<double>(), 100.0);
  }
}

TEST(Evaluate, RepeatedTechniqueRejected) {
  TempDir dir;
  const auto r = cmd_evaluate(worked_example_corpus(dir), config_for({Technique::CGFL, Technique::CGFL}));
  EXPECT_EQ(r.exit_code, kExitInputError);
  EXPECT_NE(r.err.find("technique listed twice: cgfl"), std::string::npos) << r.err;
}

TEST(Evaluate, SkippedVersionsAreReported) {
  TempDir dir;
  worked_example_corpus(dir);
  auto m = load_spectra_file(testing::worked_example_path());
  m.version = "v2";
  for (auto& t : m.tests) t.verdict = Verdict::Fail;
  dir.write("find_mid_v2.json", serialize_spectra(m));
  const auto r = cmd_evaluate(dir.path(), config_for({Technique::CGFL}));
  ASSERT_EQ(r.exit_code, kExitOk);
  EXPECT_NE(r.err.find("skipped find_mid/v2: no passing tests"), std::string::npos) << r.err;
  const auto doc = json::parse(r.out);
  EXPECT_EQ(doc.at("versions").size(), 1u);
  EXPECT_EQ(doc.at("skipped").at(0).at("reason"), "no passing tests");
}

TEST(Evaluate, TieFilterRestrictsTables) {
  TempDir dir;
  auto config = config_for({Technique::CGFL});
  config.tie = TieMode::Best;
  const auto doc = json::parse(cmd_evaluate(worked_example_corpus(dir), config).out);
  for (const auto& e : doc.at("top_n")) EXPECT_EQ(e.at("tie"), "best");
}

TEST(Evaluate, ByteIdenticalAcrossRuns) {
  TempDir dir;
  const auto corpus = worked_example_corpus(dir);
  const auto config = config_for({Technique::CGFL, Technique::CPFL, Technique::Ochiai});
  EXPECT_EQ(cmd_evaluate(corpus, config).out, cmd_evaluate(corpus, config).out);
}

TEST(Evaluate, MissingDirectoryIsAnInputError) {
  EXPECT_EQ(cmd_evaluate("/nonexistent/cgfl", config_for({Technique::CGFL})).exit_code, kExitInputError);
}

VersionResult result_row(std::string program, std::string version, std::size_t n, std::size_t best,
                         std::size_t worst) {
  VersionResult r;
  r.program = std::move(program);
  r.version = std::move(version);
  r.statement_count = n;
  r.best_rank = best;
  r.worst_rank = worst;
  r.exam_best = exam_percent(best, n);
  r.exam_worst = exam_percent(worst, n);
  return r;
}

fs::path write_summary(const TempDir& dir, const std::string& name, Technique t, std::vector<VersionResult> rows) {
  EvaluationSummary s;
  s.techniques = {t};
  for (auto& r : rows) r.technique = t;
  s.results[t] = std::move(rows);
  aggregate(s);
  return dir.write(name, summary_json(s).dump(2));
}

TEST(Compare, SelfComparisonIsNeutral) {
  TempDir dir;
  const auto corpus = worked_example_corpus(dir);
  const auto summary = dir.write("s.json", cmd_evaluate(corpus, config_for({Technique::CGFL})).out);
  const auto r = cmd_compare({summary, summary, std::nullopt, std::nullopt, std::nullopt, OutputFormat::Json});
  ASSERT_EQ(r.exit_code, kExitOk) << r.err;
  const auto doc = json::parse(r.out);
  for (const auto& e : doc.at("pairwise")) EXPECT_EQ(e.at("equal").get<double>(), 100.0);
  for (const auto& e : doc.at("rimp")) EXPECT_EQ(e.at("value").get<double>(), 100.0);
  for (const auto& e : doc.at("average_improvement")) EXPECT_EQ(e.at("value").get<double>(), 0.0);
}

TEST(Compare, HandComputedThreeVersionCorpus) {
  TempDir dir;
  const auto a = write_summary(dir, "a.json", Technique::CGFL,
                               {result_row("P", "v1", 10, 1, 3), result_row("P", "v2", 20, 4, 4),
                                result_row("Q", "v1", 50, 5, 10)});
  const auto b = write_summary(dir, "b.json", Technique::Ochiai,
                               {result_row("P", "v1", 10, 2, 2), result_row("P", "v2", 20, 4, 8),
                                result_row("Q", "v1", 50, 10, 20)});
  const auto r = cmd_compare({a, b, std::nullopt, std::nullopt, std::nullopt, OutputFormat::Json});
  ASSERT_EQ(r.exit_code, kExitOk) << r.err;
  const auto doc = json::parse(r.out);
  EXPECT_EQ(doc.at("a").at("technique"), "cgfl");
  EXPECT_EQ(doc.at("b").at("technique"), "ochiai");

  std::map<std::string, json> modes;
  for (const auto& e : doc.at("pairwise")) modes[e.at("mode")] = e;
  // best: 1<2, 4=4, 5<10
  EXPECT_NEAR(modes["best_vs_best"].at("more").get<double>(), 200.0 / 3.0, 1e-9);
  EXPECT_NEAR(modes["best_vs_best"].at("equal").get<double>(), 100.0 / 3.0, 1e-9);
  // worst: 3>2, 4<8, 10<20
  EXPECT_NEAR(modes["worst_vs_worst"].at("more").get<double>(), 200.0 / 3.0, 1e-9);
  EXPECT_NEAR(modes["worst_vs_worst"].at("less").get<double>(), 100.0 / 3.0, 1e-9);
  // a worst vs b best: 3>2, 4=4, 10=10
  EXPECT_NEAR(modes["worst_vs_best"].at("equal").get<double>(), 200.0 / 3.0, 1e-9);
  EXPECT_NEAR(modes["worst_vs_best"].at("less").get<double>(), 100.0 / 3.0, 1e-9);

  std::map<std::string, double> rimp;
  for (const auto& e : doc.at("rimp")) {
    rimp[e.at("program").get<std::string>() + "/" + e.at("tie").get<std::string>()] = e.at("value").get<double>();
  }
  EXPECT_NEAR(rimp.at("P/best"), 500.0 / 6.0, 1e-9);
  EXPECT_NEAR(rimp.at("P/worst"), 70.0, 1e-9);
  EXPECT_NEAR(rimp.at("Q/best"), 50.0, 1e-9);
  EXPECT_NEAR(rimp.at("Q/worst"), 50.0, 1e-9);

  std::map<std::string, double> ia;
  for (const auto& e : doc.at("average_improvement")) ia[e.at("tie")] = e.at("value").get<double>();
  EXPECT_NEAR(ia.at("best"), 50.0, 1e-9);
  EXPECT_NEAR(ia.at("worst"), 300.0 / 7.0, 1e-9);
}

TEST(Compare, DisjointVersionSetsRejected) {
  TempDir dir;
  const auto a = write_summary(dir, "a.json", Technique::CGFL, {result_row("P", "v1", 10, 1, 3)});
  const auto b = write_summary(dir, "b.json", Technique::CGFL, {result_row("P", "v9", 10, 1, 3)});
  const auto r = cmd_compare({a, b, std::nullopt, std::nullopt, std::nullopt, OutputFormat::Json});
  EXPECT_EQ(r.exit_code, kExitInputError);
  EXPECT_NE(r.err.find("different versions"), std::string::npos) << r.err;
}

TEST(Compare, UnknownTechniqueInSummaryRejected) {
  TempDir dir;
  const auto a = write_summary(dir, "a.json", Technique::CGFL, {result_row("P", "v1", 10, 1, 3)});
  const auto r = cmd_compare({a, a, Technique::Ochiai, std::nullopt, std::nullopt, OutputFormat::Json});
  EXPECT_EQ(r.exit_code, kExitInputError);
}

class IngestCommand : public ::testing::Test {
 protected:
  void SetUp() override {
    for (const char* sub : {"gcov", "golden", "actual"}) {
      fs::copy(testing::fixture_dir() / "find_mid_gcov" / sub, dir.path() / sub, fs::copy_options::recursive);
    }
    req.program = "find_mid";
    req.version = "gcov-v1";
    req.gcov_dir = dir.path() / "gcov";
    req.golden_dir = dir.path() / "golden";
    req.actual_dir = dir.path() / "actual";
    req.faulty_lines = {7};
  }

  TempDir dir;
  IngestRequest req;
};

TEST_F(IngestCommand, OutputLoadsBackAndLocalizes) {
  const auto r = cmd_ingest(req);
  ASSERT_EQ(r.exit_code, kExitOk) << r.err;
  const auto m = load_spectra(r.out);
  EXPECT_EQ(serialize_spectra(m), r.out);
  const auto path = dir.write("ingested.json", r.out);
  const auto loc = cmd_localize(path, config_for({Technique::CGFL}));
  ASSERT_EQ(loc.exit_code, kExitOk) << loc.err;
  const auto first = json::parse(loc.out).at("reports").at(0).at("statements").at(0);
  EXPECT_EQ(first.at("label"), "find_mid.c:7");
  EXPECT_EQ(first.at("best_rank"), 1);
}

TEST_F(IngestCommand, MissingActualOutputExcludes) {
  fs::remove(dir.path() / "actual" / "t9.out");
  const auto r = cmd_ingest(req);
  EXPECT_EQ(r.exit_code, kExitExcluded);
  EXPECT_TRUE(r.out.empty());
  EXPECT_NE(r.err.find("version excluded: a test run crashed (crashed: t9)"), std::string::npos) << r.err;
}

TEST_F(IngestCommand, InconsistentExecutableLinesAreAnInputError) {
  const auto path = dir.path() / "gcov" / "t5.gcov";
  auto text = read_file(path);
  text += "        1:   99:extra();\n";
  std::ofstream(path, std::ios::binary) << text;
  const auto r = cmd_ingest(req);
  EXPECT_EQ(r.exit_code, kExitInputError);
  EXPECT_NE(r.err.find("inconsistent executable lines"), std::string::npos) << r.err;
}

}  // namespace
}  // namespace cgfl
