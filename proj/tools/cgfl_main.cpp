// cgfl: spectrum-based fault localization from the command line.
//
//   cgfl localize SPECTRA.json [--technique cgfl] [--format json|tsv|table]
//   cgfl evaluate CORPUS_DIR   [--technique ...] [--tie both] [--top-n 1 --top-n 5] [--series]
//   cgfl compare SUMMARY_A SUMMARY_B [--technique-a T] [--technique-b T]
//   cgfl ingest --gcov DIR --golden DIR --actual DIR --program P --version V
//
// Exit codes: 0 success, 1 input or usage error, 2 version excluded.

#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cgfl/cgfl.hpp"

namespace {

int emit(const cgfl::CommandResult& r, const std::string& out_path) {
  std::cerr << r.err;
  if (r.exit_code != cgfl::kExitOk) return r.exit_code;
  if (out_path.empty()) {
    std::cout << r.out;
  } else {
    std::ofstream f(out_path, std::ios::binary);
    if (!f) {
      std::cerr << "cannot write " << out_path << "\n";
      return cgfl::kExitInputError;
    }
    f << r.out;
  }
  return r.exit_code;
}

std::vector<cgfl::Technique> techniques_from(const std::vector<std::string>& names,
                                             std::vector<cgfl::Technique> fallback) {
  if (names.empty()) return fallback;
  std::vector<cgfl::Technique> out;
  for (const auto& n : names) {
    const auto t = cgfl::parse_technique(n);
    if (std::find(out.begin(), out.end(), t) == out.end()) out.push_back(t);
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectrum-based fault localization with conditional-probability scoring and grouping"};
  app.require_subcommand(1);

  std::vector<std::string> techniques;
  std::string tie = "both";
  std::vector<double> top_n;
  std::string format = "json";
  std::string crash_policy = "exclude-version";
  std::string out_path;
  const std::vector<std::string> technique_names{"cgfl", "cpfl", "tarantula", "ochiai", "dstar2"};

  auto add_common = [&](CLI::App* cmd, std::vector<std::string> formats = {"json", "tsv", "table"}) {
    cmd->add_option("--format", format, "Output format")->check(CLI::IsMember(formats));
    cmd->add_option("--out", out_path, "Write the report to PATH instead of stdout");
  };

  std::string spectra_path;
  auto* localize = app.add_subcommand("localize", "Rank the statements of one version");
  localize->add_option("spectra", spectra_path, "Spectra document")->required();
  localize->add_option("--technique", techniques, "Scoring technique (repeatable)")
      ->check(CLI::IsMember(technique_names));
  add_common(localize);

  std::string corpus_dir;
  bool series = false;
  auto* evaluate = app.add_subcommand("evaluate", "Evaluate techniques over a corpus directory");
  evaluate->add_option("corpus", corpus_dir, "Directory of spectra documents")->required();
  evaluate->add_option("--technique", techniques, "Technique (repeatable; first is the reference)")
      ->check(CLI::IsMember(technique_names));
  evaluate->add_option("--tie", tie, "Tie handling reported")->check(CLI::IsMember({"best", "worst", "both"}));
  evaluate->add_option("--top-n", top_n, "Top-N% threshold (repeatable)");
  evaluate->add_flag("--series", series, "Include EXAM effectiveness step series");
  add_common(evaluate);

  std::string summary_a, summary_b, technique_a, technique_b;
  auto* compare = app.add_subcommand("compare", "Compare two evaluation summaries");
  compare->add_option("summary_a", summary_a, "First evaluation summary (json)")->required();
  compare->add_option("summary_b", summary_b, "Second evaluation summary (json)")->required();
  compare->add_option("--technique-a", technique_a, "Technique taken from the first summary")
      ->check(CLI::IsMember(technique_names));
  compare->add_option("--technique-b", technique_b, "Technique taken from the second summary")
      ->check(CLI::IsMember(technique_names));
  compare->add_option("--tie", tie, "Tie handling reported")->check(CLI::IsMember({"best", "worst", "both"}));
  add_common(compare, {"json", "table"});

  cgfl::IngestRequest ingest_req;
  std::string gcov_dir, golden_dir, actual_dir;
  bool normalize = false;
  auto* ingest = app.add_subcommand("ingest", "Build a spectra document from gcov reports and outputs");
  ingest->add_option("--gcov", gcov_dir, "Directory of <test-id>.gcov reports")->required();
  ingest->add_option("--golden", golden_dir, "Directory of expected outputs")->required();
  ingest->add_option("--actual", actual_dir, "Directory of faulty-version outputs")->required();
  ingest->add_option("--program", ingest_req.program, "Program name")->required();
  ingest->add_option("--version", ingest_req.version, "Version name")->required();
  ingest->add_option("--faulty-line", ingest_req.faulty_lines, "Ground-truth faulty source line (repeatable)");
  ingest->add_option("--crash-policy", crash_policy, "Handling of crashed runs")
      ->check(CLI::IsMember({"exclude-version", "fail-test"}));
  ingest->add_flag("--normalize-whitespace", normalize, "Ignore trailing whitespace when diffing outputs");
  ingest->add_option("--out", out_path, "Write the document to PATH instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : cgfl::kExitInputError;
  }

  try {
    cgfl::RunConfig config;
    config.format = cgfl::parse_format(format);
    config.tie = cgfl::parse_tie(tie);
    if (!top_n.empty()) config.top_n_values = top_n;
    config.series = series;

    if (localize->parsed()) {
      config.techniques = techniques_from(techniques, {cgfl::Technique::CGFL});
      return emit(cgfl::cmd_localize(spectra_path, config), out_path);
    }
    if (evaluate->parsed()) {
      config.techniques = techniques_from(
          techniques, {cgfl::Technique::CGFL, cgfl::Technique::CPFL, cgfl::Technique::Tarantula,
                       cgfl::Technique::Ochiai, cgfl::Technique::DStar2});
      return emit(cgfl::cmd_evaluate(corpus_dir, config), out_path);
    }
    if (compare->parsed()) {
      cgfl::CompareRequest req{summary_a, summary_b, std::nullopt, std::nullopt, config.tie,
                               config.format};
      if (!technique_a.empty()) req.technique_a = cgfl::parse_technique(technique_a);
      if (!technique_b.empty()) req.technique_b = cgfl::parse_technique(technique_b);
      return emit(cgfl::cmd_compare(req), out_path);
    }
    if (ingest->parsed()) {
      ingest_req.gcov_dir = gcov_dir;
      ingest_req.golden_dir = golden_dir;
      ingest_req.actual_dir = actual_dir;
      ingest_req.crash_policy = cgfl::parse_crash_policy(crash_policy);
      ingest_req.normalize_whitespace = normalize;
      return emit(cgfl::cmd_ingest(ingest_req), out_path);
    }
  } catch (const cgfl::Error& e) {
    std::cerr << e.what() << "\n";
    return cgfl::kExitInputError;
  }
  return cgfl::kExitInputError;
}
