#pragma once

// The four CLI commands as plain functions returning captured output, so the
// acceptance suite can drive them in-process.
//
// Exit codes: 0 success, 1 input/usage error, 2 usable input but the version
// is excluded.

#include <algorithm>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "cgfl/error.hpp"
#include "cgfl/ingestion.hpp"
#include "cgfl/metrics.hpp"
#include "cgfl/report.hpp"

namespace cgfl {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInputError = 1;
inline constexpr int kExitExcluded = 2;

struct CommandResult {
  int exit_code = kExitOk;
  std::string out;
  std::string err;
};

struct RunConfig {
  std::vector<Technique> techniques;
  std::optional<TieMode> tie;  // nullopt reports both
  std::vector<double> top_n_values{1.0, 5.0};
  OutputFormat format = OutputFormat::Json;
  CrashPolicy crash_policy = CrashPolicy::ExcludeVersion;
  bool series = false;
};

inline std::optional<TieMode> parse_tie(std::string_view s) {
  if (s == "both") return std::nullopt;
  if (s == "best") return TieMode::Best;
  if (s == "worst") return TieMode::Worst;
  throw Error("unknown tie mode '" + std::string(s) + "'");
}

inline CrashPolicy parse_crash_policy(std::string_view s) {
  if (s == "exclude-version") return CrashPolicy::ExcludeVersion;
  if (s == "fail-test") return CrashPolicy::FailTest;
  throw Error("unknown crash policy '" + std::string(s) + "'");
}

inline CommandResult cmd_localize(const std::filesystem::path& spectra, const RunConfig& config) {
  CommandResult result;
  try {
    if (config.techniques.empty()) throw Error("at least one technique required");
    const auto matrix = load_spectra_file(spectra);
    std::vector<LocalizeReport> reports;
    for (auto t : config.techniques) reports.push_back(localize(matrix, t));

    switch (config.format) {
      case OutputFormat::Json: {
        nlohmann::ordered_json doc;
        auto arr = nlohmann::ordered_json::array();
        for (const auto& r : reports) arr.push_back(localize_json(r));
        doc["reports"] = std::move(arr);
        result.out = doc.dump(2) + "\n";
        break;
      }
      case OutputFormat::Tsv:
        for (std::size_t i = 0; i < reports.size(); ++i) {
          if (reports.size() > 1) {
            if (i) result.out += '\n';
            result.out += "# technique: " + std::string(to_string(reports[i].technique)) + '\n';
          }
          result.out += localize_tsv(reports[i]);
        }
        break;
      case OutputFormat::Table:
        for (std::size_t i = 0; i < reports.size(); ++i) {
          if (i) result.out += '\n';
          result.out += localize_table(reports[i]);
        }
        break;
    }
  } catch (const ExcludedVersion& e) {
    result.exit_code = kExitExcluded;
    result.err = std::string(e.what()) + "\n";
  } catch (const Error& e) {
    result.exit_code = kExitInputError;
    result.err = std::string(e.what()) + "\n";
  }
  return result;
}

// Every *.json file in the directory is one version.
inline std::vector<CoverageMatrix> load_corpus(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw ParseError(dir.string() + ": not a directory");
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<CoverageMatrix> corpus;
  for (const auto& f : files) corpus.push_back(load_spectra_file(f));
  return corpus;
}

inline CommandResult cmd_evaluate(const std::filesystem::path& corpus_dir, const RunConfig& config) {
  CommandResult result;
  try {
    if (config.techniques.empty()) throw Error("at least one technique required");
    for (double n : config.top_n_values) {
      if (!(n > 0.0)) throw Error("top-n values must be positive");
    }
    const auto corpus = load_corpus(corpus_dir);
    const auto summary = evaluate_corpus(corpus, config.techniques, config.top_n_values);
    for (const auto& k : summary.skipped) {
      result.err += "warning: skipped " + k.program + "/" + k.version + ": " + k.reason + "\n";
    }
    switch (config.format) {
      case OutputFormat::Json:
        result.out = summary_json(summary, config.tie, config.series).dump(2) + "\n";
        break;
      case OutputFormat::Tsv:
        result.out = summary_tsv(summary);
        break;
      case OutputFormat::Table:
        result.out = summary_table(summary, config.tie);
        break;
    }
  } catch (const Error& e) {
    result.exit_code = kExitInputError;
    result.err += std::string(e.what()) + "\n";
  }
  return result;
}

struct CompareRequest {
  std::filesystem::path summary_a;
  std::filesystem::path summary_b;
  std::optional<Technique> technique_a;  // defaults to each summary's reference
  std::optional<Technique> technique_b;
  std::optional<TieMode> tie;
  OutputFormat format = OutputFormat::Json;
};

inline CommandResult cmd_compare(const CompareRequest& req) {
  CommandResult result;
  try {
    const auto load = [](const std::filesystem::path& p) {
      nlohmann::json doc;
      try {
        doc = nlohmann::json::parse(read_file(p));
      } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(p.string() + ": invalid JSON: " + e.what());
      }
      return summary_from_json(doc, p.string());
    };
    const auto a = load(req.summary_a);
    const auto b = load(req.summary_b);
    if (a.techniques.empty() || b.techniques.empty()) throw Error("summary without techniques");
    const auto ta = req.technique_a.value_or(a.techniques.front());
    const auto tb = req.technique_b.value_or(b.techniques.front());
    const auto& ra = a.results_for(ta);
    const auto& rb = b.results_for(tb);

    nlohmann::ordered_json out;
    out["a"] = {{"summary", req.summary_a.string()}, {"technique", to_string(ta)}};
    out["b"] = {{"summary", req.summary_b.string()}, {"technique", to_string(tb)}};

    auto pw = nlohmann::ordered_json::array();
    std::vector<std::vector<std::string>> pw_rows{{"mode", "more", "equal", "less"}};
    for (auto mode : kCompareModes) {
      const auto tally = pairwise_compare(ra, rb, mode);
      pw.push_back({{"mode", to_string(mode)},
                    {"more", tally.more},
                    {"equal", tally.equal},
                    {"less", tally.less}});
      pw_rows.push_back({std::string(to_string(mode)), format_fixed(tally.more, 2),
                         format_fixed(tally.equal, 2), format_fixed(tally.less, 2)});
    }
    out["pairwise"] = std::move(pw);

    out["rimp_aggregation"] = kRImpAggregation;
    auto rimp_rows = nlohmann::ordered_json::array();
    auto ia_rows = nlohmann::ordered_json::array();
    std::vector<std::vector<std::string>> table_rimp{{"program", "tie", "RImp %"}};
    std::vector<std::vector<std::string>> table_ia{{"tie", "avg exam a", "avg exam b", "IA %"}};
    for (auto tie : kTieModes) {
      if (!tie_selected(tie, req.tie)) continue;
      for (const auto& [program, value] : rimp_by_program(ra, rb, tie)) {
        rimp_rows.push_back({{"program", program}, {"tie", to_string(tie)}, {"value", value}});
        table_rimp.push_back({program, std::string(to_string(tie)), format_fixed(value, 2)});
      }
      const double avg_a = average_exam(ra, tie);
      const double avg_b = average_exam(rb, tie);
      const double ia = average_improvement(avg_a, avg_b);
      ia_rows.push_back({{"tie", to_string(tie)},
                         {"average_exam_a", avg_a},
                         {"average_exam_b", avg_b},
                         {"value", ia}});
      table_ia.push_back({std::string(to_string(tie)), format_fixed(avg_a, 2), format_fixed(avg_b, 2),
                          format_fixed(ia, 2)});
    }
    out["rimp"] = std::move(rimp_rows);
    out["average_improvement"] = std::move(ia_rows);

    if (req.format == OutputFormat::Table) {
      result.out = std::string(to_string(ta)) + " (" + req.summary_a.string() + ") vs " +
                   std::string(to_string(tb)) + " (" + req.summary_b.string() + ")\n\n" +
                   "Pairwise effectiveness (% of versions)\n" + detail::render_table(pw_rows) +
                   "\nRImp\n" + detail::render_table(table_rimp) + "\nAverage improvement\n" +
                   detail::render_table(table_ia);
    } else {
      result.out = out.dump(2) + "\n";
    }
  } catch (const Error& e) {
    result.exit_code = kExitInputError;
    result.err = std::string(e.what()) + "\n";
  }
  return result;
}

inline CommandResult cmd_ingest(const IngestRequest& req) {
  CommandResult result;
  try {
    const auto ingested = ingest_version(req);
    if (!ingested.matrix) {
      result.exit_code = kExitExcluded;
      result.err = req.program + "/" + req.version + ": version excluded: " +
                   std::string(describe(*ingested.exclusion));
      if (!ingested.crashed.empty()) {
        result.err += " (crashed:";
        for (const auto& id : ingested.crashed) result.err += " " + id;
        result.err += ")";
      }
      result.err += "\n";
      return result;
    }
    if (!ingested.crashed.empty()) {
      result.err = "warning: crashed runs counted as failures:";
      for (const auto& id : ingested.crashed) result.err += " " + id;
      result.err += "\n";
    }
    result.out = serialize_spectra(*ingested.matrix);
  } catch (const Error& e) {
    result.exit_code = kExitInputError;
    result.err = std::string(e.what()) + "\n";
  }
  return result;
}

}  // namespace cgfl
