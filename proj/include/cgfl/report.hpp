#pragma once

// Serializers for localization reports and evaluation summaries.
//
// Machine formats (json, tsv) carry full precision using the shortest
// round-trip representation of each double. Sentinels are written as the
// tokens "-inf" / "inf"; an undefined probability is null in json and
// "nan-undefined" in tsv. The table format rounds for display.

#include <charconv>
#include <cstdio>
#include <iomanip>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "cgfl/error.hpp"
#include "cgfl/localizer.hpp"
#include "cgfl/metrics.hpp"
#include "cgfl/ranking.hpp"
#include "cgfl/spectra.hpp"

namespace cgfl {

enum class OutputFormat { Json, Tsv, Table };

inline OutputFormat parse_format(std::string_view s) {
  if (s == "json") return OutputFormat::Json;
  if (s == "tsv") return OutputFormat::Tsv;
  if (s == "table") return OutputFormat::Table;
  throw Error("unknown output format '" + std::string(s) + "'");
}

inline constexpr std::string_view kMinusInfToken = "-inf";
inline constexpr std::string_view kPlusInfToken = "inf";
inline constexpr std::string_view kUndefinedToken = "nan-undefined";

// Shortest representation that parses back to the same double.
inline std::string format_number(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) throw Error("cannot format number");
  return std::string(buf, ptr);
}

inline std::string format_fixed(double v, int digits) {
  std::ostringstream ss;
  ss << std::fixed << std::setprecision(digits) << v;
  return ss.str();
}

inline std::string score_token(Suspiciousness s) {
  if (s.is_minus_infinity()) return std::string(kMinusInfToken);
  if (s.is_plus_infinity()) return std::string(kPlusInfToken);
  return format_number(s.value());
}

inline nlohmann::ordered_json score_json(Suspiciousness s) {
  if (!s.is_finite()) return score_token(s);
  return s.value();
}

inline Suspiciousness parse_score_token(std::string_view token) {
  if (token == kMinusInfToken) return Suspiciousness::minus_infinity();
  if (token == kPlusInfToken) return Suspiciousness::plus_infinity();
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
  if (ec != std::errc() || ptr != token.data() + token.size()) {
    throw ParseError("invalid score token '" + std::string(token) + "'");
  }
  return Suspiciousness::finite(v);
}

// ---------------------------------------------------------------------------
// Localization report
// ---------------------------------------------------------------------------

struct LocalizeRow {
  std::size_t index = 0;
  std::optional<std::string> label;
  std::optional<std::size_t> group;
  std::optional<PsiVector> psi;
  Suspiciousness score;
  std::size_t best_rank = 0;
  std::size_t worst_rank = 0;
};

struct LocalizeReport {
  std::string program;
  std::string version;
  Technique technique = Technique::CGFL;
  std::size_t failed_tests = 0;
  std::size_t passed_tests = 0;
  std::vector<std::size_t> empty_groups;
  std::vector<LocalizeRow> rows;  // examination order
};

// Throws ExcludedVersion for versions without both verdict classes.
inline LocalizeReport localize(const CoverageMatrix& matrix, Technique technique) {
  ScoreReport scores;
  const auto ranking = rank_version(matrix, technique, &scores);
  LocalizeReport report{matrix.program, matrix.version,  technique,
                        matrix.failed_total(), matrix.passed_total(), ranking.empty_groups, {}};
  for (const auto& group : ranking.groups) {
    for (auto s : group.members) {
      report.rows.push_back({s, matrix.statements[s].label, group.failed_cover_count,
                             scores[s].psi, scores[s].score, ranking.best_rank[s],
                             ranking.worst_rank[s]});
    }
  }
  return report;
}

namespace detail {

inline nlohmann::ordered_json probability_json(const Probability& p) {
  return p ? nlohmann::ordered_json(*p) : nlohmann::ordered_json();
}

inline std::string probability_token(const Probability& p) {
  return p ? format_number(*p) : std::string(kUndefinedToken);
}

inline std::string probability_display(const Probability& p) {
  return p ? format_fixed(*p, 4) : std::string("undef");
}

}  // namespace detail

inline nlohmann::ordered_json localize_json(const LocalizeReport& r) {
  nlohmann::ordered_json out;
  out["program"] = r.program;
  out["version"] = r.version;
  out["technique"] = to_string(r.technique);
  out["statement_count"] = r.rows.size();
  out["failed_tests"] = r.failed_tests;
  out["passed_tests"] = r.passed_tests;
  if (r.technique == Technique::CGFL) out["empty_groups"] = r.empty_groups;
  auto rows = nlohmann::ordered_json::array();
  for (const auto& row : r.rows) {
    nlohmann::ordered_json j;
    j["index"] = row.index;
    j["label"] = row.label ? nlohmann::ordered_json(*row.label) : nlohmann::ordered_json();
    if (row.group) j["group"] = *row.group;
    if (row.psi) {
      j["psi_fc"] = detail::probability_json(row.psi->fail_given_covered);
      j["psi_cf"] = detail::probability_json(row.psi->covered_given_fail);
      j["psi_cs"] = detail::probability_json(row.psi->covered_given_pass);
      j["psi_su"] = detail::probability_json(row.psi->pass_given_uncovered);
    }
    j["score"] = score_json(row.score);
    j["best_rank"] = row.best_rank;
    j["worst_rank"] = row.worst_rank;
    rows.push_back(std::move(j));
  }
  out["statements"] = std::move(rows);
  return out;
}

inline constexpr std::string_view kLocalizeTsvHeader =
    "index\tlabel\tgroup\tpsi_fc\tpsi_cf\tpsi_cs\tpsi_su\tscore\tbest_rank\tworst_rank";

// Columns that do not apply to the technique are left empty.
inline std::string localize_tsv(const LocalizeReport& r) {
  std::string out(kLocalizeTsvHeader);
  out += '\n';
  for (const auto& row : r.rows) {
    out += std::to_string(row.index) + '\t' + row.label.value_or("") + '\t';
    out += row.group ? std::to_string(*row.group) : "";
    for (auto p : {&PsiVector::fail_given_covered, &PsiVector::covered_given_fail,
                          &PsiVector::covered_given_pass, &PsiVector::pass_given_uncovered}) {
      out += '\t';
      if (row.psi) out += detail::probability_token(row.psi.value().*p);
    }
    out += '\t' + score_token(row.score) + '\t' + std::to_string(row.best_rank) + '\t' +
           std::to_string(row.worst_rank) + '\n';
  }
  return out;
}

namespace detail {

// Left-aligned text table with two-space gutters.
inline std::string render_table(const std::vector<std::vector<std::string>>& cells) {
  std::vector<std::size_t> widths;
  for (const auto& row : cells) {
    if (widths.size() < row.size()) widths.resize(row.size(), 0);
    for (std::size_t c = 0; c < row.size(); ++c) widths[c] = std::max(widths[c], row[c].size());
  }
  std::string out;
  for (const auto& row : cells) {
    std::string line;
    for (std::size_t c = 0; c < row.size(); ++c) {
      line += row[c];
      if (c + 1 < row.size()) line += std::string(widths[c] - row[c].size() + 2, ' ');
    }
    out += line + '\n';
  }
  return out;
}

}  // namespace detail

inline std::string localize_table(const LocalizeReport& r) {
  std::string out = r.program + " " + r.version + "  technique=" + std::string(to_string(r.technique)) +
                    "  failed=" + std::to_string(r.failed_tests) +
                    "  passed=" + std::to_string(r.passed_tests) + '\n';
  if (r.technique == Technique::CGFL && !r.empty_groups.empty()) {
    out += "empty groups:";
    for (auto g : r.empty_groups) out += " g" + std::to_string(g);
    out += '\n';
  }
  std::vector<std::vector<std::string>> cells{
      {"rank", "index", "label", "group", "psi_fc", "psi_cf", "psi_cs", "psi_su", "score"}};
  for (const auto& row : r.rows) {
    std::vector<std::string> c;
    c.push_back(row.best_rank == row.worst_rank
                    ? std::to_string(row.best_rank)
                    : std::to_string(row.best_rank) + "-" + std::to_string(row.worst_rank));
    c.push_back(std::to_string(row.index));
    c.push_back(row.label.value_or(""));
    c.push_back(row.group ? "g" + std::to_string(*row.group) : "");
    if (row.psi) {
      c.push_back(detail::probability_display(row.psi->fail_given_covered));
      c.push_back(detail::probability_display(row.psi->covered_given_fail));
      c.push_back(detail::probability_display(row.psi->covered_given_pass));
      c.push_back(detail::probability_display(row.psi->pass_given_uncovered));
    } else {
      c.insert(c.end(), 4, "");
    }
    c.push_back(row.score.is_finite() ? format_fixed(row.score.value(), 4) : score_token(row.score));
    cells.push_back(std::move(c));
  }
  return out + detail::render_table(cells);
}

// ---------------------------------------------------------------------------
// Evaluation summary
// ---------------------------------------------------------------------------

inline constexpr std::string_view kRImpAggregation =
    "per program: sum of located-fault ranks of technique a over the sum for technique b, x100";

inline bool tie_selected(TieMode tie, std::optional<TieMode> filter) {
  return !filter || *filter == tie;
}

inline nlohmann::ordered_json summary_json(const EvaluationSummary& s,
                                           std::optional<TieMode> tie_filter = std::nullopt,
                                           bool include_series = false) {
  nlohmann::ordered_json out;
  out["schema"] = "cgfl-evaluation-1";
  auto techniques = nlohmann::ordered_json::array();
  for (auto t : s.techniques) techniques.push_back(to_string(t));
  out["techniques"] = techniques;
  out["reference"] = s.techniques.empty() ? "" : std::string(to_string(s.techniques.front()));
  out["top_n_values"] = s.top_n_values;

  auto versions = nlohmann::ordered_json::array();
  if (!s.techniques.empty()) {
    const auto& first = s.results_for(s.techniques.front());
    for (std::size_t i = 0; i < first.size(); ++i) {
      nlohmann::ordered_json v;
      v["program"] = first[i].program;
      v["version"] = first[i].version;
      v["statement_count"] = first[i].statement_count;
      nlohmann::ordered_json per;
      for (auto t : s.techniques) {
        const auto& r = s.results_for(t).at(i);
        nlohmann::ordered_json j;
        j["best_rank"] = r.best_rank;
        j["worst_rank"] = r.worst_rank;
        j["exam_best"] = r.exam_best;
        j["exam_worst"] = r.exam_worst;
        j["located_fault"] = r.located_fault;
        per[std::string(to_string(t))] = std::move(j);
      }
      v["results"] = std::move(per);
      versions.push_back(std::move(v));
    }
  }
  out["versions"] = std::move(versions);

  auto skipped = nlohmann::ordered_json::array();
  for (const auto& k : s.skipped) {
    skipped.push_back({{"program", k.program}, {"version", k.version}, {"reason", k.reason}});
  }
  out["skipped"] = std::move(skipped);

  auto avg = nlohmann::ordered_json::array();
  for (const auto& e : s.average_exam) {
    if (!tie_selected(e.tie, tie_filter)) continue;
    avg.push_back({{"technique", to_string(e.technique)}, {"tie", to_string(e.tie)}, {"value", e.value}});
  }
  out["average_exam"] = std::move(avg);

  auto top = nlohmann::ordered_json::array();
  for (const auto& e : s.top_n) {
    if (!tie_selected(e.tie, tie_filter)) continue;
    top.push_back({{"technique", to_string(e.technique)},
                   {"n", e.n_percent},
                   {"tie", to_string(e.tie)},
                   {"percent", e.percent}});
  }
  out["top_n"] = std::move(top);

  out["rimp_aggregation"] = kRImpAggregation;
  auto rimp_rows = nlohmann::ordered_json::array();
  for (const auto& e : s.rimp) {
    if (!tie_selected(e.tie, tie_filter)) continue;
    rimp_rows.push_back({{"program", e.program},
                         {"a", to_string(e.a)},
                         {"b", to_string(e.b)},
                         {"tie", to_string(e.tie)},
                         {"value", e.value}});
  }
  out["rimp"] = std::move(rimp_rows);

  auto ia = nlohmann::ordered_json::array();
  for (const auto& e : s.improvement) {
    if (!tie_selected(e.tie, tie_filter)) continue;
    ia.push_back({{"a", to_string(e.a)}, {"b", to_string(e.b)}, {"tie", to_string(e.tie)}, {"value", e.value}});
  }
  out["average_improvement"] = std::move(ia);

  auto mean = nlohmann::ordered_json::array();
  for (const auto& e : s.mean_improvement) {
    if (!tie_selected(e.tie, tie_filter)) continue;
    mean.push_back({{"reference", to_string(e.reference)}, {"tie", to_string(e.tie)}, {"value", e.value}});
  }
  out["mean_improvement"] = std::move(mean);

  auto pw = nlohmann::ordered_json::array();
  for (const auto& e : s.pairwise) {
    pw.push_back({{"a", to_string(e.a)},
                  {"b", to_string(e.b)},
                  {"mode", to_string(e.mode)},
                  {"more", e.tally.more},
                  {"equal", e.tally.equal},
                  {"less", e.tally.less}});
  }
  out["pairwise"] = std::move(pw);

  if (include_series) {
    nlohmann::ordered_json series;
    for (auto t : s.techniques) {
      if (s.results_for(t).empty()) continue;
      nlohmann::ordered_json per;
      for (auto tie : kTieModes) {
        if (!tie_selected(tie, tie_filter)) continue;
        auto points = nlohmann::ordered_json::array();
        for (const auto& p : effectiveness_series(s.results_for(t), tie)) {
          points.push_back({p.exam, p.located});
        }
        per[std::string(to_string(tie))] = std::move(points);
      }
      series[std::string(to_string(t))] = std::move(per);
    }
    out["series"] = std::move(series);
  }
  return out;
}

// Rebuilds per-technique results from a serialized summary and recomputes
// the aggregate tables.
inline EvaluationSummary summary_from_json(const nlohmann::json& doc, std::string_view origin) {
  auto fail = [&](const std::string& what) {
    return ParseError(std::string(origin) + ": " + what);
  };
  try {
    if (doc.value("schema", "") != "cgfl-evaluation-1") throw fail("not an evaluation summary");
    EvaluationSummary s;
    for (const auto& t : doc.at("techniques")) s.techniques.push_back(parse_technique(t.get<std::string>()));
    for (const auto& n : doc.at("top_n_values")) s.top_n_values.push_back(n.get<double>());
    for (auto t : s.techniques) s.results[t];
    for (const auto& v : doc.at("versions")) {
      for (auto t : s.techniques) {
        const auto& j = v.at("results").at(std::string(to_string(t)));
        VersionResult r;
        r.program = v.at("program").get<std::string>();
        r.version = v.at("version").get<std::string>();
        r.statement_count = v.at("statement_count").get<std::size_t>();
        r.technique = t;
        r.best_rank = j.at("best_rank").get<std::size_t>();
        r.worst_rank = j.at("worst_rank").get<std::size_t>();
        r.exam_best = j.at("exam_best").get<double>();
        r.exam_worst = j.at("exam_worst").get<double>();
        r.located_fault = j.at("located_fault").get<std::size_t>();
        s.results[t].push_back(std::move(r));
      }
    }
    for (const auto& k : doc.at("skipped")) {
      s.skipped.push_back({k.at("program").get<std::string>(), k.at("version").get<std::string>(),
                           k.at("reason").get<std::string>()});
    }
    for (auto& [_, results] : s.results) sort_by_version(results);
    aggregate(s);
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw fail(std::string("malformed summary: ") + e.what());
  } catch (const ParseError&) {
    throw;
  } catch (const Error& e) {
    throw fail(e.what());
  }
}

inline std::string summary_tsv(const EvaluationSummary& s) {
  std::string out =
      "program\tversion\ttechnique\tstatement_count\tbest_rank\tworst_rank\texam_best\texam_worst\n";
  for (auto t : s.techniques) {
    for (const auto& r : s.results_for(t)) {
      out += r.program + '\t' + r.version + '\t' + std::string(to_string(t)) + '\t' +
             std::to_string(r.statement_count) + '\t' + std::to_string(r.best_rank) + '\t' +
             std::to_string(r.worst_rank) + '\t' + format_number(r.exam_best) + '\t' +
             format_number(r.exam_worst) + '\n';
    }
  }
  return out;
}

inline std::string summary_table(const EvaluationSummary& s, std::optional<TieMode> tie_filter) {
  auto pct = [](double v) { return format_fixed(v, 2); };
  std::string out;

  std::vector<std::vector<std::string>> exam{{"program", "version", "technique", "exam_best", "exam_worst"}};
  for (auto t : s.techniques) {
    for (const auto& r : s.results_for(t)) {
      exam.push_back({r.program, r.version, std::string(to_string(t)), pct(r.exam_best), pct(r.exam_worst)});
    }
  }
  out += "EXAM score (% of statements examined)\n" + detail::render_table(exam);

  if (!s.top_n.empty()) {
    std::vector<std::vector<std::string>> rows{{"technique", "tie", "N", "% versions"}};
    for (const auto& e : s.top_n) {
      if (tie_selected(e.tie, tie_filter)) {
        rows.push_back({std::string(to_string(e.technique)), std::string(to_string(e.tie)),
                        format_number(e.n_percent), pct(e.percent)});
      }
    }
    out += "\nTop-N%\n" + detail::render_table(rows);
  }
  if (!s.rimp.empty()) {
    std::vector<std::vector<std::string>> rows{{"program", "a", "b", "tie", "RImp %"}};
    for (const auto& e : s.rimp) {
      if (tie_selected(e.tie, tie_filter)) {
        rows.push_back({e.program, std::string(to_string(e.a)), std::string(to_string(e.b)),
                        std::string(to_string(e.tie)), pct(e.value)});
      }
    }
    out += "\nRImp (" + std::string(kRImpAggregation) + ")\n" + detail::render_table(rows);
  }
  if (!s.improvement.empty()) {
    std::vector<std::vector<std::string>> rows{{"a", "b", "tie", "IA %"}};
    for (const auto& e : s.improvement) {
      if (tie_selected(e.tie, tie_filter)) {
        rows.push_back({std::string(to_string(e.a)), std::string(to_string(e.b)),
                        std::string(to_string(e.tie)), pct(e.value)});
      }
    }
    for (const auto& e : s.mean_improvement) {
      if (tie_selected(e.tie, tie_filter)) {
        rows.push_back({std::string(to_string(e.reference)), "(mean of others)",
                        std::string(to_string(e.tie)), pct(e.value)});
      }
    }
    out += "\nAverage improvement\n" + detail::render_table(rows);
  }
  if (!s.pairwise.empty()) {
    std::vector<std::vector<std::string>> rows{{"a", "b", "mode", "more", "equal", "less"}};
    for (const auto& e : s.pairwise) {
      rows.push_back({std::string(to_string(e.a)), std::string(to_string(e.b)),
                      std::string(to_string(e.mode)), pct(e.tally.more), pct(e.tally.equal),
                      pct(e.tally.less)});
    }
    out += "\nPairwise effectiveness (% of versions)\n" + detail::render_table(rows);
  }
  if (!s.skipped.empty()) {
    std::vector<std::vector<std::string>> rows{{"program", "version", "reason"}};
    for (const auto& k : s.skipped) rows.push_back({k.program, k.version, k.reason});
    out += "\nSkipped\n" + detail::render_table(rows);
  }
  return out;
}

}  // namespace cgfl
