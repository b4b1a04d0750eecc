#pragma once

// Evaluation metrics over ranked versions: EXAM score, Top-N%, relative
// improvement (RImp), average improvement (IA) and pairwise effectiveness.

#include <algorithm>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <vector>

#include "cgfl/error.hpp"
#include "cgfl/localizer.hpp"
#include "cgfl/ranking.hpp"
#include "cgfl/spectra.hpp"

namespace cgfl {

enum class TieMode { Best, Worst };

inline std::string_view to_string(TieMode m) { return m == TieMode::Best ? "best" : "worst"; }

struct ExamScore {
  double best = 0.0;   // percent of statements examined, fault first in its tie class
  double worst = 0.0;  // percent examined, fault last in its tie class
  std::size_t best_rank = 0;
  std::size_t worst_rank = 0;
  std::size_t located_fault = 0;
};

inline double exam_percent(std::size_t rank, std::size_t statement_count) {
  return static_cast<double>(rank) * 100.0 / static_cast<double>(statement_count);
}

// The search ends at the first faulty statement reached, so both ranks are
// minima over the faulty set.
inline ExamScore exam_score(const GroupedRanking& ranking, std::span<const std::size_t> faulty,
                            std::size_t statement_count) {
  if (faulty.empty()) throw Error("exam score needs at least one faulty statement");
  if (statement_count == 0 || ranking.statement_count() != statement_count) {
    throw Error("ranking does not cover " + std::to_string(statement_count) + " statements");
  }
  ExamScore out;
  out.best_rank = statement_count + 1;
  out.worst_rank = statement_count + 1;
  for (auto f : faulty) {
    if (f >= statement_count) {
      throw Error("faulty statement " + std::to_string(f) + " out of range");
    }
    if (ranking.best_rank[f] < out.best_rank) {
      out.best_rank = ranking.best_rank[f];
      out.located_fault = f;
    }
    out.worst_rank = std::min(out.worst_rank, ranking.worst_rank[f]);
  }
  out.best = exam_percent(out.best_rank, statement_count);
  out.worst = exam_percent(out.worst_rank, statement_count);
  return out;
}

struct VersionResult {
  std::string program;
  std::string version;
  std::size_t statement_count = 0;
  Technique technique = Technique::CGFL;
  std::size_t best_rank = 0;
  std::size_t worst_rank = 0;
  double exam_best = 0.0;
  double exam_worst = 0.0;
  std::size_t located_fault = 0;

  double exam(TieMode m) const { return m == TieMode::Best ? exam_best : exam_worst; }
  std::size_t rank(TieMode m) const { return m == TieMode::Best ? best_rank : worst_rank; }
  std::pair<std::string, std::string> key() const { return {program, version}; }
};

inline VersionResult evaluate_version(const CoverageMatrix& matrix, Technique technique) {
  const auto ranking = rank_version(matrix, technique);
  const auto exam = exam_score(ranking, matrix.faulty_statements, matrix.statement_count());
  return {matrix.program,  matrix.version,  matrix.statement_count(),
          technique,       exam.best_rank,  exam.worst_rank,
          exam.best,       exam.worst,      exam.located_fault};
}

// Percentage of versions whose EXAM score is at most n_percent.
inline double top_n(std::span<const VersionResult> results, double n_percent, TieMode mode) {
  if (results.empty()) throw Error("top-n needs a nonempty corpus");
  if (!(n_percent > 0.0)) throw Error("top-n threshold must be positive");
  const auto hits = std::count_if(results.begin(), results.end(),
                                  [&](const VersionResult& r) { return r.exam(mode) <= n_percent; });
  return static_cast<double>(hits) * 100.0 / static_cast<double>(results.size());
}

// Statements examined by a as a percentage of those examined by b.
inline double rimp(double examined_by_a, double examined_by_b) {
  if (examined_by_b <= 0.0) throw Error("rimp denominator must be positive");
  return examined_by_a / examined_by_b * 100.0;
}

// Positive when technique a needs less code examination on average than b.
inline double average_improvement(double avg_es_a, double avg_es_b) {
  if (avg_es_a <= 0.0) throw Error("average improvement needs a positive reference average");
  return (avg_es_b - avg_es_a) / avg_es_a * 100.0;
}

inline double average_exam(std::span<const VersionResult> results, TieMode mode) {
  if (results.empty()) throw Error("average exam needs a nonempty corpus");
  double total = 0.0;
  for (const auto& r : results) total += r.exam(mode);
  return total / static_cast<double>(results.size());
}

enum class CompareMode { BestVsBest, WorstVsWorst, WorstVsBest };

inline std::string_view to_string(CompareMode m) {
  switch (m) {
    case CompareMode::BestVsBest: return "best_vs_best";
    case CompareMode::WorstVsWorst: return "worst_vs_worst";
    case CompareMode::WorstVsBest: return "worst_vs_best";
  }
  return "unknown";
}

inline std::pair<TieMode, TieMode> tie_modes(CompareMode m) {
  switch (m) {
    case CompareMode::BestVsBest: return {TieMode::Best, TieMode::Best};
    case CompareMode::WorstVsWorst: return {TieMode::Worst, TieMode::Worst};
    case CompareMode::WorstVsBest: return {TieMode::Worst, TieMode::Best};
  }
  return {TieMode::Best, TieMode::Best};
}

// Percentages of versions where a is more, equally, or less effective than b.
struct PairwiseTally {
  double more = 0.0;
  double equal = 0.0;
  double less = 0.0;
};

namespace detail {

using VersionKey = std::pair<std::string, std::string>;

inline std::map<VersionKey, const VersionResult*> index_by_version(
    std::span<const VersionResult> results) {
  std::map<VersionKey, const VersionResult*> out;
  for (const auto& r : results) {
    if (!out.emplace(r.key(), &r).second) {
      throw Error("duplicate result for " + r.program + "/" + r.version);
    }
  }
  return out;
}

inline std::vector<std::pair<const VersionResult*, const VersionResult*>> match_versions(
    std::span<const VersionResult> a, std::span<const VersionResult> b) {
  const auto ia = index_by_version(a);
  const auto ib = index_by_version(b);
  if (ia.size() != ib.size() ||
      !std::equal(ia.begin(), ia.end(), ib.begin(),
                  [](const auto& x, const auto& y) { return x.first == y.first; })) {
    throw Error("result sets cover different versions");
  }
  std::vector<std::pair<const VersionResult*, const VersionResult*>> out;
  out.reserve(ia.size());
  for (auto it = ia.begin(), jt = ib.begin(); it != ia.end(); ++it, ++jt) {
    out.emplace_back(it->second, jt->second);
  }
  return out;
}

}  // namespace detail

inline PairwiseTally pairwise_compare(std::span<const VersionResult> a,
                                      std::span<const VersionResult> b, CompareMode mode) {
  const auto pairs = detail::match_versions(a, b);
  if (pairs.empty()) throw Error("pairwise comparison needs a nonempty corpus");
  const auto [mode_a, mode_b] = tie_modes(mode);
  std::size_t more = 0, equal = 0, less = 0;
  for (const auto& [ra, rb] : pairs) {
    const double ea = ra->exam(mode_a);
    const double eb = rb->exam(mode_b);
    if (ea < eb) {
      ++more;
    } else if (ea == eb) {
      ++equal;
    } else {
      ++less;
    }
  }
  const double n = static_cast<double>(pairs.size());
  return {more * 100.0 / n, equal * 100.0 / n, less * 100.0 / n};
}

// RImp per program, with statements examined summed over that program's
// versions before taking the ratio.
inline std::map<std::string, double> rimp_by_program(std::span<const VersionResult> a,
                                                     std::span<const VersionResult> b,
                                                     TieMode mode) {
  std::map<std::string, std::pair<double, double>> sums;
  for (const auto& [ra, rb] : detail::match_versions(a, b)) {
    auto& s = sums[ra->program];
    s.first += static_cast<double>(ra->rank(mode));
    s.second += static_cast<double>(rb->rank(mode));
  }
  std::map<std::string, double> out;
  for (const auto& [program, s] : sums) out[program] = rimp(s.first, s.second);
  return out;
}

// Step points (x = EXAM %, y = % of versions located at or below x).
struct SeriesPoint {
  double exam = 0.0;
  double located = 0.0;
};

inline std::vector<SeriesPoint> effectiveness_series(std::span<const VersionResult> results,
                                                     TieMode mode) {
  std::vector<double> exams;
  exams.reserve(results.size());
  for (const auto& r : results) exams.push_back(r.exam(mode));
  std::sort(exams.begin(), exams.end());
  std::vector<SeriesPoint> out;
  const double n = static_cast<double>(exams.size());
  for (std::size_t i = 0; i < exams.size(); ++i) {
    if (i + 1 < exams.size() && exams[i + 1] == exams[i]) continue;
    out.push_back({exams[i], static_cast<double>(i + 1) * 100.0 / n});
  }
  return out;
}

struct SkippedVersion {
  std::string program;
  std::string version;
  std::string reason;
};

struct TopNEntry {
  Technique technique;
  double n_percent;
  TieMode tie;
  double percent;
};

struct RImpEntry {
  std::string program;
  Technique a;
  Technique b;
  TieMode tie;
  double value;
};

struct ImprovementEntry {
  Technique a;
  Technique b;
  TieMode tie;
  double value;
};

struct MeanImprovementEntry {
  Technique reference;
  TieMode tie;
  double value;
};

struct PairwiseEntry {
  Technique a;
  Technique b;
  CompareMode mode;
  PairwiseTally tally;
};

struct AverageExamEntry {
  Technique technique;
  TieMode tie;
  double value;
};

// Corpus-level results. The first technique is the reference that RImp and
// pairwise tallies compare against every other technique; IA covers every
// ordered pair.
struct EvaluationSummary {
  std::vector<Technique> techniques;
  std::map<Technique, std::vector<VersionResult>> results;
  std::vector<SkippedVersion> skipped;
  std::vector<double> top_n_values;
  std::vector<AverageExamEntry> average_exam;
  std::vector<TopNEntry> top_n;
  std::vector<RImpEntry> rimp;
  std::vector<ImprovementEntry> improvement;
  std::vector<PairwiseEntry> pairwise;
  std::vector<MeanImprovementEntry> mean_improvement;  // unweighted mean of reference IAs

  const std::vector<VersionResult>& results_for(Technique t) const {
    auto it = results.find(t);
    if (it == results.end()) throw Error("no results for " + std::string(to_string(t)));
    return it->second;
  }
};

inline constexpr TieMode kTieModes[] = {TieMode::Best, TieMode::Worst};
inline constexpr CompareMode kCompareModes[] = {CompareMode::BestVsBest, CompareMode::WorstVsWorst,
                                                CompareMode::WorstVsBest};

// Fills the aggregate tables from per-technique results sorted by version.
inline void aggregate(EvaluationSummary& s) {
  s.average_exam.clear();
  s.top_n.clear();
  s.rimp.clear();
  s.improvement.clear();
  s.pairwise.clear();
  s.mean_improvement.clear();
  if (s.techniques.empty()) return;
  const bool has_versions = !s.results_for(s.techniques.front()).empty();
  if (!has_versions) return;

  for (auto t : s.techniques) {
    for (auto tie : kTieModes) {
      s.average_exam.push_back({t, tie, average_exam(s.results_for(t), tie)});
      for (double n : s.top_n_values) s.top_n.push_back({t, n, tie, top_n(s.results_for(t), n, tie)});
    }
  }

  for (auto a : s.techniques) {
    for (auto b : s.techniques) {
      if (a == b) continue;
      for (auto tie : kTieModes) {
        s.improvement.push_back({a, b, tie,
                                 average_improvement(average_exam(s.results_for(a), tie),
                                                     average_exam(s.results_for(b), tie))});
      }
    }
  }

  const auto reference = s.techniques.front();
  const auto& ref = s.results_for(reference);
  for (std::size_t i = 1; i < s.techniques.size(); ++i) {
    const auto other = s.techniques[i];
    const auto& res = s.results_for(other);
    for (auto tie : kTieModes) {
      for (const auto& [program, value] : rimp_by_program(ref, res, tie)) {
        s.rimp.push_back({program, reference, other, tie, value});
      }
    }
    for (auto mode : kCompareModes) {
      s.pairwise.push_back({reference, other, mode, pairwise_compare(ref, res, mode)});
    }
  }

  if (s.techniques.size() > 1) {
    for (auto tie : kTieModes) {
      double total = 0.0;
      std::size_t count = 0;
      for (const auto& e : s.improvement) {
        if (e.a == reference && e.tie == tie) {
          total += e.value;
          ++count;
        }
      }
      s.mean_improvement.push_back({reference, tie, total / static_cast<double>(count)});
    }
  }
}

inline void sort_by_version(std::vector<VersionResult>& results) {
  std::sort(results.begin(), results.end(),
            [](const VersionResult& a, const VersionResult& b) { return a.key() < b.key(); });
}

// Scores every usable version with ground truth; the rest are listed as
// skipped. Versions are processed in (program, version) order.
inline EvaluationSummary evaluate_corpus(std::span<const CoverageMatrix> corpus,
                                         std::vector<Technique> techniques,
                                         std::vector<double> top_n_values = {1.0, 5.0}) {
  if (techniques.empty()) throw Error("at least one technique required");
  for (std::size_t i = 0; i < techniques.size(); ++i) {
    if (std::find(techniques.begin(), techniques.begin() + i, techniques[i]) != techniques.begin() + i) {
      throw Error("technique listed twice: " + std::string(to_string(techniques[i])));
    }
  }
  EvaluationSummary s;
  s.techniques = std::move(techniques);
  s.top_n_values = std::move(top_n_values);
  for (auto t : s.techniques) s.results[t];

  std::vector<const CoverageMatrix*> ordered;
  for (const auto& m : corpus) ordered.push_back(&m);
  std::sort(ordered.begin(), ordered.end(), [](const auto* a, const auto* b) {
    return std::tie(a->program, a->version) < std::tie(b->program, b->version);
  });
  for (std::size_t i = 1; i < ordered.size(); ++i) {
    if (ordered[i - 1]->program == ordered[i]->program &&
        ordered[i - 1]->version == ordered[i]->version) {
      throw Error("duplicate version " + ordered[i]->program + "/" + ordered[i]->version);
    }
  }

  for (const auto* m : ordered) {
    const auto report = validate_version(*m);
    if (!report.usable()) {
      s.skipped.push_back({m->program, m->version, std::string(describe(*report.exclusion))});
      continue;
    }
    if (m->faulty_statements.empty()) {
      s.skipped.push_back({m->program, m->version, "no ground-truth faulty statements"});
      continue;
    }
    for (auto t : s.techniques) s.results[t].push_back(evaluate_version(*m, t));
  }
  aggregate(s);
  return s;
}

}  // namespace cgfl
