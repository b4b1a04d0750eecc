#pragma once

// Ranked lists with best/worst tie semantics. Grouped ranking examines
// statements bucketed by how many failed tests cover them, larger buckets
// first, scores deciding order inside a bucket.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <vector>

#include "cgfl/error.hpp"
#include "cgfl/localizer.hpp"
#include "cgfl/spectra.hpp"

namespace cgfl {

// Group index per statement, equal to its failed-cover count.
struct GroupAssignment {
  std::size_t failed_total = 0;
  std::vector<std::size_t> group_of;
};

inline GroupAssignment assign_groups(const SpectrumCounts& counts) {
  GroupAssignment out{counts.failed_total, {}};
  out.group_of.reserve(counts.size());
  for (const auto& c : counts.statements) out.group_of.push_back(c.covered_failed);
  return out;
}

struct RankGroup {
  std::optional<std::size_t> failed_cover_count;  // nullopt for the flat ranking
  std::vector<std::size_t> members;               // display order
};

struct GroupedRanking {
  std::vector<RankGroup> groups;
  std::vector<std::size_t> best_rank;   // 1-based, per statement index
  std::vector<std::size_t> worst_rank;  // 1-based, per statement index
  std::vector<std::size_t> empty_groups;  // failed-cover counts with no members

  std::size_t statement_count() const { return best_rank.size(); }

  // Statement indices in examination order.
  std::vector<std::size_t> order() const {
    std::vector<std::size_t> out;
    out.reserve(statement_count());
    for (const auto& g : groups) out.insert(out.end(), g.members.begin(), g.members.end());
    return out;
  }

  // Failed-cover count of the group holding each statement.
  std::optional<std::size_t> group_of(std::size_t statement) const {
    for (const auto& g : groups) {
      if (std::find(g.members.begin(), g.members.end(), statement) != g.members.end()) {
        return g.failed_cover_count;
      }
    }
    return std::nullopt;
  }
};

// Finite scores closer than this (relative) share a tie class, so values
// that are equal as rationals but differ in the last ulp stay tied.
inline constexpr double kTieTolerance = 1e-12;

inline bool same_score(Suspiciousness a, Suspiciousness b) {
  if (a == b) return true;
  if (!a.is_finite() || !b.is_finite()) return false;
  const double scale = std::max({1.0, std::abs(a.value()), std::abs(b.value())});
  return std::abs(a.value() - b.value()) <= kTieTolerance * scale;
}

namespace detail {

// Sorts members by descending score (ties by index) and assigns ranks
// starting after `preceding` already-ranked statements.
inline void rank_group(RankGroup& group, const ScoreReport& scores, std::size_t preceding,
                       GroupedRanking& out) {
  auto& m = group.members;
  std::sort(m.begin(), m.end(), [&](std::size_t a, std::size_t b) {
    const auto sa = scores[a].score;
    const auto sb = scores[b].score;
    if (sa != sb) return sa > sb;
    return a < b;
  });
  std::size_t start = 0;
  while (start < m.size()) {
    std::size_t end = start + 1;
    while (end < m.size() && same_score(scores[m[start]].score, scores[m[end]].score)) ++end;
    std::sort(m.begin() + static_cast<std::ptrdiff_t>(start),
              m.begin() + static_cast<std::ptrdiff_t>(end));
    for (std::size_t i = start; i < end; ++i) {
      out.best_rank[m[i]] = preceding + start + 1;
      out.worst_rank[m[i]] = preceding + end;
    }
    start = end;
  }
}

}  // namespace detail

inline GroupedRanking rank_grouped(const ScoreReport& scores, const GroupAssignment& groups) {
  const std::size_t n = scores.size();
  if (groups.group_of.size() != n) {
    throw Error("score report covers " + std::to_string(n) + " statements but grouping covers " +
                std::to_string(groups.group_of.size()));
  }
  std::size_t max_group = groups.failed_total;
  for (auto g : groups.group_of) max_group = std::max(max_group, g);

  std::vector<std::vector<std::size_t>> buckets(max_group + 1);
  for (std::size_t s = 0; s < n; ++s) buckets[groups.group_of[s]].push_back(s);

  GroupedRanking out;
  out.best_rank.assign(n, 0);
  out.worst_rank.assign(n, 0);
  std::size_t preceding = 0;
  for (std::size_t k = buckets.size(); k-- > 0;) {
    if (buckets[k].empty()) {
      if (k <= groups.failed_total) out.empty_groups.push_back(k);
      continue;
    }
    RankGroup group{k, std::move(buckets[k])};
    detail::rank_group(group, scores, preceding, out);
    preceding += group.members.size();
    out.groups.push_back(std::move(group));
  }
  return out;
}

inline GroupedRanking rank_flat(const ScoreReport& scores) {
  GroupedRanking out;
  out.best_rank.assign(scores.size(), 0);
  out.worst_rank.assign(scores.size(), 0);
  RankGroup all{std::nullopt, std::vector<std::size_t>(scores.size())};
  std::iota(all.members.begin(), all.members.end(), std::size_t{0});
  detail::rank_group(all, scores, 0, out);
  out.groups.push_back(std::move(all));
  return out;
}

// Scores and ranks one version with the given technique; CGFL ranks grouped,
// everything else flat.
inline GroupedRanking rank_version(const CoverageMatrix& matrix, Technique technique,
                                   ScoreReport* scores_out = nullptr) {
  require_usable(matrix);
  const auto counts = compute_counts(matrix);
  auto scores = score_counts(counts, technique);
  auto ranking = technique == Technique::CGFL ? rank_grouped(scores, assign_groups(counts))
                                              : rank_flat(scores);
  if (scores_out) *scores_out = std::move(scores);
  return ranking;
}

}  // namespace cgfl
