#pragma once

// Suspiciousness scoring: the conditional-probability localizer and the
// Tarantula / Ochiai / DStar2 baselines.

#include <cmath>
#include <compare>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cgfl/error.hpp"
#include "cgfl/spectra.hpp"

namespace cgfl {

enum class Technique { CGFL, CPFL, Tarantula, Ochiai, DStar2 };

inline std::string_view to_string(Technique t) {
  switch (t) {
    case Technique::CGFL: return "cgfl";
    case Technique::CPFL: return "cpfl";
    case Technique::Tarantula: return "tarantula";
    case Technique::Ochiai: return "ochiai";
    case Technique::DStar2: return "dstar2";
  }
  return "unknown";
}

inline Technique parse_technique(std::string_view name) {
  for (auto t : {Technique::CGFL, Technique::CPFL, Technique::Tarantula, Technique::Ochiai,
                 Technique::DStar2}) {
    if (to_string(t) == name) return t;
  }
  throw Error("unknown technique '" + std::string(name) + "'");
}

inline bool uses_psi(Technique t) { return t == Technique::CGFL || t == Technique::CPFL; }

// A conditional probability; nullopt when its conditioning event never occurs.
using Probability = std::optional<double>;

struct PsiVector {
  Probability fail_given_covered;      // P(F|C)
  Probability covered_given_fail;      // P(C|F)
  Probability covered_given_pass;      // P(C|S), reported only
  Probability pass_given_uncovered;    // P(S|U)

  friend bool operator==(const PsiVector&, const PsiVector&) = default;
};

// Score with explicit infinite sentinels. Finite values never hold NaN.
class Suspiciousness {
 public:
  constexpr Suspiciousness() = default;

  static constexpr Suspiciousness finite(double v) { return Suspiciousness(v); }
  static constexpr Suspiciousness minus_infinity() {
    return Suspiciousness(-std::numeric_limits<double>::infinity());
  }
  static constexpr Suspiciousness plus_infinity() {
    return Suspiciousness(std::numeric_limits<double>::infinity());
  }

  constexpr bool is_minus_infinity() const { return value_ == -std::numeric_limits<double>::infinity(); }
  constexpr bool is_plus_infinity() const { return value_ == std::numeric_limits<double>::infinity(); }
  constexpr bool is_finite() const { return !is_minus_infinity() && !is_plus_infinity(); }
  constexpr double value() const { return value_; }

  friend constexpr bool operator==(Suspiciousness, Suspiciousness) = default;
  friend constexpr std::partial_ordering operator<=>(Suspiciousness a, Suspiciousness b) {
    return a.value_ <=> b.value_;
  }

 private:
  constexpr explicit Suspiciousness(double v) : value_(v) {}
  double value_ = 0.0;
};

namespace detail {
inline Probability ratio(std::size_t num, std::size_t den) {
  if (den == 0) return std::nullopt;
  return static_cast<double>(num) / static_cast<double>(den);
}
}  // namespace detail

inline PsiVector psi_statistics(const StatementCounts& c) {
  return {
      detail::ratio(c.covered_failed, c.covered_failed + c.covered_passed),
      detail::ratio(c.covered_failed, c.covered_failed + c.uncovered_failed),
      detail::ratio(c.covered_passed, c.covered_passed + c.uncovered_passed),
      detail::ratio(c.uncovered_passed, c.uncovered_failed + c.uncovered_passed),
  };
}

inline PsiVector psi_statistics(const SpectrumCounts& counts, std::size_t statement) {
  return psi_statistics(counts[statement]);
}

// P(F|C) + P(C|F) + P(S|U). A zero or undefined P(F|C) or P(S|U) gives -inf;
// P(C|S) never contributes.
inline Suspiciousness cpfl_score(const PsiVector& psi) {
  const auto& fc = psi.fail_given_covered;
  const auto& su = psi.pass_given_uncovered;
  if (!fc || !su || *fc == 0.0 || *su == 0.0) return Suspiciousness::minus_infinity();
  return Suspiciousness::finite(*fc + psi.covered_given_fail.value_or(0.0) + *su);
}

inline Suspiciousness baseline_score(Technique technique, const StatementCounts& c,
                                     std::size_t failed_total, std::size_t passed_total) {
  const double cf = static_cast<double>(c.covered_failed);
  const double cs = static_cast<double>(c.covered_passed);
  switch (technique) {
    case Technique::Tarantula: {
      if (failed_total == 0 || passed_total == 0) {
        throw Error("tarantula requires at least one failed and one passed test");
      }
      const double fail_ratio = cf / static_cast<double>(failed_total);
      const double pass_ratio = cs / static_cast<double>(passed_total);
      if (fail_ratio + pass_ratio == 0.0) return Suspiciousness::finite(0.0);
      return Suspiciousness::finite(fail_ratio / (fail_ratio + pass_ratio));
    }
    case Technique::Ochiai: {
      const double den = std::sqrt(static_cast<double>(failed_total) * (cf + cs));
      if (den == 0.0) return Suspiciousness::finite(0.0);
      return Suspiciousness::finite(cf / den);
    }
    case Technique::DStar2: {
      if (c.covered_failed == 0) return Suspiciousness::finite(0.0);
      const double den = cs + static_cast<double>(c.uncovered_failed);
      if (den == 0.0) return Suspiciousness::plus_infinity();
      return Suspiciousness::finite(cf * cf / den);
    }
    case Technique::CGFL:
    case Technique::CPFL:
      break;
  }
  throw Error("'" + std::string(to_string(technique)) + "' is not a baseline technique");
}

struct StatementScore {
  std::optional<PsiVector> psi;  // CPFL/CGFL only
  Suspiciousness score;
};

struct ScoreReport {
  Technique technique = Technique::CGFL;
  std::vector<StatementScore> statements;

  std::size_t size() const { return statements.size(); }
  const StatementScore& operator[](std::size_t i) const { return statements.at(i); }
};

inline ScoreReport score_counts(const SpectrumCounts& counts, Technique technique) {
  ScoreReport report{technique, {}};
  report.statements.reserve(counts.size());
  for (const auto& c : counts.statements) {
    if (uses_psi(technique)) {
      auto psi = psi_statistics(c);
      report.statements.push_back({psi, cpfl_score(psi)});
    } else {
      report.statements.push_back(
          {std::nullopt, baseline_score(technique, c, counts.failed_total, counts.passed_total)});
    }
  }
  return report;
}

// Throws ExcludedVersion unless the matrix has both failing and passing tests.
inline ScoreReport score_version(const CoverageMatrix& matrix, Technique technique) {
  require_usable(matrix);
  return score_counts(compute_counts(matrix), technique);
}

}  // namespace cgfl
