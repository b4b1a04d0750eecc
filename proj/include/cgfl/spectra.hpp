#pragma once

// Coverage spectra: the per-test statement coverage matrix of one program
// version and the four per-statement tallies every scorer consumes.

#include <algorithm>
#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "cgfl/error.hpp"

namespace cgfl {

enum class Verdict { Pass, Fail };

// An executable statement, identified by its 0-based ordinal in the version's
// statement list. The label (usually "file:line") is metadata only.
struct StatementId {
  std::size_t index = 0;
  std::optional<std::string> label;

  friend bool operator==(const StatementId&, const StatementId&) = default;
};

struct TestRecord {
  std::string test_id;
  Verdict verdict = Verdict::Pass;
  std::vector<std::size_t> covered;  // sorted, unique statement indices

  bool covers(std::size_t statement) const {
    return std::binary_search(covered.begin(), covered.end(), statement);
  }

  friend bool operator==(const TestRecord&, const TestRecord&) = default;
};

// Binary statement coverage plus verdicts for one faulty program version.
// Plain value type; check_structure() enforces the invariants.
struct CoverageMatrix {
  std::string program;
  std::string version;
  std::vector<StatementId> statements;
  std::vector<TestRecord> tests;
  std::vector<std::size_t> faulty_statements;  // ground truth, may be empty

  std::size_t statement_count() const { return statements.size(); }

  std::size_t failed_total() const {
    return static_cast<std::size_t>(std::count_if(
        tests.begin(), tests.end(), [](const TestRecord& t) { return t.verdict == Verdict::Fail; }));
  }
  std::size_t passed_total() const { return tests.size() - failed_total(); }

  friend bool operator==(const CoverageMatrix&, const CoverageMatrix&) = default;
};

// Sorts and deduplicates a coverage row in place.
inline void normalize_coverage(std::vector<std::size_t>& covered) {
  std::sort(covered.begin(), covered.end());
  covered.erase(std::unique(covered.begin(), covered.end()), covered.end());
}

// Throws StructuralError on the first violated invariant.
inline void check_structure(const CoverageMatrix& m) {
  if (m.statements.empty()) throw StructuralError("at least one statement required");
  if (m.tests.empty()) throw StructuralError("at least one test required");

  std::set<std::string> labels;
  for (std::size_t i = 0; i < m.statements.size(); ++i) {
    const auto& s = m.statements[i];
    if (s.index != i) {
      throw StructuralError("statement " + std::to_string(i) + " carries index " +
                            std::to_string(s.index));
    }
    if (s.label && !labels.insert(*s.label).second) {
      throw StructuralError("duplicate statement label '" + *s.label + "'");
    }
  }

  std::set<std::string> ids;
  for (const auto& t : m.tests) {
    if (!ids.insert(t.test_id).second) {
      throw StructuralError("duplicate test id '" + t.test_id + "'");
    }
    if (!std::is_sorted(t.covered.begin(), t.covered.end()) ||
        std::adjacent_find(t.covered.begin(), t.covered.end()) != t.covered.end()) {
      throw StructuralError("test '" + t.test_id + "': coverage row not sorted and unique");
    }
    if (!t.covered.empty() && t.covered.back() >= m.statement_count()) {
      throw StructuralError("test '" + t.test_id + "': index " + std::to_string(t.covered.back()) +
                            " out of range (statement count " +
                            std::to_string(m.statement_count()) + ")");
    }
  }

  for (auto f : m.faulty_statements) {
    if (f >= m.statement_count()) {
      throw StructuralError("faulty statement index " + std::to_string(f) + " out of range");
    }
  }
}

// Tallies for one statement: covered/uncovered by failed/passed tests.
struct StatementCounts {
  std::size_t covered_failed = 0;    // failed tests executing the statement
  std::size_t covered_passed = 0;    // passed tests executing the statement
  std::size_t uncovered_failed = 0;  // failed tests not executing it
  std::size_t uncovered_passed = 0;  // passed tests not executing it

  std::size_t covered() const { return covered_failed + covered_passed; }
  std::size_t uncovered() const { return uncovered_failed + uncovered_passed; }
  std::size_t failed() const { return covered_failed + uncovered_failed; }
  std::size_t passed() const { return covered_passed + uncovered_passed; }

  friend bool operator==(const StatementCounts&, const StatementCounts&) = default;
};

struct SpectrumCounts {
  std::size_t failed_total = 0;
  std::size_t passed_total = 0;
  std::vector<StatementCounts> statements;

  const StatementCounts& operator[](std::size_t i) const { return statements.at(i); }
  std::size_t size() const { return statements.size(); }

  friend bool operator==(const SpectrumCounts&, const SpectrumCounts&) = default;
};

inline SpectrumCounts compute_counts(const CoverageMatrix& m) {
  SpectrumCounts out;
  out.statements.resize(m.statement_count());
  for (const auto& t : m.tests) {
    const bool failed = t.verdict == Verdict::Fail;
    (failed ? out.failed_total : out.passed_total) += 1;
    for (auto s : t.covered) {
      auto& c = out.statements.at(s);
      (failed ? c.covered_failed : c.covered_passed) += 1;
    }
  }
  for (auto& c : out.statements) {
    c.uncovered_failed = out.failed_total - c.covered_failed;
    c.uncovered_passed = out.passed_total - c.covered_passed;
  }
  return out;
}

struct ValidationReport {
  std::optional<ExclusionReason> exclusion;  // empty means usable

  bool usable() const { return !exclusion.has_value(); }
};

// Structural violations throw; a missing verdict class is an exclusion.
inline ValidationReport validate_version(const CoverageMatrix& m) {
  check_structure(m);
  if (m.failed_total() == 0) return {ExclusionReason::NoFailures};
  if (m.passed_total() == 0) return {ExclusionReason::NoPasses};
  return {};
}

inline void require_usable(const CoverageMatrix& m) {
  if (auto report = validate_version(m); !report.usable()) throw ExcludedVersion(*report.exclusion);
}

}  // namespace cgfl
