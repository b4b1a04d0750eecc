#pragma once

// Input side of the toolkit: the JSON spectra document, gcov annotated-source
// reports, and pass/fail verdicts derived by diffing against golden outputs.

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "cgfl/error.hpp"
#include "cgfl/spectra.hpp"

namespace cgfl {

inline constexpr int kSchemaVersion = 1;

// ---------------------------------------------------------------------------
// Spectra document (schema_version 1)
//
//   {
//     "schema_version": 1,
//     "program": "find_mid",
//     "version": "v1",
//     "statements": ["find_mid.c:2", ...],          label string or null
//     "tests": [{"id": "t1", "outcome": "fail", "covered": [0, 1, 2]}, ...],
//     "faulty_statements": [3]                      optional
//   }
// ---------------------------------------------------------------------------

namespace detail {

using json = nlohmann::json;

inline const json& require_field(const json& obj, const char* key, const std::string& path) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(path + ": missing field '" + key + "'");
  return *it;
}

inline std::string require_string(const json& v, const std::string& path) {
  if (!v.is_string()) throw ParseError(path + ": expected a string");
  return v.get<std::string>();
}

inline std::size_t require_index(const json& v, std::size_t statement_count,
                                 const std::string& path) {
  if (!v.is_number_integer()) throw ParseError(path + ": expected a non-negative integer");
  if (v.is_number_unsigned() || v.get<std::int64_t>() >= 0) {
    const auto idx = v.get<std::uint64_t>();
    if (idx >= statement_count) {
      throw ParseError(path + ": index " + std::to_string(idx) + " out of range (statement count " +
                       std::to_string(statement_count) + ")");
    }
    return static_cast<std::size_t>(idx);
  }
  throw ParseError(path + ": index out of range (negative)");
}

inline const json& require_array(const json& v, const std::string& path) {
  if (!v.is_array()) throw ParseError(path + ": expected an array");
  return v;
}

}  // namespace detail

inline CoverageMatrix matrix_from_json(const nlohmann::json& doc) {
  using detail::require_field;
  if (!doc.is_object()) throw ParseError("document: expected an object");

  const auto& schema = require_field(doc, "schema_version", "document");
  if (!schema.is_number_integer() || schema.get<std::int64_t>() != kSchemaVersion) {
    throw ParseError("schema_version: unsupported value " + schema.dump() + " (expected " +
                     std::to_string(kSchemaVersion) + ")");
  }

  CoverageMatrix m;
  m.program = detail::require_string(require_field(doc, "program", "document"), "program");
  m.version = detail::require_string(require_field(doc, "version", "document"), "version");

  const auto& statements =
      detail::require_array(require_field(doc, "statements", "document"), "statements");
  if (statements.empty()) throw ParseError("statements: at least one statement required");
  std::set<std::string> labels;
  for (std::size_t i = 0; i < statements.size(); ++i) {
    const auto path = "statements[" + std::to_string(i) + "]";
    StatementId id{i, std::nullopt};
    if (!statements[i].is_null()) {
      id.label = detail::require_string(statements[i], path);
      if (!labels.insert(*id.label).second) {
        throw ParseError(path + ": duplicate label '" + *id.label + "'");
      }
    }
    m.statements.push_back(std::move(id));
  }
  const auto n = m.statements.size();

  const auto& tests = detail::require_array(require_field(doc, "tests", "document"), "tests");
  if (tests.empty()) throw ParseError("tests: at least one test required");
  std::set<std::string> ids;
  for (std::size_t i = 0; i < tests.size(); ++i) {
    const auto path = "tests[" + std::to_string(i) + "]";
    if (!tests[i].is_object()) throw ParseError(path + ": expected an object");
    TestRecord t;
    t.test_id = detail::require_string(require_field(tests[i], "id", path), path + ".id");
    if (!ids.insert(t.test_id).second) {
      throw ParseError(path + ".id: duplicate test id '" + t.test_id + "'");
    }
    const auto outcome =
        detail::require_string(require_field(tests[i], "outcome", path), path + ".outcome");
    if (outcome == "pass") {
      t.verdict = Verdict::Pass;
    } else if (outcome == "fail") {
      t.verdict = Verdict::Fail;
    } else {
      throw ParseError(path + ".outcome: invalid outcome '" + outcome +
                       "' (expected \"pass\" or \"fail\")");
    }
    const auto& covered =
        detail::require_array(require_field(tests[i], "covered", path), path + ".covered");
    for (std::size_t j = 0; j < covered.size(); ++j) {
      t.covered.push_back(
          detail::require_index(covered[j], n, path + ".covered[" + std::to_string(j) + "]"));
    }
    normalize_coverage(t.covered);
    m.tests.push_back(std::move(t));
  }

  if (auto it = doc.find("faulty_statements"); it != doc.end() && !it->is_null()) {
    const auto& faulty = detail::require_array(*it, "faulty_statements");
    for (std::size_t j = 0; j < faulty.size(); ++j) {
      m.faulty_statements.push_back(
          detail::require_index(faulty[j], n, "faulty_statements[" + std::to_string(j) + "]"));
    }
    normalize_coverage(m.faulty_statements);
  }

  check_structure(m);
  return m;
}

inline CoverageMatrix load_spectra(std::string_view bytes) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(bytes.begin(), bytes.end());
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("document: invalid JSON: ") + e.what());
  }
  return matrix_from_json(doc);
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline CoverageMatrix load_spectra_file(const std::filesystem::path& path) {
  try {
    return load_spectra(read_file(path));
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

inline nlohmann::ordered_json matrix_to_json(const CoverageMatrix& m) {
  nlohmann::ordered_json doc;
  doc["schema_version"] = kSchemaVersion;
  doc["program"] = m.program;
  doc["version"] = m.version;
  auto statements = nlohmann::ordered_json::array();
  for (const auto& s : m.statements) {
    statements.push_back(s.label ? nlohmann::ordered_json(*s.label) : nlohmann::ordered_json());
  }
  doc["statements"] = std::move(statements);
  auto tests = nlohmann::ordered_json::array();
  for (const auto& t : m.tests) {
    nlohmann::ordered_json row;
    row["id"] = t.test_id;
    row["outcome"] = t.verdict == Verdict::Fail ? "fail" : "pass";
    row["covered"] = t.covered;
    tests.push_back(std::move(row));
  }
  doc["tests"] = std::move(tests);
  if (!m.faulty_statements.empty()) doc["faulty_statements"] = m.faulty_statements;
  return doc;
}

inline std::string serialize_spectra(const CoverageMatrix& m) {
  return matrix_to_json(m).dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// gcov annotated source: "<marker>:<line>:<source>", marker is an execution
// count, "#####" / "=====" (never executed) or "-" (not executable). Line 0
// carries metadata such as "Source:find_mid.c".
// ---------------------------------------------------------------------------

enum class LineMarker { Executed, NotExecuted, NonExecutable };

struct GcovLine {
  LineMarker marker = LineMarker::NonExecutable;
  std::uint64_t count = 0;
  std::size_t line = 0;
  std::string source;

  bool executable() const { return marker != LineMarker::NonExecutable; }
  bool covered() const { return marker == LineMarker::Executed; }
};

struct GcovReport {
  std::optional<std::string> source_file;
  std::vector<GcovLine> lines;

  std::vector<std::size_t> executable_lines() const {
    std::vector<std::size_t> out;
    for (const auto& l : lines) {
      if (l.executable()) out.push_back(l.line);
    }
    return out;
  }

  std::vector<std::size_t> covered_lines() const {
    std::vector<std::size_t> out;
    for (const auto& l : lines) {
      if (l.covered()) out.push_back(l.line);
    }
    return out;
  }
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t");
  return s.substr(first, last - first + 1);
}

template <typename Int>
bool parse_uint(std::string_view s, Int& out) {
  if (s.empty()) return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

// Lines emitted by `gcov -b/-f` or between template-instantiation separators.
inline bool is_auxiliary(std::string_view trimmed) {
  for (std::string_view prefix : {"branch ", "call ", "function ", "unconditional "}) {
    if (trimmed.starts_with(prefix)) return true;
  }
  return false;
}

inline bool is_separator(std::string_view trimmed) {
  return trimmed.size() >= 3 && trimmed.find_first_not_of('-') == std::string_view::npos;
}

}  // namespace detail

inline GcovReport parse_gcov_report(std::string_view text, std::string_view origin = "<gcov>") {
  GcovReport report;
  std::size_t last_line = 0;
  bool in_instantiation = false;
  std::size_t text_line = 0;

  auto fail = [&](const std::string& what) -> ParseError {
    return ParseError(std::string(origin) + ":" + std::to_string(text_line) + ": " + what);
  };

  while (!text.empty()) {
    ++text_line;
    const auto nl = text.find('\n');
    std::string_view raw = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (!raw.empty() && raw.back() == '\r') raw.remove_suffix(1);

    const auto trimmed = detail::trim(raw);
    if (trimmed.empty()) continue;
    if (detail::is_separator(trimmed)) {
      in_instantiation = !in_instantiation;
      continue;
    }
    if (in_instantiation || detail::is_auxiliary(trimmed)) continue;

    const auto c1 = raw.find(':');
    const auto c2 = c1 == std::string_view::npos ? c1 : raw.find(':', c1 + 1);
    if (c2 == std::string_view::npos) throw fail("malformed gcov line '" + std::string(raw) + "'");

    const auto marker = detail::trim(raw.substr(0, c1));
    const auto line_field = detail::trim(raw.substr(c1 + 1, c2 - c1 - 1));
    GcovLine entry;
    entry.source = std::string(raw.substr(c2 + 1));
    if (!detail::parse_uint(line_field, entry.line)) {
      throw fail("malformed line number '" + std::string(line_field) + "'");
    }

    if (marker == "-") {
      entry.marker = LineMarker::NonExecutable;
    } else if (marker == "#####" || marker == "=====") {
      entry.marker = LineMarker::NotExecuted;
    } else {
      auto digits = marker;
      if (digits.ends_with('*')) digits.remove_suffix(1);  // count with unexecuted blocks
      if (!detail::parse_uint(digits, entry.count)) {
        throw fail("malformed execution marker '" + std::string(marker) + "'");
      }
      entry.marker = entry.count > 0 ? LineMarker::Executed : LineMarker::NotExecuted;
    }

    if (entry.line == 0) {
      if (entry.executable()) throw fail("line 0 cannot be executable");
      constexpr std::string_view kSource = "Source:";
      if (entry.source.starts_with(kSource)) report.source_file = entry.source.substr(kSource.size());
      continue;
    }
    if (entry.line <= last_line) {
      throw fail("line numbers not strictly increasing (" + std::to_string(entry.line) +
                 " after " + std::to_string(last_line) + ")");
    }
    last_line = entry.line;
    report.lines.push_back(std::move(entry));
  }
  return report;
}

struct TestRun {
  std::string test_id;
  Verdict verdict = Verdict::Pass;
  std::optional<GcovReport> report;  // absent for a crashed run counted as a failure
};

namespace detail {
inline std::string format_lines(const std::vector<std::size_t>& lines) {
  std::string out = "{";
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(lines[i]);
  }
  return out + "}";
}
}  // namespace detail

// Every per-test report must list the same executable lines; a line is
// covered when its count is positive. Faulty statements are given as source
// line numbers.
inline CoverageMatrix merge_gcov_reports(std::string program, std::string version,
                                         std::span<const TestRun> runs,
                                         std::span<const std::size_t> faulty_lines = {}) {
  const GcovReport* reference = nullptr;
  std::string reference_id;
  for (const auto& r : runs) {
    if (r.report) {
      reference = &*r.report;
      reference_id = r.test_id;
      break;
    }
  }
  if (!reference) throw ParseError("no gcov reports to merge");

  const auto lines = reference->executable_lines();
  if (lines.empty()) throw ParseError("gcov report for '" + reference_id + "' has no executable lines");

  CoverageMatrix m;
  m.program = std::move(program);
  m.version = std::move(version);
  std::map<std::size_t, std::size_t> index_of_line;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    index_of_line[lines[i]] = i;
    const auto label = reference->source_file ? *reference->source_file + ":" + std::to_string(lines[i])
                                              : std::to_string(lines[i]);
    m.statements.push_back({i, label});
  }

  for (const auto& r : runs) {
    TestRecord t{r.test_id, r.verdict, {}};
    if (r.report) {
      const auto own = r.report->executable_lines();
      if (own != lines) {
        throw ParseError("inconsistent executable lines: '" + reference_id + "' has " +
                         detail::format_lines(lines) + " but '" + r.test_id + "' has " +
                         detail::format_lines(own));
      }
      for (auto line : r.report->covered_lines()) t.covered.push_back(index_of_line.at(line));
    }
    m.tests.push_back(std::move(t));
  }

  for (auto line : faulty_lines) {
    auto it = index_of_line.find(line);
    if (it == index_of_line.end()) {
      throw ParseError("faulty line " + std::to_string(line) + " is not an executable line");
    }
    m.faulty_statements.push_back(it->second);
  }
  normalize_coverage(m.faulty_statements);

  check_structure(m);
  return m;
}

// ---------------------------------------------------------------------------
// Verdicts from golden-output comparison
// ---------------------------------------------------------------------------

enum class TestOutcome { Pass, Fail, Crash };

enum class CrashPolicy { ExcludeVersion, FailTest };

inline std::string_view to_string(CrashPolicy p) {
  return p == CrashPolicy::ExcludeVersion ? "exclude-version" : "fail-test";
}

// Drops trailing blanks on every line and trailing newlines at the end.
inline std::string normalize_whitespace(std::string_view bytes) {
  std::string out;
  std::size_t pos = 0;
  while (pos <= bytes.size()) {
    auto nl = bytes.find('\n', pos);
    auto line = bytes.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    const auto last = line.find_last_not_of(" \t\r");
    out.append(line.substr(0, last == std::string_view::npos ? 0 : last + 1));
    if (nl == std::string_view::npos) break;
    out.push_back('\n');
    pos = nl + 1;
  }
  while (!out.empty() && out.back() == '\n') out.pop_back();
  return out;
}

// Pass iff the actual output equals the golden output byte for byte. An
// absent actual output means the run crashed.
inline std::map<std::string, TestOutcome> derive_verdicts(
    const std::map<std::string, std::optional<std::string>>& actual,
    const std::map<std::string, std::string>& golden, bool normalize = false) {
  std::vector<std::string> mismatched;
  for (const auto& [id, _] : actual) {
    if (!golden.contains(id)) mismatched.push_back(id + " (no golden output)");
  }
  for (const auto& [id, _] : golden) {
    if (!actual.contains(id)) mismatched.push_back(id + " (no actual entry)");
  }
  if (!mismatched.empty()) {
    std::string msg = "test ids differ between output sets:";
    for (const auto& m : mismatched) msg += " " + m;
    throw ParseError(msg);
  }

  std::map<std::string, TestOutcome> out;
  for (const auto& [id, expected] : golden) {
    const auto& got = actual.at(id);
    if (!got) {
      out[id] = TestOutcome::Crash;
    } else if (normalize) {
      out[id] = normalize_whitespace(*got) == normalize_whitespace(expected) ? TestOutcome::Pass
                                                                             : TestOutcome::Fail;
    } else {
      out[id] = *got == expected ? TestOutcome::Pass : TestOutcome::Fail;
    }
  }
  return out;
}

struct VerdictResolution {
  std::map<std::string, Verdict> verdicts;
  std::vector<std::string> crashed;
  bool excluded = false;
};

inline VerdictResolution resolve_crashes(const std::map<std::string, TestOutcome>& outcomes,
                                         CrashPolicy policy) {
  VerdictResolution out;
  for (const auto& [id, outcome] : outcomes) {
    if (outcome == TestOutcome::Crash) {
      out.crashed.push_back(id);
      out.verdicts[id] = Verdict::Fail;
    } else {
      out.verdicts[id] = outcome == TestOutcome::Pass ? Verdict::Pass : Verdict::Fail;
    }
  }
  out.excluded = policy == CrashPolicy::ExcludeVersion && !out.crashed.empty();
  return out;
}

// One file per test, keyed by filename stem ("t7.out" -> "t7").
inline std::map<std::string, std::string> read_output_directory(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw ParseError(dir.string() + ": not a directory");
  std::map<std::string, std::string> out;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const auto stem = entry.path().stem().string();
    if (!out.emplace(stem, read_file(entry.path())).second) {
      throw ParseError(dir.string() + ": two files share the test id '" + stem + "'");
    }
  }
  return out;
}

struct IngestRequest {
  std::string program;
  std::string version;
  std::filesystem::path gcov_dir;    // <test-id>.gcov per test
  std::filesystem::path golden_dir;  // expected outputs
  std::filesystem::path actual_dir;  // outputs of the faulty version
  std::vector<std::size_t> faulty_lines;
  CrashPolicy crash_policy = CrashPolicy::ExcludeVersion;
  bool normalize_whitespace = false;
};

struct IngestResult {
  std::optional<CoverageMatrix> matrix;       // set only when the version is usable
  std::optional<ExclusionReason> exclusion;
  std::vector<std::string> crashed;
};

inline IngestResult ingest_version(const IngestRequest& req) {
  const auto golden = read_output_directory(req.golden_dir);
  const auto produced = read_output_directory(req.actual_dir);

  std::map<std::string, std::optional<std::string>> actual;
  for (const auto& [id, _] : golden) actual[id] = std::nullopt;
  for (const auto& [id, bytes] : produced) actual[id] = bytes;

  const auto resolution =
      resolve_crashes(derive_verdicts(actual, golden, req.normalize_whitespace), req.crash_policy);
  IngestResult result;
  result.crashed = resolution.crashed;
  if (resolution.excluded) {
    result.exclusion = ExclusionReason::Crashed;
    return result;
  }

  if (!std::filesystem::is_directory(req.gcov_dir)) {
    throw ParseError(req.gcov_dir.string() + ": not a directory");
  }
  std::map<std::string, std::filesystem::path> reports;
  for (const auto& entry : std::filesystem::directory_iterator(req.gcov_dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".gcov") {
      reports[entry.path().stem().string()] = entry.path();
    }
  }
  for (const auto& [id, _] : reports) {
    if (!resolution.verdicts.contains(id)) {
      throw ParseError("gcov report '" + id + "' has no matching golden output");
    }
  }

  const std::set<std::string> crashed(resolution.crashed.begin(), resolution.crashed.end());
  std::vector<TestRun> runs;
  for (const auto& [id, verdict] : resolution.verdicts) {
    TestRun run{id, verdict, std::nullopt};
    if (auto it = reports.find(id); it != reports.end()) {
      run.report = parse_gcov_report(read_file(it->second), it->second.string());
    } else if (!crashed.contains(id)) {
      throw ParseError("missing gcov report for test '" + id + "'");
    }
    runs.push_back(std::move(run));
  }

  auto matrix = merge_gcov_reports(req.program, req.version, runs, req.faulty_lines);
  if (auto report = validate_version(matrix); !report.usable()) {
    result.exclusion = report.exclusion;
    return result;
  }
  result.matrix = std::move(matrix);
  return result;
}

}  // namespace cgfl
