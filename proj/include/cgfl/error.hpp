#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cgfl {

// Base of every error the library throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A CoverageMatrix or input document violates a structural invariant.
class StructuralError : public Error {
 public:
  using Error::Error;
};

// Malformed input text (spectra documents, gcov reports, output dirs).
class ParseError : public Error {
 public:
  using Error::Error;
};

enum class ExclusionReason { NoFailures, NoPasses, Crashed };

inline std::string_view describe(ExclusionReason reason) {
  switch (reason) {
    case ExclusionReason::NoFailures:
      return "no failing tests";
    case ExclusionReason::NoPasses:
      return "no passing tests";
    case ExclusionReason::Crashed:
      return "a test run crashed";
  }
  return "unknown";
}

// The version is well formed but cannot be scored.
class ExcludedVersion : public Error {
 public:
  explicit ExcludedVersion(ExclusionReason reason)
      : Error("version excluded: " + std::string(describe(reason))), reason_(reason) {}

  ExclusionReason reason() const noexcept { return reason_; }

 private:
  ExclusionReason reason_;
};

}  // namespace cgfl
