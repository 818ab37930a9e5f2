#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace mpg {

/// Root of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual const char* kind() const noexcept { return "Error"; }
};

#define MPG_DEFINE_ERROR(Name)                                    \
  class Name : public Error {                                     \
   public:                                                        \
    using Error::Error;                                           \
    const char* kind() const noexcept override { return #Name; }  \
  }

/// Argument outside the admissible domain of a scalar law.
MPG_DEFINE_ERROR(DomainError);
/// A value outside the range of an invertible map.
MPG_DEFINE_ERROR(RangeError);
/// Parameters that do not define a valid object.
MPG_DEFINE_ERROR(ConstructionError);
/// A sampled ratio that grows without bound under refinement.
MPG_DEFINE_ERROR(DegenerateError);
/// Invalid geometry or run configuration.
MPG_DEFINE_ERROR(ConfigError);
/// An operation that is undefined for the chosen boundary regime.
MPG_DEFINE_ERROR(RegimeError);
/// Linear or nonlinear solve failure.
MPG_DEFINE_ERROR(SolveError);
/// Newton iteration failed inside a time step; the caller may retry with a smaller step.
MPG_DEFINE_ERROR(NewtonDivergence);
/// A field acquired NaN or infinite entries.
MPG_DEFINE_ERROR(NonfiniteField);
/// Too few samples for a regression.
MPG_DEFINE_ERROR(InsufficientData);
/// Malformed configuration text.
MPG_DEFINE_ERROR(ParseError);

#undef MPG_DEFINE_ERROR

/// Aggregates every violation found while validating a configuration.
class ValidationError : public Error {
 public:
  explicit ValidationError(std::vector<std::string> issues)
      : Error(join(issues)), issues_(std::move(issues)) {}
  const char* kind() const noexcept override { return "ValidationError"; }
  const std::vector<std::string>& issues() const noexcept { return issues_; }

 private:
  static std::string join(const std::vector<std::string>& issues) {
    std::string out = std::to_string(issues.size()) + " validation issue(s)";
    for (const auto& i : issues) out += "\n  - " + i;
    return out;
  }
  std::vector<std::string> issues_;
};

}  // namespace mpg
