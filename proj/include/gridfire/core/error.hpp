#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace gridfire {

// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input violates a documented invariant (bad spec, bad flag value, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Training requested on no rows (or fewer than one leaf's worth).
class EmptyTrainingSet : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

// Least-squares design matrix without full column rank.
class SingularDesign : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

// Malformed file content. `line` is 1-based, 0 when not applicable.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line = 0)
      : Error(line ? what + " (line " + std::to_string(line) + ")" : what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// Structurally invalid JSON document; `pointer` locates the offending value.
class SchemaError : public Error {
 public:
  SchemaError(const std::string& pointer, const std::string& what)
      : Error(pointer.empty() ? what : pointer + ": " + what), pointer_(pointer) {}
  const std::string& pointer() const noexcept { return pointer_; }

 private:
  std::string pointer_;
};

// Semantically invalid input. Carries every violation found, not just the first.
class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& what) : Error(what), violations_{what} {}
  explicit ValidationError(std::vector<std::string> violations)
      : Error(join(violations)), violations_(std::move(violations)) {}
  const std::vector<std::string>& violations() const noexcept { return violations_; }

 private:
  static std::string join(const std::vector<std::string>& v) {
    std::string out = std::to_string(v.size()) + " validation error(s)";
    for (const auto& s : v) out += "\n  " + s;
    return out;
  }
  std::vector<std::string> violations_;
};

// Integrator state left the admissible region.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

// A clash score could not be produced (wraps a divergence).
class ScoreUnavailable : public Error {
 public:
  using Error::Error;
};

// A line has no weather series covering the requested horizon.
class MissingWeather : public Error {
 public:
  using Error::Error;
};

// A feature has a single value and cannot be min-max scaled.
class DegenerateFeature : public Error {
 public:
  using Error::Error;
};

// Model file is corrupt, truncated or from an incompatible version.
class ModelFormatError : public Error {
 public:
  using Error::Error;
};

// The optimization problem has no feasible point.
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

}  // namespace gridfire
