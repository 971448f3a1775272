#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace cmekit {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Caller supplied an argument outside the documented domain.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Network definition is inconsistent (unknown identifiers, bad stoichiometry,
/// rates that are negative or undefined).
class ModelError : public Error {
 public:
  using Error::Error;
};

/// Rate evaluation produced a non-finite value.
class EvaluationError : public ModelError {
 public:
  using ModelError::ModelError;
};

/// A file could not be read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Applying a reaction would drive a copy number below zero.
class NegativePopulationError : public Error {
 public:
  using Error::Error;
};

/// Operation not available for this kind of network (e.g. rational rates in
/// the moment generator).
class UnsupportedError : public Error {
 public:
  using Error::Error;
};

/// Numerical failure: stiffness, singular systems, failed convergence.
class NumericError : public Error {
 public:
  using Error::Error;
};

class StiffnessError : public NumericError {
 public:
  using NumericError::NumericError;
};

/// Event count exceeded the per-trajectory safety cap.
class RunawayError : public NumericError {
 public:
  using NumericError::NumericError;
};

/// State-space projection grew past its cap. Carries the best error bound
/// reached before giving up.
class CapacityError : public Error {
 public:
  CapacityError(const std::string& what, double best_epsilon)
      : Error(what), best_epsilon_(best_epsilon) {}
  double best_epsilon() const noexcept { return best_epsilon_; }

 private:
  double best_epsilon_;
};

struct SourcePos {
  std::size_t line = 0;    // 1-based
  std::size_t column = 0;  // 1-based
  bool operator==(const SourcePos&) const = default;
};

/// Syntax or semantic error in model text. `diagnostics` holds every
/// aggregated semantic finding; the first entry is reported by what().
class ParseError : public ModelError {
 public:
  struct Diagnostic {
    SourcePos pos;
    std::string message;
    std::string token;
  };

  explicit ParseError(std::vector<Diagnostic> diagnostics);

  const std::vector<Diagnostic>& diagnostics() const noexcept { return diagnostics_; }
  std::size_t line() const noexcept { return diagnostics_.front().pos.line; }
  std::size_t column() const noexcept { return diagnostics_.front().pos.column; }
  const std::string& token() const noexcept { return diagnostics_.front().token; }

 private:
  std::vector<Diagnostic> diagnostics_;
};

}  // namespace cmekit
