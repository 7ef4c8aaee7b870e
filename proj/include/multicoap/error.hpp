#pragma once

#include <stdexcept>
#include <string>

namespace multicoap {

/// Base of all library errors. The CLI maps each subclass to an exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid configuration: bad dimensions, (A3) violations, unknown scenario.
class ConfigError : public Error {
 public:
  using Error::Error;
};

enum class DataErrorKind {
  DimensionMismatch,
  NegativeCount,
  NonpositiveNormalizer,
  Malformed,
  Io,
};

/// Input data violates a dataset invariant, or could not be read/written.
class DataError : public Error {
 public:
  DataError(DataErrorKind kind, const std::string& what) : Error(what), kind_(kind) {}
  DataErrorKind kind() const noexcept { return kind_; }

 private:
  DataErrorKind kind_;
};

enum class NumericalErrorKind {
  NonfiniteElbo,
  NotPositiveDefinite,
  SingularNormalEquations,
  CollinearCovariates,
  DegenerateSpectrum,
  RankDeficientEstimate,
  SignalTooStrong,
};

class NumericalError : public Error {
 public:
  NumericalError(NumericalErrorKind kind, const std::string& what) : Error(what), kind_(kind) {}
  NumericalErrorKind kind() const noexcept { return kind_; }

 private:
  NumericalErrorKind kind_;
};

}  // namespace multicoap
