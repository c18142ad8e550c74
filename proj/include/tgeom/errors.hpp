#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace tgeom {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on the inputs of an operation was violated.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A numerical evaluation failed (non-convergence, singular metric on a path).
class EvaluationError : public Error {
 public:
  EvaluationError(const std::string& what, double residual = 0.0)
      : Error(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

/// Local PCA could not separate retained from discarded directions.
class DimensionUnresolved : public Error {
 public:
  DimensionUnresolved(const std::string& what, std::vector<double> spectrum)
      : Error(what), spectrum_(std::move(spectrum)) {}
  const std::vector<double>& spectrum() const noexcept { return spectrum_; }

 private:
  std::vector<double> spectrum_;
};

}  // namespace tgeom
