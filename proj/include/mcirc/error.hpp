#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mcirc {

/// Invalid input: bad parameters, malformed files, inconsistent shapes.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Numerical failure: singular systems, solver non-convergence.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConvergenceError : public NumericalError {
 public:
  ConvergenceError(const std::string& what, std::size_t iterations, double residual)
      : NumericalError(what), iterations_(iterations), residual_(residual) {}

  std::size_t iterations() const { return iterations_; }
  double residual() const { return residual_; }

 private:
  std::size_t iterations_;
  double residual_;
};

}  // namespace mcirc
