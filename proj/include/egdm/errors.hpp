#pragma once

/**
 * @file errors.hpp
 * @brief Exception hierarchy shared by all modules.
 */

#include <stdexcept>
#include <string>

namespace egdm {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Parameters for which the EGDM expressions are undefined (sigma_hat <= 1).
class ModelValidityError : public Error {
 public:
  using Error::Error;
};

/// Iterative method exceeded its budget or produced non-finite values.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double last_residual, int iterations)
      : Error(what), last_residual_(last_residual), iterations_(iterations) {}
  double last_residual() const noexcept { return last_residual_; }
  int iterations() const noexcept { return iterations_; }

 private:
  double last_residual_;
  int iterations_;
};

class SingularMatrixError : public Error {
 public:
  using Error::Error;
};

/// Fisher information is rank deficient.
class IdentifiabilityError : public Error {
 public:
  using Error::Error;
};

/// Invalid user input (configuration, design bounds, voltage lists).
class ValidationError : public Error {
 public:
  using Error::Error;
};

}  // namespace egdm
