#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace covconv {

// Base of everything the library throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad argument shapes, ranks, resolutions.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// A point outside a chart, field region or transition overlap.
class DomainError : public Error {
 public:
  using Error::Error;
};

// An integrated curve left the chart domain. Carries the last sample that
// was still valid.
class DomainExitError : public DomainError {
 public:
  DomainExitError(const std::string& what, Eigen::VectorXd last_valid, double last_param)
      : DomainError(what), last_valid_(std::move(last_valid)), last_param_(last_param) {}

  const Eigen::VectorXd& last_valid() const { return last_valid_; }
  double last_param() const { return last_param_; }

 private:
  Eigen::VectorXd last_valid_;
  double last_param_;
};

// Singular metric/Jacobian, non-convergence.
class NumericalError : public Error {
 public:
  using Error::Error;
};

// Malformed configuration or unknown preset names.
class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace covconv
