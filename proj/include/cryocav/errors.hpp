#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace cryocav {

/// Invalid input: bad parameters, malformed files, unknown config keys.
class ValidationError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// A computation could not produce a trustworthy result.
class NumericalError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Least-squares fit that did not converge. Carries the best parameters seen.
class FitFailure : public NumericalError {
public:
  FitFailure(const std::string& what, std::vector<double> best, double rms_residual)
      : NumericalError(what), best_(std::move(best)), rms_residual_(rms_residual) {}

  const std::vector<double>& best_parameters() const noexcept { return best_; }
  double rms_residual() const noexcept { return rms_residual_; }

private:
  std::vector<double> best_;
  double rms_residual_;
};

/// Servo loop ran away from its lock point.
class InstabilityError : public NumericalError {
public:
  using NumericalError::NumericalError;
};

/// File system or stream failure.
class IoError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Throws ValidationError with `what` unless `condition` holds.
void require(bool condition, const std::string& what);

} // namespace cryocav
