#pragma once

#include <Eigen/Dense>

#include <functional>
#include <string>

namespace cryocav {

// Levenberg-Marquardt with Marquardt diagonal scaling and Nielsen's damping
// update. Used by the resonance and avoided-crossing fits.

struct LeastSquaresOptions {
  int max_iterations = 200;
  double gradient_tolerance = 1e-12;   // on max |J^T r|
  double step_tolerance = 1e-12;       // relative step size
  double cost_tolerance = 1e-15;       // relative cost reduction
  double initial_damping = 1e-3;
  double finite_difference_step = 1e-6; // relative, when no Jacobian is given
};

struct LeastSquaresResult {
  Eigen::VectorXd parameters;
  double cost = 0.0; // 0.5 * sum r^2
  int iterations = 0;
  bool converged = false;
  std::string reason;
};

using ResidualFunction = std::function<void(const Eigen::VectorXd& params, Eigen::VectorXd& residuals)>;
using JacobianFunction = std::function<void(const Eigen::VectorXd& params, Eigen::MatrixXd& jacobian)>;

/// Minimizes 0.5 * |r(p)|^2. `jacobian` may be empty, in which case central
/// differences are used. Never throws on non-convergence; inspect `converged`.
LeastSquaresResult levenberg_marquardt(Eigen::Index residual_count, const ResidualFunction& residual,
                                       const JacobianFunction& jacobian, Eigen::VectorXd initial,
                                       const LeastSquaresOptions& options = {});

} // namespace cryocav
