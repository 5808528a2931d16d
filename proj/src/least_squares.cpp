#include "cryocav/least_squares.hpp"

#include "cryocav/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace cryocav {

namespace {

void central_difference(const ResidualFunction& residual, const Eigen::VectorXd& p, double rel_step,
                        Eigen::MatrixXd& jac) {
  Eigen::VectorXd plus(jac.rows()), minus(jac.rows());
  Eigen::VectorXd q = p;
  for (Eigen::Index j = 0; j < p.size(); ++j) {
    const double h = rel_step * std::max(std::abs(p[j]), 1.0);
    q[j] = p[j] + h;
    residual(q, plus);
    q[j] = p[j] - h;
    residual(q, minus);
    q[j] = p[j];
    jac.col(j) = (plus - minus) / (2.0 * h);
  }
}

bool all_finite(const Eigen::VectorXd& v) { return v.allFinite(); }

} // namespace

LeastSquaresResult levenberg_marquardt(Eigen::Index residual_count, const ResidualFunction& residual,
                                       const JacobianFunction& jacobian, Eigen::VectorXd initial,
                                       const LeastSquaresOptions& options) {
  require(residual_count >= initial.size(), "least squares needs at least as many residuals as parameters");
  require(initial.size() > 0, "least squares needs at least one parameter");

  const Eigen::Index n = initial.size();
  LeastSquaresResult out;
  Eigen::VectorXd x = std::move(initial);
  Eigen::VectorXd r(residual_count), r_new(residual_count);
  Eigen::MatrixXd jac(residual_count, n);

  auto eval_jacobian = [&](const Eigen::VectorXd& p) {
    if (jacobian)
      jacobian(p, jac);
    else
      central_difference(residual, p, options.finite_difference_step, jac);
  };

  residual(x, r);
  if (!all_finite(r)) throw NumericalError("least squares: non-finite residual at initial guess");
  double cost = 0.5 * r.squaredNorm();
  eval_jacobian(x);

  Eigen::MatrixXd normal = jac.transpose() * jac;
  Eigen::VectorXd gradient = jac.transpose() * r;
  double mu = options.initial_damping * normal.diagonal().maxCoeff();
  if (!(mu > 0.0)) mu = options.initial_damping;
  double nu = 2.0;

  out.reason = "iteration limit reached";
  int k = 0;
  for (; k < options.max_iterations; ++k) {
    if (gradient.cwiseAbs().maxCoeff() <= options.gradient_tolerance) {
      out.converged = true;
      out.reason = "gradient below tolerance";
      break;
    }
    Eigen::VectorXd scale = normal.diagonal().cwiseMax(std::numeric_limits<double>::epsilon());
    Eigen::MatrixXd damped = normal;
    damped.diagonal() += mu * scale;
    const Eigen::VectorXd step = damped.ldlt().solve(-gradient);
    if (!all_finite(step)) throw NumericalError("least squares: singular normal equations");

    if (step.norm() <= options.step_tolerance * (x.norm() + options.step_tolerance)) {
      out.converged = true;
      out.reason = "step below tolerance";
      break;
    }

    const Eigen::VectorXd x_new = x + step;
    residual(x_new, r_new);
    const double cost_new = all_finite(r_new) ? 0.5 * r_new.squaredNorm() : std::numeric_limits<double>::infinity();
    const double predicted = 0.5 * step.dot(mu * scale.cwiseProduct(step) - gradient);
    const double rho = predicted > 0.0 ? (cost - cost_new) / predicted : -1.0;

    if (rho > 0.0) {
      const double reduction = cost - cost_new;
      x = x_new;
      r = r_new;
      cost = cost_new;
      eval_jacobian(x);
      normal = jac.transpose() * jac;
      gradient = jac.transpose() * r;
      mu *= std::max(1.0 / 3.0, 1.0 - std::pow(2.0 * rho - 1.0, 3));
      nu = 2.0;
      if (reduction <= options.cost_tolerance * cost || cost == 0.0) {
        out.converged = true;
        out.reason = "cost reduction below tolerance";
        ++k;
        break;
      }
    } else {
      mu *= nu;
      nu *= 2.0;
      if (!std::isfinite(mu)) {
        out.reason = "damping overflow";
        break;
      }
    }
  }

  out.parameters = std::move(x);
  out.cost = cost;
  out.iterations = k;
  return out;
}

} // namespace cryocav
