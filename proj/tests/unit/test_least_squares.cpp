#include "cryocav/errors.hpp"
#include "cryocav/least_squares.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>

using namespace cryocav;

TEST_SUITE("least_squares") {

TEST_CASE("exponential decay fit, analytic and numeric Jacobians") {
  const int n = 40;
  Eigen::VectorXd t(n), y(n);
  for (int i = 0; i < n; ++i) {
    t[i] = 0.1 * i;
    y[i] = 3.0 * std::exp(-1.7 * t[i]) + 0.5;
  }
  auto residual = [&](const Eigen::VectorXd& p, Eigen::VectorXd& r) {
    for (int i = 0; i < n; ++i) r[i] = p[0] * std::exp(-p[1] * t[i]) + p[2] - y[i];
  };
  auto jacobian = [&](const Eigen::VectorXd& p, Eigen::MatrixXd& j) {
    for (int i = 0; i < n; ++i) {
      const double e = std::exp(-p[1] * t[i]);
      j(i, 0) = e;
      j(i, 1) = -p[0] * t[i] * e;
      j(i, 2) = 1.0;
    }
  };
  const Eigen::Vector3d start(1.0, 0.5, 0.0);
  for (const bool analytic : {true, false}) {
    const auto r = levenberg_marquardt(n, residual, analytic ? JacobianFunction(jacobian) : JacobianFunction{}, start);
    CHECK(r.converged);
    CHECK(r.parameters[0] == doctest::Approx(3.0).epsilon(1e-8));
    CHECK(r.parameters[1] == doctest::Approx(1.7).epsilon(1e-8));
    CHECK(r.parameters[2] == doctest::Approx(0.5).epsilon(1e-8));
    CHECK(r.cost < 1e-20);
  }
}

TEST_CASE("Rosenbrock valley") {
  auto residual = [](const Eigen::VectorXd& p, Eigen::VectorXd& r) {
    r[0] = 10.0 * (p[1] - p[0] * p[0]);
    r[1] = 1.0 - p[0];
  };
  const auto r = levenberg_marquardt(2, residual, {}, Eigen::Vector2d(-1.2, 1.0));
  CHECK(r.converged);
  CHECK(r.parameters[0] == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(r.parameters[1] == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("iteration cap is reported, not thrown") {
  auto residual = [](const Eigen::VectorXd& p, Eigen::VectorXd& r) {
    r[0] = 10.0 * (p[1] - p[0] * p[0]);
    r[1] = 1.0 - p[0];
  };
  LeastSquaresOptions o;
  o.max_iterations = 2;
  const auto r = levenberg_marquardt(2, residual, {}, Eigen::Vector2d(-1.2, 1.0), o);
  CHECK_FALSE(r.converged);
  CHECK(r.iterations == 2);
}

TEST_CASE("non-finite start is rejected") {
  auto residual = [](const Eigen::VectorXd&, Eigen::VectorXd& r) { r[0] = std::numeric_limits<double>::quiet_NaN(); };
  CHECK_THROWS_AS(levenberg_marquardt(1, residual, {}, Eigen::VectorXd::Zero(1)), NumericalError);
}

}
