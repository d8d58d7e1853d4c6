#pragma once

// Thin adapter over Eigen's MINPACK-derived Levenberg-Marquardt solver.

#include <functional>

#include <Eigen/Core>

namespace strainsim::detail {

struct LeastSquaresProblem {
  int n_residuals = 0;
  std::function<void(const Eigen::VectorXd& x, Eigen::VectorXd& r)> residuals;
  std::function<void(const Eigen::VectorXd& x, Eigen::MatrixXd& j)> jacobian;
};

struct LeastSquaresResult {
  Eigen::VectorXd x;
  Eigen::MatrixXd covariance;  // s^2 (J^T J)^-1 with s^2 = |r|^2 / (m - n)
  double residual_norm = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Runs at most `max_iterations` LM steps; converged when the relative step
/// falls below `xtol` (or MINPACK's other stopping tests fire).
LeastSquaresResult solve_least_squares(const LeastSquaresProblem& problem, Eigen::VectorXd x0,
                                       int max_iterations = 200, double xtol = 1e-8);

}  // namespace strainsim::detail
