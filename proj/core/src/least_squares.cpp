#include "least_squares.hpp"

#include <algorithm>

#include <unsupported/Eigen/LevenbergMarquardt>

#include <Eigen/Dense>

namespace strainsim::detail {

namespace {

struct Functor : Eigen::DenseFunctor<double> {
  const LeastSquaresProblem* problem;

  Functor(const LeastSquaresProblem& p, int n_params)
      : Eigen::DenseFunctor<double>(n_params, p.n_residuals), problem(&p) {}

  int operator()(const Eigen::VectorXd& x, Eigen::VectorXd& r) const {
    problem->residuals(x, r);
    return 0;
  }
  int df(const Eigen::VectorXd& x, Eigen::MatrixXd& j) const {
    problem->jacobian(x, j);
    return 0;
  }
};

}  // namespace

LeastSquaresResult solve_least_squares(const LeastSquaresProblem& problem, Eigen::VectorXd x0,
                                       int max_iterations, double xtol) {
  const int n = static_cast<int>(x0.size());
  Functor functor(problem, n);
  Eigen::LevenbergMarquardt<Functor> lm(functor);
  lm.setXtol(xtol);
  lm.setFtol(1e-14);
  lm.setGtol(0.0);
  lm.setMaxfev(20 * max_iterations);

  using Eigen::LevenbergMarquardtSpace::Status;
  Status status = lm.minimizeInit(x0);
  int iterations = 0;
  if (status != Status::ImproperInputParameters) {
    do {
      status = lm.minimizeOneStep(x0);
      ++iterations;
    } while (status == Status::Running && iterations < max_iterations);
  }

  LeastSquaresResult out;
  out.x = x0;
  out.iterations = iterations;
  out.converged = status != Status::Running && status != Status::ImproperInputParameters &&
                  status != Status::TooManyFunctionEvaluation && status != Status::UserAsked;

  Eigen::VectorXd r(problem.n_residuals);
  problem.residuals(out.x, r);
  out.residual_norm = r.norm();
  Eigen::MatrixXd j(problem.n_residuals, n);
  problem.jacobian(out.x, j);
  const int dof = std::max(1, problem.n_residuals - n);
  const double s2 = r.squaredNorm() / dof;
  const Eigen::MatrixXd jtj = j.transpose() * j;
  out.covariance = s2 * jtj.completeOrthogonalDecomposition().pseudoInverse();
  return out;
}

}  // namespace strainsim::detail
