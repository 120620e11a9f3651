#pragma once

#include <Eigen/Dense>

#include <functional>

namespace lphi {

struct SmoothObjective {
  std::function<double(const Eigen::VectorXd&)> value;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> gradient;
};

struct MinimizeOptions {
  int max_iterations = 500;
  double step_tol = 1e-8;
};

struct MinimizeResult {
  Eigen::VectorXd x;
  double value = 0.0;
  int iterations = 0;
  bool step_converged = false;
};

// Damped Newton with a central-difference Hessian of the analytic gradient,
// Armijo backtracking, and a simplex restart when the line search stalls.
MinimizeResult newton_minimize(const SmoothObjective& f, Eigen::VectorXd x0, const MinimizeOptions& opt);

MinimizeResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f, Eigen::VectorXd x0,
                           double step, int max_iterations, double ftol);

// Central-difference Jacobian of g at x.
Eigen::MatrixXd fd_jacobian(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& g,
                            const Eigen::VectorXd& x, double rel_step = 1e-5);

}  // namespace lphi
