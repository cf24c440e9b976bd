#pragma once

// Bound-constrained Levenberg-Marquardt for small dense problems.

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

namespace spinstat::lm {

struct Problem {
  // r(x), length m.
  std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&)> residuals;
  // dr/dx, m x n.
  std::function<void(const Eigen::VectorXd&, Eigen::MatrixXd&)> jacobian;
  // Per-parameter lower bounds; empty means unbounded. Use -infinity for
  // unbounded entries.
  Eigen::VectorXd lower;
  // Used in diagnostics. May be empty.
  std::vector<std::string> names;
};

struct Options {
  int max_iterations = 200;
  double step_tolerance = 1e-10;  // relative
  double initial_lambda = 1e-3;
};

struct Result {
  Eigen::VectorXd x;
  double cost = 0.0;  // 0.5 |r|^2
  int iterations = 0;
  double gradient_norm = 0.0;
  // Cost after every accepted step, starting with the initial cost.
  std::vector<double> cost_history;
};

// Throws FitError when the Jacobian at x0 is rank deficient (naming the
// parameter) or when max_iterations pass without a step below tolerance
// (reporting the iteration count and final gradient norm).
Result minimize(const Problem& problem, Eigen::VectorXd x0, const Options& options = {});

}  // namespace spinstat::lm
