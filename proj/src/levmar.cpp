#include "spinstat/levmar.hpp"

#include <cmath>
#include <sstream>

#include "spinstat/errors.hpp"

namespace spinstat::lm {

namespace {

std::string param_name(const Problem& p, Eigen::Index i) {
  if (static_cast<std::size_t>(i) < p.names.size()) return p.names[static_cast<std::size_t>(i)];
  return "parameter " + std::to_string(i);
}

void project(const Problem& p, Eigen::VectorXd& x) {
  if (p.lower.size() == 0) return;
  x = x.cwiseMax(p.lower);
}

void check_rank(const Problem& p, const Eigen::MatrixXd& jac) {
  for (Eigen::Index c = 0; c < jac.cols(); ++c) {
    if (jac.col(c).squaredNorm() == 0.0) {
      throw FitError("singular Jacobian: " + param_name(p, c) + " does not affect the residuals");
    }
  }
  // Column-normalized so the threshold is scale free.
  Eigen::MatrixXd scaled = jac;
  for (Eigen::Index c = 0; c < scaled.cols(); ++c) scaled.col(c).normalize();
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(scaled);
  qr.setThreshold(1e-12);
  if (qr.rank() < jac.cols()) {
    const auto degenerate = qr.colsPermutation().indices()(qr.rank());
    throw FitError("singular Jacobian: " + param_name(p, degenerate) +
                   " is degenerate with other parameters");
  }
}

}  // namespace

Result minimize(const Problem& problem, Eigen::VectorXd x0, const Options& options) {
  project(problem, x0);
  Eigen::VectorXd r;
  Eigen::MatrixXd jac;
  problem.residuals(x0, r);
  problem.jacobian(x0, jac);
  check_rank(problem, jac);

  Result res;
  res.x = std::move(x0);
  res.cost = 0.5 * r.squaredNorm();
  res.cost_history.push_back(res.cost);

  double lambda = options.initial_lambda;
  Eigen::VectorXd r_trial;
  for (int it = 1; it <= options.max_iterations; ++it) {
    res.iterations = it;
    const Eigen::MatrixXd a = jac.transpose() * jac;
    const Eigen::VectorXd g = jac.transpose() * r;
    res.gradient_norm = g.norm();
    if (res.cost == 0.0) return res;

    bool accepted = false;
    while (!accepted) {
      Eigen::MatrixXd damped = a;
      damped.diagonal() += lambda * a.diagonal();
      const Eigen::VectorXd delta = damped.ldlt().solve(-g);
      Eigen::VectorXd x_trial = res.x + delta;
      project(problem, x_trial);
      problem.residuals(x_trial, r_trial);
      const double cost_trial = 0.5 * r_trial.squaredNorm();

      if (std::isfinite(cost_trial) && cost_trial <= res.cost) {
        const double step = (x_trial - res.x).norm();
        const double scale = res.x.norm();
        res.x = std::move(x_trial);
        r.swap(r_trial);
        res.cost = cost_trial;
        res.cost_history.push_back(res.cost);
        lambda = std::max(lambda / 10.0, 1e-12);
        accepted = true;
        if (step <= options.step_tolerance * (scale + options.step_tolerance)) {
          problem.jacobian(res.x, jac);
          res.gradient_norm = (jac.transpose() * r).norm();
          return res;
        }
      } else {
        lambda *= 10.0;
        if (lambda > 1e30) {
          std::ostringstream os;
          os << "Levenberg-Marquardt stalled after " << it
             << " iterations (gradient norm " << res.gradient_norm << ")";
          throw FitError(os.str());
        }
      }
    }
    problem.jacobian(res.x, jac);
  }
  problem.jacobian(res.x, jac);
  std::ostringstream os;
  os << "Levenberg-Marquardt did not converge in " << options.max_iterations
     << " iterations (final gradient norm " << (jac.transpose() * r).norm() << ")";
  throw FitError(os.str());
}

}  // namespace spinstat::lm
