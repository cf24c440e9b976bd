#include "spinstat/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/distributions/normal.hpp>

#include "spinstat/errors.hpp"
#include "spinstat/format.hpp"

namespace spinstat::bounds {

using specmodel::RoVibLine;

namespace {

// Per-sample absorbance noise floor for the matched filter, so a noise-free
// spectrum still yields a finite positive sigma.
constexpr double kNoiseFloor = 1e-16;

synth::LineShapeParams scaled(const synth::LineShapeParams& s, double k) {
  return {s.gaussian_hwhm * k, s.lorentzian_hwhm * k};
}

double baseline_at(const FitModel& m, double nu) {
  const double x = (nu - m.center) / m.half_span;
  double acc = 0.0;
  for (auto it = m.baseline_coeffs.rbegin(); it != m.baseline_coeffs.rend(); ++it)
    acc = acc * x + *it;
  return acc;
}

}  // namespace

double FitModel::evaluate(double nu) const {
  double acc = baseline_at(*this, nu);
  for (const auto& l : lines) {
    acc += l.amplitude * column * l.line.strength * synth::profile(nu - l.line.position, shape);
  }
  return acc;
}

std::vector<double> FitModel::evaluate(std::span<const double> grid) const {
  std::vector<double> out(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) out[i] = evaluate(grid[i]);
  return out;
}

FitModel fit_allowed(const synth::Spectrum& spectrum, const specmodel::LineCatalog& catalog,
                     const FitOptions& options) {
  spectrum.validate();
  options.shape.validate();
  if (options.baseline_degree < 0 || options.baseline_degree > 3) {
    throw ValidationError("baseline degree must lie in [0, 3]");
  }
  if (!(options.column > 0.0)) throw ValidationError("fit column must be positive");

  const auto& grid = spectrum.grid;
  std::vector<RoVibLine> lines;
  for (const auto& l : catalog.lines) {
    if (l.allowed && l.strength > 0.0 && l.position >= grid.front() && l.position <= grid.back()) {
      lines.push_back(l);
    }
  }
  if (lines.empty()) {
    throw RangeError("spectrum [" + format_short(grid.front(), 10) + ", " +
                     format_short(grid.back(), 10) +
                     "] cm^-1 contains no allowed line of the catalog");
  }

  FitModel model;
  model.center = 0.5 * (grid.front() + grid.back());
  model.half_span = 0.5 * (grid.back() - grid.front());
  model.column = options.column;

  const auto m = static_cast<Eigen::Index>(grid.size());
  const int nb = options.baseline_degree + 1;
  const auto nl = static_cast<Eigen::Index>(lines.size());
  const Eigen::Index np = nb + nl + (options.fit_shape ? 1 : 0);

  Eigen::MatrixXd base(m, nb);
  for (Eigen::Index i = 0; i < m; ++i) {
    const double x = (grid[static_cast<std::size_t>(i)] - model.center) / model.half_span;
    double p = 1.0;
    for (int k = 0; k < nb; ++k, p *= x) base(i, k) = p;
  }
  auto line_columns = [&](double width_scale) {
    const auto shape = scaled(options.shape, width_scale);
    Eigen::MatrixXd cols(m, nl);
    for (Eigen::Index j = 0; j < nl; ++j) {
      const auto& l = lines[static_cast<std::size_t>(j)];
      for (Eigen::Index i = 0; i < m; ++i) {
        cols(i, j) = options.column * l.strength *
                     synth::profile(grid[static_cast<std::size_t>(i)] - l.position, shape);
      }
    }
    return cols;
  };
  const Eigen::MatrixXd fixed_cols = line_columns(1.0);
  const Eigen::Map<const Eigen::VectorXd> data(spectrum.absorbance.data(), m);

  auto columns_for = [&](const Eigen::VectorXd& x) {
    return options.fit_shape ? line_columns(x(np - 1)) : fixed_cols;
  };
  auto predict = [&](const Eigen::VectorXd& x, const Eigen::MatrixXd& cols) {
    return Eigen::VectorXd(base * x.head(nb) + cols * x.segment(nb, nl));
  };

  lm::Problem problem;
  problem.residuals = [&](const Eigen::VectorXd& x, Eigen::VectorXd& r) {
    r = predict(x, columns_for(x)) - data;
  };
  problem.jacobian = [&](const Eigen::VectorXd& x, Eigen::MatrixXd& jac) {
    jac.resize(m, np);
    jac.leftCols(nb) = base;
    const Eigen::MatrixXd cols = columns_for(x);
    jac.middleCols(nb, nl) = cols;
    if (options.fit_shape) {
      const double s = x(np - 1);
      const double h = 1e-6 * s;
      Eigen::VectorXd xp = x, xm = x;
      xp(np - 1) = s + h;
      xm(np - 1) = s - h;
      jac.col(np - 1) = (predict(xp, line_columns(s + h)) - predict(xm, line_columns(s - h))) /
                        (2.0 * h);
    }
  };
  problem.lower = Eigen::VectorXd::Constant(np, -std::numeric_limits<double>::infinity());
  problem.lower.segment(nb, nl).setZero();
  if (options.fit_shape) problem.lower(np - 1) = 1e-3;
  for (int k = 0; k < nb; ++k) problem.names.push_back("baseline c" + std::to_string(k));
  for (const auto& l : lines) problem.names.push_back("amplitude of " + specmodel::line_label(l));
  if (options.fit_shape) problem.names.push_back("width scale");

  Eigen::VectorXd x0 = Eigen::VectorXd::Zero(np);
  x0.segment(nb, nl).setOnes();
  if (options.fit_shape) x0(np - 1) = 1.0;

  const auto res = lm::minimize(problem, x0, options.solver);
  const Eigen::VectorXd& x = res.x;

  model.iterations = res.iterations;
  model.cost = res.cost;
  model.gradient_norm = res.gradient_norm;
  model.cost_history = res.cost_history;
  model.width_scale = options.fit_shape ? x(np - 1) : 1.0;
  model.shape = scaled(options.shape, model.width_scale);
  model.baseline_coeffs.assign(x.data(), x.data() + nb);

  Eigen::VectorXd r;
  problem.residuals(x, r);
  Eigen::MatrixXd jac;
  problem.jacobian(x, jac);
  model.dof = static_cast<int>(m - np);
  model.residual_rms = model.dof > 0 ? std::sqrt(r.squaredNorm() / model.dof) : 0.0;
  const Eigen::MatrixXd cov =
      (jac.transpose() * jac).ldlt().solve(Eigen::MatrixXd::Identity(np, np)) *
      (model.residual_rms * model.residual_rms);

  double wsum = 0.0, wmean = 0.0, plain = 0.0;
  bool any_zero_sigma = false;
  for (Eigen::Index j = 0; j < nl; ++j) {
    FittedLine fl;
    fl.line = lines[static_cast<std::size_t>(j)];
    fl.amplitude = x(nb + j);
    fl.sigma = std::sqrt(std::max(cov(nb + j, nb + j), 0.0));
    model.lines.push_back(fl);
    plain += fl.amplitude;
    if (fl.sigma > 0.0) {
      wsum += 1.0 / (fl.sigma * fl.sigma);
      wmean += fl.amplitude / (fl.sigma * fl.sigma);
    } else {
      any_zero_sigma = true;
    }
  }
  if (any_zero_sigma || wsum == 0.0) {
    model.intensity_scale = plain / static_cast<double>(nl);
    model.intensity_scale_sigma = 0.0;
  } else {
    model.intensity_scale = wmean / wsum;
    model.intensity_scale_sigma = 1.0 / std::sqrt(wsum);
  }

  const double snr = spectrum.meta.snr;
  if (std::isfinite(snr) && snr > 0.0) {
    const double noise = 1.0 / (snr * std::sqrt(std::max(spectrum.meta.n_average, 1)));
    const Eigen::VectorXd fitted = r + data;
    double chi2 = 0.0;
    for (Eigen::Index i = 0; i < m; ++i) {
      const double sigma_i = noise * std::exp(fitted(i));
      chi2 += (r(i) / sigma_i) * (r(i) / sigma_i);
    }
    model.chi2 = chi2;
  }
  return model;
}

LineEstimate matched_filter(std::span<const double> grid, std::span<const double> residuals,
                            const RoVibLine& line, const synth::LineShapeParams& shape) {
  LineEstimate est;
  est.line = line;
  const double half = kFilterHalfWidth * shape.total_hwhm();
  if (grid.empty() || line.position - half < grid.front() || line.position + half > grid.back()) {
    est.status = LineStatus::OutOfRange;
    return est;
  }
  const auto lo = static_cast<std::size_t>(
      std::lower_bound(grid.begin(), grid.end(), line.position - half) - grid.begin());
  const auto hi = static_cast<std::size_t>(
      std::upper_bound(grid.begin(), grid.end(), line.position + half) - grid.begin());

  const std::size_t n = hi - lo;
  if (n < 3) {
    est.status = LineStatus::OutOfRange;
    return est;
  }
  // Local model r = a w + c: the constant absorbs whatever continuum offset
  // the global baseline left in the window, so the template is w - mean(w).
  std::vector<double> w(n);
  double wmean = 0.0, rmean = 0.0;
  for (std::size_t i = lo; i < hi; ++i) {
    w[i - lo] = synth::profile(grid[i] - line.position, shape);
    wmean += w[i - lo];
    rmean += residuals[i];
  }
  wmean /= static_cast<double>(n);
  rmean /= static_cast<double>(n);
  double sw2 = 0.0, swr = 0.0;
  for (std::size_t i = lo; i < hi; ++i) {
    const double wi = w[i - lo] - wmean;
    sw2 += wi * wi;
    swr += wi * residuals[i];
  }
  if (sw2 == 0.0) {
    est.status = LineStatus::OutOfRange;
    return est;
  }
  est.amplitude = swr / sw2;
  double ss = 0.0;
  for (std::size_t i = lo; i < hi; ++i) {
    const double e = residuals[i] - rmean - est.amplitude * (w[i - lo] - wmean);
    ss += e * e;
  }
  const double noise = std::max(std::sqrt(ss / static_cast<double>(n - 2)), kNoiseFloor);
  est.sigma = noise / std::sqrt(sw2);
  return est;
}

std::vector<LineEstimate> forbidden_scan(const synth::Spectrum& spectrum, const FitModel& model,
                                         std::span<const RoVibLine> forbidden) {
  std::vector<LineEstimate> out;
  if (forbidden.empty()) return out;
  const auto fitted = model.evaluate(spectrum.grid);
  std::vector<double> resid(fitted.size());
  for (std::size_t i = 0; i < resid.size(); ++i) resid[i] = spectrum.absorbance[i] - fitted[i];

  const double blend = kBlendRadius * model.shape.total_hwhm();
  for (const auto& f : forbidden) {
    auto est = matched_filter(spectrum.grid, resid, f, model.shape);
    if (est.status == LineStatus::Ok) {
      for (const auto& a : model.lines) {
        if (std::abs(a.line.position - f.position) < blend) {
          est.status = LineStatus::Blended;
          break;
        }
      }
    }
    out.push_back(est);
  }
  return out;
}

double z_value(double cl) {
  if (!(cl > 0.0 && cl < 1.0)) throw ValidationError("confidence level must lie in (0, 1)");
  return boost::math::quantile(boost::math::normal_distribution<double>(), cl);
}

BoundReport combine_bound(std::span<const LineEstimate> per_line,
                          const specmodel::LineCatalog& catalog, const FitModel& model,
                          double cl) {
  BoundReport rep;
  rep.cl = cl;
  rep.z = z_value(cl);
  rep.chi2_dof = model.dof > 0 ? model.chi2 / model.dof : 0.0;

  double wsum = 0.0, wmean = 0.0;
  for (const auto& e : per_line) {
    LineBound lb;
    lb.line = e.line;
    lb.amplitude = e.amplitude;
    lb.sigma = e.sigma;
    lb.status = e.status;
    if (e.status == LineStatus::Ok) {
      const double k = model.column * model.intensity_scale *
                       specmodel::line_strength(catalog.molecule, e.line.branch, e.line.j_lower,
                                                1.0, catalog.normalization);
      if (!(k > 0.0)) {
        throw NoBoundError("non-positive conversion factor for " + specmodel::line_label(e.line));
      }
      lb.beta2_half = e.amplitude / k;
      lb.beta2_half_sigma = e.sigma / k;
      if (lb.beta2_half_sigma > 0.0) {
        const double w = 1.0 / (lb.beta2_half_sigma * lb.beta2_half_sigma);
        wsum += w;
        wmean += w * lb.beta2_half;
        ++rep.lines_used;
      }
    }
    rep.per_line.push_back(lb);
  }
  if (rep.lines_used == 0) {
    throw NoBoundError("no unblended forbidden line with a usable estimate");
  }
  rep.beta2_half_hat = wmean / wsum;
  rep.sigma = 1.0 / std::sqrt(wsum);
  rep.upper_limit = std::max(rep.beta2_half_hat, 0.0) + rep.z * rep.sigma;
  return rep;
}

std::string BoundReport::summary() const {
  char buf[160];
  std::snprintf(buf, sizeof buf, "beta2_half <= %.2g (%g%% CL, %d lines, chi2/dof=%.2f)",
                upper_limit, cl * 100.0, lines_used, chi2_dof);
  return buf;
}

std::string to_string(LineStatus s) {
  switch (s) {
    case LineStatus::Ok: return "ok";
    case LineStatus::Blended: return "blended";
    case LineStatus::OutOfRange: return "out_of_range";
  }
  return "unknown";
}

nlohmann::json to_json(const FitModel& m) {
  nlohmann::json lines = nlohmann::json::array();
  for (const auto& l : m.lines) {
    lines.push_back({{"line", specmodel::line_label(l.line)},
                     {"position_cm1", l.line.position},
                     {"amplitude", l.amplitude},
                     {"sigma", l.sigma}});
  }
  return {{"baseline_coeffs", m.baseline_coeffs},
          {"center_cm1", m.center},
          {"half_span_cm1", m.half_span},
          {"gaussian_hwhm", m.shape.gaussian_hwhm},
          {"lorentzian_hwhm", m.shape.lorentzian_hwhm},
          {"width_scale", m.width_scale},
          {"intensity_scale", m.intensity_scale},
          {"intensity_scale_sigma", m.intensity_scale_sigma},
          {"iterations", m.iterations},
          {"residual_rms", m.residual_rms},
          {"chi2", m.chi2},
          {"dof", m.dof},
          {"lines", std::move(lines)}};
}

nlohmann::json to_json(const BoundReport& r) {
  nlohmann::json lines = nlohmann::json::array();
  for (const auto& l : r.per_line) {
    lines.push_back({{"line", specmodel::line_label(l.line)},
                     {"J_lower", l.line.j_lower},
                     {"position_cm1", l.line.position},
                     {"amplitude", l.amplitude},
                     {"sigma", l.sigma},
                     {"beta2_half", l.beta2_half},
                     {"beta2_half_sigma", l.beta2_half_sigma},
                     {"status", to_string(l.status)}});
  }
  return {{"beta2_half_hat", r.beta2_half_hat},
          {"sigma", r.sigma},
          {"upper_limit", r.upper_limit},
          {"CL", r.cl},
          {"z", r.z},
          {"lines_used", r.lines_used},
          {"chi2_dof", r.chi2_dof},
          {"summary", r.summary()},
          {"per_line", std::move(lines)}};
}

}  // namespace spinstat::bounds
