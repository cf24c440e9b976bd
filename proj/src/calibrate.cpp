#include "spinstat/calibrate.hpp"

#include <algorithm>
#include <cmath>

#include "spinstat/errors.hpp"
#include "spinstat/rng.hpp"

namespace spinstat::bounds {

void Scenario::validate() const {
  molecule.validate();
  shape.validate();
  if (!branches.p && !branches.r) throw ValidationError("no branch selected");
  if (j_max < 0) throw ValidationError("J_max must be non-negative");
  if (!(beta2_half >= 0.0 && beta2_half <= 1.0)) {
    throw ValidationError("beta2_half must lie in [0, 1]");
  }
  if (!(column > 0.0) || !std::isfinite(column)) throw ValidationError("column must be positive");
  if (!(snr > 0.0)) throw ValidationError("snr must be positive");
  if (n_average < 1) throw ValidationError("n_average must be >= 1");
  const bool auto_grid = grid_min == 0.0 && grid_max == 0.0;
  if (!auto_grid && !(grid_max > grid_min)) throw ValidationError("grid_max must exceed grid_min");
  if (grid_step < 0.0) throw ValidationError("grid_step must be non-negative");
  if (baseline_degree < 0 || baseline_degree > 3) {
    throw ValidationError("baseline_degree must lie in [0, 3]");
  }
  if (!(cl > 0.0 && cl < 1.0)) throw ValidationError("CL must lie in (0, 1)");
}

Prepared prepare(const Scenario& s) {
  s.validate();
  Prepared p;
  p.scenario = s;
  p.truth = specmodel::build_catalog(s.molecule, s.branches, s.j_max, s.beta2_half);
  p.template_ = specmodel::build_catalog(s.molecule, s.branches, s.j_max, 0.0);
  if (s.grid_min == 0.0 && s.grid_max == 0.0) {
    p.grid = synth::default_grid(p.truth, s.shape, 0.5, s.grid_step);
  } else {
    const double step = s.grid_step > 0.0 ? s.grid_step
                        : (s.shape.gaussian_hwhm > 0.0 ? s.shape.gaussian_hwhm
                                                       : s.shape.lorentzian_hwhm) / 5.0;
    p.grid = synth::uniform_grid(s.grid_min, s.grid_max, step);
  }
  synth::check_grid_covers(p.truth, p.grid);
  p.tau = synth::optical_depth(p.truth, p.grid, s.shape, s.column);
  return p;
}

synth::Spectrum simulate(const Prepared& p, std::uint64_t seed, Exec exec) {
  const auto& s = p.scenario;
  synth::Spectrum out;
  out.grid = p.grid;
  out.meta.catalog_hash = p.truth.hash();
  out.meta.seed = seed;
  out.meta.snr = s.snr;
  out.meta.column = s.column;
  out.meta.shape = s.shape;
  out.meta.n_average = s.n_average;
  if (s.n_average == 1) {
    out.absorbance = synth::noisy_absorbance(p.tau, s.snr, seed, exec);
    return out;
  }
  out.absorbance.assign(p.grid.size(), 0.0);
  for (int k = 0; k < s.n_average; ++k) {
    const auto a = synth::noisy_absorbance(p.tau, s.snr, derive_seed(seed, static_cast<std::uint64_t>(k)), exec);
    for (std::size_t i = 0; i < a.size(); ++i) out.absorbance[i] += a[i];
  }
  for (double& a : out.absorbance) a /= s.n_average;
  return out;
}

BoundReport analyze(const synth::Spectrum& spectrum, const Prepared& p) {
  const auto& s = p.scenario;
  FitOptions opt;
  opt.baseline_degree = s.baseline_degree;
  opt.fit_shape = s.fit_shape;
  opt.shape = s.shape;
  opt.column = s.column;
  const auto model = fit_allowed(spectrum, p.template_, opt);
  const auto forbidden = p.template_.forbidden_lines();
  const auto scan = forbidden_scan(spectrum, model, forbidden);
  return combine_bound(scan, p.template_, model, s.cl);
}

double median(std::vector<double> v) {
  if (v.empty()) return std::nan("");
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

namespace {

struct Trial {
  bool ok = false;
  double hat = 0.0;
  double sigma = 0.0;
  double upper = 0.0;
};

Trial run_trial(const Prepared& p, int i) {
  Trial t;
  try {
    const auto seed = derive_seed(p.scenario.seed, static_cast<std::uint64_t>(i));
    const auto rep = analyze(simulate(p, seed, Exec::Serial), p);
    t.ok = true;
    t.hat = rep.beta2_half_hat;
    t.sigma = rep.sigma;
    t.upper = rep.upper_limit;
  } catch (const ComputationError&) {
    t.ok = false;
  }
  return t;
}

}  // namespace

CoverageReport mc_calibrate(const Scenario& s, int n_trials, Exec exec) {
  if (n_trials < 100) throw ValidationError("mc_calibrate needs at least 100 trials");
  const Prepared p = prepare(s);

  std::vector<Trial> trials(static_cast<std::size_t>(n_trials));
  if (exec == Exec::Serial) {
    for (int i = 0; i < n_trials; ++i) trials[static_cast<std::size_t>(i)] = run_trial(p, i);
  } else {
#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < n_trials; ++i) trials[static_cast<std::size_t>(i)] = run_trial(p, i);
  }

  CoverageReport rep;
  rep.n_trials = n_trials;
  rep.true_beta2_half = s.beta2_half;
  rep.cl = s.cl;
  int covered = 0;
  std::vector<double> sigmas;
  for (const auto& t : trials) {
    if (!t.ok) {
      ++rep.failures;
      continue;
    }
    rep.beta2_half_hat.push_back(t.hat);
    rep.upper_limit.push_back(t.upper);
    sigmas.push_back(t.sigma);
    if (t.upper >= s.beta2_half) ++covered;
  }
  if (rep.failures * 10 > n_trials) {
    throw CalibrationError(std::to_string(rep.failures) + " of " + std::to_string(n_trials) +
                           " trials failed to fit");
  }
  const auto ok = static_cast<double>(n_trials - rep.failures);
  rep.coverage = covered / ok;
  rep.coverage_threshold = s.cl - 3.0 * std::sqrt(s.cl * (1.0 - s.cl) / ok);
  rep.coverage_ok = rep.coverage >= rep.coverage_threshold;
  rep.median_upper_limit = median(rep.upper_limit);
  rep.median_beta2_half_hat = median(rep.beta2_half_hat);
  rep.median_sigma = median(sigmas);
  return rep;
}

nlohmann::json to_json(const CoverageReport& r) {
  return {{"n_trials", r.n_trials},
          {"failures", r.failures},
          {"true_beta2_half", r.true_beta2_half},
          {"CL", r.cl},
          {"coverage", r.coverage},
          {"coverage_threshold", r.coverage_threshold},
          {"coverage_ok", r.coverage_ok},
          {"median_upper_limit", r.median_upper_limit},
          {"median_beta2_half_hat", r.median_beta2_half_hat},
          {"median_sigma", r.median_sigma}};
}

}  // namespace spinstat::bounds
