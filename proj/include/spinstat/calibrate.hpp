#pragma once

// End-to-end synth -> fit -> bound pipeline and its Monte-Carlo calibration.

#include <cstdint>
#include <vector>

#include <json.hpp>

#include "spinstat/bounds.hpp"
#include "spinstat/exec.hpp"
#include "spinstat/specmodel.hpp"
#include "spinstat/synth.hpp"

namespace spinstat::bounds {

struct Scenario {
  specmodel::MoleculeSpec molecule;
  specmodel::BranchSet branches;
  int j_max = 30;
  double beta2_half = 0.0;  // injected
  synth::LineShapeParams shape;
  double column = 0.01;
  double snr = 1e4;
  std::uint64_t seed = 42;
  int n_average = 1;
  // Grid: all zero selects default_grid with a 0.5 cm^-1 margin.
  double grid_min = 0.0;
  double grid_max = 0.0;
  double grid_step = 0.0;
  int baseline_degree = 1;
  bool fit_shape = false;
  double cl = 0.95;

  void validate() const;
  bool operator==(const Scenario&) const = default;
};

// Catalogs, grid and noise-free optical depth shared by every trial.
struct Prepared {
  Scenario scenario;
  specmodel::LineCatalog truth;      // injected beta2_half
  specmodel::LineCatalog template_;  // beta2_half = 0, the fit model
  std::vector<double> grid;
  std::vector<double> tau;
};

Prepared prepare(const Scenario& s);

// Noisy spectrum from `seed`; n_average > 1 averages replicas with seeds
// derived from it.
synth::Spectrum simulate(const Prepared& p, std::uint64_t seed, Exec exec = Exec::Parallel);

// fit_allowed + forbidden_scan + combine_bound.
BoundReport analyze(const synth::Spectrum& spectrum, const Prepared& p);

struct CoverageReport {
  int n_trials = 0;
  int failures = 0;
  double true_beta2_half = 0.0;
  double cl = 0.95;
  double coverage = 0.0;
  double coverage_threshold = 0.0;  // cl - 3 binomial sigma
  bool coverage_ok = false;
  double median_upper_limit = 0.0;
  double median_beta2_half_hat = 0.0;
  double median_sigma = 0.0;
  std::vector<double> beta2_half_hat;  // successful trials, trial order
  std::vector<double> upper_limit;
};

// Trials use seeds derive_seed(scenario.seed, i). Failed fits are counted;
// more than 10% failures raise CalibrationError.
CoverageReport mc_calibrate(const Scenario& s, int n_trials, Exec exec = Exec::Parallel);

double median(std::vector<double> v);

nlohmann::json to_json(const CoverageReport& r);

}  // namespace spinstat::bounds
