#pragma once

// Upper limits on the violation parameter from a spectrum: fit the allowed
// lines, scan the forbidden positions with a matched filter on the residuals,
// convert amplitudes to beta2_half through the catalog strengths and combine.

#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "spinstat/levmar.hpp"
#include "spinstat/specmodel.hpp"
#include "spinstat/synth.hpp"

namespace spinstat::bounds {

inline constexpr double kBlendRadius = 3.0;     // in total HWHM
inline constexpr double kFilterHalfWidth = 10.0;  // in total HWHM

struct FitOptions {
  int baseline_degree = 1;  // 0..3
  bool fit_shape = false;   // fit a common width scale factor
  synth::LineShapeParams shape;
  double column = 0.01;
  lm::Options solver;
};

struct FittedLine {
  specmodel::RoVibLine line;
  double amplitude = 0.0;  // 1 = catalog prediction
  double sigma = 0.0;
};

struct FitModel {
  std::vector<double> baseline_coeffs;  // in x = (nu - center) / half_span
  double center = 0.0;
  double half_span = 1.0;
  std::vector<FittedLine> lines;
  synth::LineShapeParams shape;
  double width_scale = 1.0;
  double column = 0.0;
  double intensity_scale = 1.0;  // inverse-variance mean of amplitudes
  double intensity_scale_sigma = 0.0;

  int iterations = 0;
  double cost = 0.0;
  double gradient_norm = 0.0;
  std::vector<double> cost_history;
  double residual_rms = 0.0;
  double chi2 = 0.0;  // against the detector noise model; 0 without noise info
  int dof = 0;

  double evaluate(double nu) const;
  std::vector<double> evaluate(std::span<const double> grid) const;
};

// Least-squares fit of baseline + allowed-line amplitudes (+ optional width
// scale). Forbidden catalog entries are ignored. RangeError when no allowed
// line falls on the spectrum grid; FitError on non-convergence or a
// degenerate parameter.
FitModel fit_allowed(const synth::Spectrum& spectrum, const specmodel::LineCatalog& catalog,
                     const FitOptions& options);

enum class LineStatus { Ok, Blended, OutOfRange };

struct LineEstimate {
  specmodel::RoVibLine line;
  double amplitude = 0.0;  // integrated absorbance, cm^-1
  double sigma = 0.0;
  LineStatus status = LineStatus::Ok;
};

// Matched filter on the fit residuals, one window of +-10 total HWHM per line.
// Amplitude and a local constant are fitted together, so a continuum offset
// left by the global baseline does not leak into the amplitude. Noise is the
// RMS of the window residuals after removing both.
std::vector<LineEstimate> forbidden_scan(const synth::Spectrum& spectrum, const FitModel& model,
                                         std::span<const specmodel::RoVibLine> forbidden);

// Same estimator on an explicit residual vector. Exposed for tests.
LineEstimate matched_filter(std::span<const double> grid, std::span<const double> residuals,
                            const specmodel::RoVibLine& line, const synth::LineShapeParams& shape);

struct LineBound {
  specmodel::RoVibLine line;
  double amplitude = 0.0;
  double sigma = 0.0;
  double beta2_half = 0.0;
  double beta2_half_sigma = 0.0;
  LineStatus status = LineStatus::Ok;
};

struct BoundReport {
  double beta2_half_hat = 0.0;
  double sigma = 0.0;
  double upper_limit = 0.0;
  double cl = 0.95;
  double z = 0.0;
  int lines_used = 0;
  double chi2_dof = 0.0;
  std::vector<LineBound> per_line;

  // "beta2_half <= 3.2e-06 (95% CL, 4 lines, chi2/dof=1.02)"
  std::string summary() const;
};

// One-sided Gaussian quantile.
double z_value(double cl);

// Converts each unblended amplitude to beta2_half by dividing by
// column * intensity_scale * strength(beta2_half = 1), combines with inverse
// variance weights, and sets upper_limit = max(hat, 0) + z(cl) sigma.
// NoBoundError when no line is usable.
BoundReport combine_bound(std::span<const LineEstimate> per_line,
                          const specmodel::LineCatalog& catalog, const FitModel& model, double cl);

std::string to_string(LineStatus s);
nlohmann::json to_json(const FitModel& m);
nlohmann::json to_json(const BoundReport& r);

}  // namespace spinstat::bounds
