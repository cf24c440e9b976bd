#pragma once

// Synthetic absorption spectra: Voigt line shapes, Beer-Lambert rendering of
// a line catalog, detector noise on transmittance, and spectrum file I/O.

#include <complex>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "spinstat/exec.hpp"
#include "spinstat/specmodel.hpp"

namespace spinstat::synth {

inline constexpr double kTransmittanceFloor = 1e-12;
inline constexpr double kNoNoise = std::numeric_limits<double>::infinity();

struct LineShapeParams {
  double gaussian_hwhm = 0.006;   // cm^-1
  double lorentzian_hwhm = 0.002;

  void validate() const;
  // Half width of the combined profile (Olivero-Longbothum).
  double total_hwhm() const;

  bool operator==(const LineShapeParams&) const = default;
};

// Faddeeva function w(z) for Im z >= 0, Weideman's 32-term rational
// expansion. Relative error below 1e-12 near the real axis in practice.
std::complex<double> faddeeva(std::complex<double> z);

// Area-normalized Voigt profile, 1/cm^-1. Pure Gaussian or pure Lorentzian
// when the other width is zero.
double profile(double delta_nu, const LineShapeParams& p);

struct SpectrumMeta {
  std::uint64_t catalog_hash = 0;
  std::uint64_t seed = 0;
  double snr = kNoNoise;
  double column = 0.0;
  LineShapeParams shape;
  int n_average = 1;

  bool operator==(const SpectrumMeta&) const = default;
};

struct Spectrum {
  std::vector<double> grid;        // cm^-1, strictly increasing
  std::vector<double> absorbance;
  SpectrumMeta meta;

  void validate() const;
  bool operator==(const Spectrum&) const = default;
};

// lo, lo + step, ..., ending at the first point >= hi (within 1e-9 steps).
std::vector<double> uniform_grid(double lo, double hi, double step);

// Covers every line of the catalog with `margin` on each side; step defaults
// to gaussian_hwhm / 5 (lorentzian_hwhm / 5 for a pure Lorentzian).
std::vector<double> default_grid(const specmodel::LineCatalog& cat, const LineShapeParams& shape,
                                 double margin = 0.5, double step = 0.0);

// column * sum_lines strength * profile(nu - position), no noise.
std::vector<double> optical_depth(const specmodel::LineCatalog& cat, std::span<const double> grid,
                                  const LineShapeParams& shape, double column,
                                  Exec exec = Exec::Parallel);

// Adds N(0, 1/snr) noise to exp(-tau) sample by sample, keyed by (seed, index),
// and returns -ln(max(t + noise, floor)). snr = kNoNoise disables the noise.
std::vector<double> noisy_absorbance(std::span<const double> tau, double snr, std::uint64_t seed,
                                     Exec exec = Exec::Parallel);

// RangeError when a line with nonzero strength falls outside the grid.
void check_grid_covers(const specmodel::LineCatalog& cat, std::span<const double> grid);

Spectrum synthesize(const specmodel::LineCatalog& cat, std::span<const double> grid,
                    const LineShapeParams& shape, double column, double snr, std::uint64_t seed,
                    Exec exec = Exec::Parallel);

// Sample-wise mean of spectra on a common grid.
Spectrum average_spectra(std::span<const Spectrum> spectra);

nlohmann::json meta_to_json(const SpectrumMeta& m);
SpectrumMeta meta_from_json(const nlohmann::json& j);

// Header wavenumber_cm1,absorbance; 18 significant digits.
std::string to_csv(const Spectrum& s);
Spectrum from_csv(const std::string& text);

// `provenance`, when given, is stored in the sidecar under "meta".
void write_spectrum(const Spectrum& s, const std::filesystem::path& csv,
                    const std::filesystem::path& sidecar, const nlohmann::json& provenance = {});
Spectrum read_spectrum(const std::filesystem::path& csv, const std::filesystem::path& sidecar);

}  // namespace spinstat::synth
