#include <array>
#include <cmath>
#include <complex>
#include <numbers>

#include "spinstat/errors.hpp"
#include "spinstat/synth.hpp"

namespace spinstat::synth {

namespace {

// J.A.C. Weideman, "Computation of the complex error function",
// SIAM J. Numer. Anal. 31 (1994) 1497. N = 32 coefficients of the expansion
// in Z = (L + iz)/(L - iz), computed once from a cosine transform of
// exp(-t^2)(L^2 + t^2) sampled at t = L tan(theta/2).
constexpr int kTerms = 32;

struct Weideman {
  double L;
  std::array<double, kTerms> a;  // a[j] multiplies Z^j

  Weideman() {
    constexpr int m = 2 * kTerms;
    constexpr int m2 = 2 * m;
    L = std::sqrt(kTerms / std::numbers::sqrt2);
    std::array<double, m2> f{};
    for (int k = -m + 1; k <= m - 1; ++k) {
      const double t = L * std::tan(k * std::numbers::pi / m / 2.0);
      f[static_cast<std::size_t>((k + m2) % m2)] = std::exp(-t * t) * (L * L + t * t);
    }
    for (int j = 1; j <= kTerms; ++j) {
      double acc = 0.0;
      for (int i = 0; i < m2; ++i) {
        acc += f[static_cast<std::size_t>(i)] * std::cos(2.0 * std::numbers::pi * i * j / m2);
      }
      a[static_cast<std::size_t>(j - 1)] = acc / m2;
    }
  }
};

const Weideman& coefficients() {
  static const Weideman w;
  return w;
}

constexpr double kSqrt2Ln2 = 1.1774100225154747;  // sqrt(2 ln 2)

}  // namespace

std::complex<double> faddeeva(std::complex<double> z) {
  const auto& w = coefficients();
  const std::complex<double> iz(-z.imag(), z.real());
  const std::complex<double> den = w.L - iz;
  const std::complex<double> zz = (w.L + iz) / den;
  std::complex<double> p = 0.0;
  for (int j = kTerms - 1; j >= 0; --j) p = p * zz + w.a[static_cast<std::size_t>(j)];
  return 2.0 * p / (den * den) + (1.0 / std::sqrt(std::numbers::pi)) / den;
}

void LineShapeParams::validate() const {
  if (!(gaussian_hwhm >= 0.0) || !(lorentzian_hwhm >= 0.0) || !std::isfinite(gaussian_hwhm) ||
      !std::isfinite(lorentzian_hwhm)) {
    throw ValidationError("line widths must be finite and non-negative");
  }
  if (gaussian_hwhm == 0.0 && lorentzian_hwhm == 0.0) {
    throw ValidationError("gaussian_hwhm and lorentzian_hwhm cannot both be zero");
  }
}

double LineShapeParams::total_hwhm() const {
  const double fl = 2.0 * lorentzian_hwhm;
  const double fg = 2.0 * gaussian_hwhm;
  return 0.5 * (0.5346 * fl + std::sqrt(0.2166 * fl * fl + fg * fg));
}

double profile(double delta_nu, const LineShapeParams& p) {
  const double gamma = p.lorentzian_hwhm;
  if (p.gaussian_hwhm == 0.0) {
    return gamma / (std::numbers::pi * (delta_nu * delta_nu + gamma * gamma));
  }
  const double sigma = p.gaussian_hwhm / kSqrt2Ln2;
  const double norm = 1.0 / (sigma * std::sqrt(2.0 * std::numbers::pi));
  if (gamma == 0.0) {
    const double x = delta_nu / sigma;
    return norm * std::exp(-0.5 * x * x);
  }
  const double s = sigma * std::numbers::sqrt2;
  return norm * faddeeva({delta_nu / s, gamma / s}).real();
}

}  // namespace spinstat::synth
