#include "spinstat/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "spinstat/errors.hpp"
#include "spinstat/format.hpp"
#include "spinstat/rng.hpp"

namespace spinstat::synth {

void Spectrum::validate() const {
  if (grid.size() != absorbance.size()) {
    throw ValidationError("spectrum grid and absorbance differ in length");
  }
  if (grid.empty()) throw ValidationError("spectrum is empty");
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (!(grid[i] > grid[i - 1])) throw ValidationError("spectrum grid is not strictly increasing");
  }
}

std::vector<double> uniform_grid(double lo, double hi, double step) {
  if (!(step > 0.0) || !(hi > lo) || !std::isfinite(lo) || !std::isfinite(hi)) {
    throw ValidationError("grid needs lo < hi and a positive step");
  }
  // Last point reaches hi (up to one step beyond it).
  const auto n = static_cast<std::size_t>(std::ceil((hi - lo) / step - 1e-9)) + 1;
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i) g[i] = lo + static_cast<double>(i) * step;
  return g;
}

std::vector<double> default_grid(const specmodel::LineCatalog& cat, const LineShapeParams& shape,
                                 double margin, double step) {
  shape.validate();
  if (cat.lines.empty()) throw RangeError("default_grid: catalog has no lines");
  if (step <= 0.0) {
    // Gaussian width drives sampling; pure Lorentzian falls back to its own.
    step = (shape.gaussian_hwhm > 0.0 ? shape.gaussian_hwhm : shape.lorentzian_hwhm) / 5.0;
  }
  return uniform_grid(cat.lines.front().position - margin, cat.lines.back().position + margin,
                      step);
}

namespace {

double tau_at(const specmodel::LineCatalog& cat, double nu, const LineShapeParams& shape,
              double column) {
  double acc = 0.0;
  for (const auto& l : cat.lines) {
    if (l.strength != 0.0) acc += l.strength * profile(nu - l.position, shape);
  }
  return column * acc;
}

double noisy_sample(double tau, double snr, std::uint64_t seed, std::size_t i) {
  double t = std::exp(-tau);
  if (std::isfinite(snr)) t += counter_normal(seed, i) / snr;
  return -std::log(std::max(t, kTransmittanceFloor));
}

}  // namespace

std::vector<double> optical_depth(const specmodel::LineCatalog& cat, std::span<const double> grid,
                                  const LineShapeParams& shape, double column, Exec exec) {
  shape.validate();
  std::vector<double> tau(grid.size());
  const auto n = static_cast<std::ptrdiff_t>(grid.size());
  if (exec == Exec::Serial) {
    for (std::ptrdiff_t i = 0; i < n; ++i) tau[i] = tau_at(cat, grid[i], shape, column);
  } else {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) tau[i] = tau_at(cat, grid[i], shape, column);
  }
  return tau;
}

std::vector<double> noisy_absorbance(std::span<const double> tau, double snr, std::uint64_t seed,
                                     Exec exec) {
  if (!(snr > 0.0)) throw ValidationError("snr must be positive");
  std::vector<double> a(tau.size());
  const auto n = static_cast<std::ptrdiff_t>(tau.size());
  if (exec == Exec::Serial) {
    for (std::ptrdiff_t i = 0; i < n; ++i)
      a[i] = noisy_sample(tau[i], snr, seed, static_cast<std::size_t>(i));
  } else {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i)
      a[i] = noisy_sample(tau[i], snr, seed, static_cast<std::size_t>(i));
  }
  return a;
}

void check_grid_covers(const specmodel::LineCatalog& cat, std::span<const double> grid) {
  if (grid.empty()) throw RangeError("empty grid");
  for (const auto& l : cat.lines) {
    if (l.strength != 0.0 && (l.position < grid.front() || l.position > grid.back())) {
      throw RangeError("line " + specmodel::line_label(l) + " at " + format_short(l.position, 10) +
                       " cm^-1 lies outside the grid [" + format_short(grid.front(), 10) + ", " +
                       format_short(grid.back(), 10) + "]");
    }
  }
}

Spectrum synthesize(const specmodel::LineCatalog& cat, std::span<const double> grid,
                    const LineShapeParams& shape, double column, double snr, std::uint64_t seed,
                    Exec exec) {
  shape.validate();
  if (!(snr > 0.0)) throw ValidationError("snr must be positive");
  if (!(column >= 0.0) || !std::isfinite(column)) {
    throw ValidationError("absorber column must be finite and non-negative");
  }
  check_grid_covers(cat, grid);
  Spectrum s;
  s.grid.assign(grid.begin(), grid.end());
  s.absorbance = noisy_absorbance(optical_depth(cat, grid, shape, column, exec), snr, seed, exec);
  s.meta.catalog_hash = cat.hash();
  s.meta.seed = seed;
  s.meta.snr = snr;
  s.meta.column = column;
  s.meta.shape = shape;
  s.meta.n_average = 1;
  s.validate();
  return s;
}

Spectrum average_spectra(std::span<const Spectrum> spectra) {
  if (spectra.empty()) throw ValidationError("average_spectra: nothing to average");
  Spectrum out = spectra.front();
  for (std::size_t k = 1; k < spectra.size(); ++k) {
    if (spectra[k].grid != out.grid) throw ValidationError("average_spectra: grids differ");
    for (std::size_t i = 0; i < out.absorbance.size(); ++i)
      out.absorbance[i] += spectra[k].absorbance[i];
  }
  const double n = static_cast<double>(spectra.size());
  for (double& a : out.absorbance) a /= n;
  out.meta.n_average = 0;
  for (const auto& s : spectra) out.meta.n_average += s.meta.n_average;
  return out;
}

nlohmann::json meta_to_json(const SpectrumMeta& m) {
  nlohmann::json snr = std::isfinite(m.snr) ? nlohmann::json(m.snr) : nlohmann::json(nullptr);
  return {{"catalog_hash", m.catalog_hash},
          {"seed", m.seed},
          {"snr", snr},
          {"column", m.column},
          {"gaussian_hwhm", m.shape.gaussian_hwhm},
          {"lorentzian_hwhm", m.shape.lorentzian_hwhm},
          {"n_average", m.n_average}};
}

SpectrumMeta meta_from_json(const nlohmann::json& j) {
  try {
    SpectrumMeta m;
    m.catalog_hash = j.at("catalog_hash").get<std::uint64_t>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.snr = j.at("snr").is_null() ? kNoNoise : j.at("snr").get<double>();
    m.column = j.at("column").get<double>();
    m.shape.gaussian_hwhm = j.at("gaussian_hwhm").get<double>();
    m.shape.lorentzian_hwhm = j.at("lorentzian_hwhm").get<double>();
    m.n_average = j.at("n_average").get<int>();
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("spectrum sidecar: ") + e.what());
  }
}

std::string to_csv(const Spectrum& s) {
  std::string out = "wavenumber_cm1,absorbance\n";
  out.reserve(out.size() + s.grid.size() * 52);
  for (std::size_t i = 0; i < s.grid.size(); ++i) {
    out += format_exact(s.grid[i]);
    out += ',';
    out += format_exact(s.absorbance[i]);
    out += '\n';
  }
  return out;
}

Spectrum from_csv(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line) || line != "wavenumber_cm1,absorbance") {
    throw ValidationError("spectrum CSV must start with header 'wavenumber_cm1,absorbance'");
  }
  Spectrum s;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto comma = line.find(',');
    char* end = nullptr;
    const double nu = std::strtod(line.c_str(), &end);
    const bool ok_nu = comma != std::string::npos && end == line.c_str() + comma;
    const double a = ok_nu ? std::strtod(line.c_str() + comma + 1, &end) : 0.0;
    if (!ok_nu || end != line.c_str() + line.size()) {
      throw ValidationError("spectrum CSV: malformed line " + std::to_string(lineno));
    }
    s.grid.push_back(nu);
    s.absorbance.push_back(a);
  }
  s.validate();
  return s;
}

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw ValidationError("cannot read " + p.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace

void write_spectrum(const Spectrum& s, const std::filesystem::path& csv,
                    const std::filesystem::path& sidecar, const nlohmann::json& provenance) {
  s.validate();
  {
    std::ofstream out(csv, std::ios::binary);
    if (!out) throw ValidationError("cannot write " + csv.string());
    out << to_csv(s);
  }
  nlohmann::json j = meta_to_json(s.meta);
  if (!provenance.is_null()) j["meta"] = provenance;
  std::ofstream out(sidecar, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + sidecar.string());
  out << j.dump(2) << '\n';
}

Spectrum read_spectrum(const std::filesystem::path& csv, const std::filesystem::path& sidecar) {
  Spectrum s = from_csv(slurp(csv));
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(slurp(sidecar));
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError("spectrum sidecar " + sidecar.string() + ": " + e.what());
  }
  s.meta = meta_from_json(j);
  return s;
}

}  // namespace spinstat::synth
