#include "spinstat/specmodel.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "spinstat/errors.hpp"
#include "spinstat/format.hpp"
#include "spinstat/rng.hpp"

namespace spinstat::specmodel {

void MoleculeSpec::validate() const {
  auto fail = [this](const std::string& what) {
    throw ValidationError("molecule '" + name + "': " + what);
  };
  if (nuclear_spin != 0) fail("only spin-0 identical nuclei are modelled");
  if (!(b_lower > 0.0) || !(b_upper > 0.0)) fail("rotational constants must be positive");
  if (!(d_lower >= 0.0) || !(d_upper >= 0.0)) fail("distortion constants must be non-negative");
  if (!(nu0 > 0.0)) fail("band origin must be positive");
  if (!(temperature > 0.0)) fail("temperature must be positive");
}

MoleculeSpec co2_like_2um() { return MoleculeSpec{}; }

JParity allowed_parity(ElectronicParity e) {
  return e == ElectronicParity::Symmetric ? JParity::Even : JParity::Odd;
}

bool is_allowed(ElectronicParity e, int j_lower) {
  const JParity p = j_lower % 2 == 0 ? JParity::Even : JParity::Odd;
  return p == allowed_parity(e);
}

double term_value(double b, double d, int j) {
  const double jj = static_cast<double>(j) * (j + 1);
  return b * jj - d * jj * jj;
}

namespace {

int upper_j(Branch branch, int j_lower) {
  if (j_lower < 0) throw ValidationError("J_lower must be non-negative");
  if (branch == Branch::P && j_lower == 0) throw ValidationError("P(0) does not exist");
  return branch == Branch::R ? j_lower + 1 : j_lower - 1;
}

double honl_london(Branch branch, int j_lower) {
  return branch == Branch::R ? j_lower + 1.0 : static_cast<double>(j_lower);
}

}  // namespace

double line_position(const MoleculeSpec& m, Branch branch, int j_lower) {
  const int ju = upper_j(branch, j_lower);
  const double nu = m.nu0 + term_value(m.b_upper, m.d_upper, ju) -
                    term_value(m.b_lower, m.d_lower, j_lower);
  if (!(nu > 0.0)) throw ValidationError("line position is not positive");
  return nu;
}

double raw_strength(const MoleculeSpec& m, Branch branch, int j_lower, double beta2_half) {
  upper_j(branch, j_lower);
  const double g_ns = is_allowed(m.electronic_parity, j_lower) ? 1.0 : beta2_half;
  const double boltzmann = (2.0 * j_lower + 1.0) *
                           std::exp(-kSecondRadiationConstant *
                                    term_value(m.b_lower, m.d_lower, j_lower) / m.temperature);
  return g_ns * boltzmann * honl_london(branch, j_lower);
}

double line_strength(const MoleculeSpec& m, Branch branch, int j_lower, double beta2_half,
                     double normalization) {
  if (!(normalization > 0.0)) throw ValidationError("normalization must be positive");
  return raw_strength(m, branch, j_lower, beta2_half) / normalization;
}

std::vector<RoVibLine> LineCatalog::allowed_lines() const {
  std::vector<RoVibLine> out;
  std::copy_if(lines.begin(), lines.end(), std::back_inserter(out),
               [](const RoVibLine& l) { return l.allowed; });
  return out;
}

std::vector<RoVibLine> LineCatalog::forbidden_lines() const {
  std::vector<RoVibLine> out;
  std::copy_if(lines.begin(), lines.end(), std::back_inserter(out),
               [](const RoVibLine& l) { return !l.allowed; });
  return out;
}

std::uint64_t LineCatalog::hash() const { return fnv1a64(to_json(*this).dump()); }

LineCatalog build_catalog(const MoleculeSpec& m, BranchSet branches, int j_max,
                          double beta2_half) {
  m.validate();
  if (j_max < 0) throw ValidationError("J_max must be non-negative");
  if (!(beta2_half >= 0.0 && beta2_half <= 1.0)) {
    throw ValidationError("beta2_half must lie in [0, 1]");
  }
  if (!branches.p && !branches.r) throw ValidationError("no branch selected");

  LineCatalog cat;
  cat.molecule = m;
  cat.beta2_half = beta2_half;

  std::vector<std::pair<Branch, int>> keys;
  for (int j = 0; j <= j_max; ++j) {
    if (branches.r) keys.emplace_back(Branch::R, j);
    if (branches.p && j >= 1) keys.emplace_back(Branch::P, j);
  }

  double norm = 0.0;
  for (const auto& [b, j] : keys)
    if (is_allowed(m.electronic_parity, j)) norm = std::max(norm, raw_strength(m, b, j, 1.0));
  if (!(norm > 0.0)) {
    // Only forbidden levels in range (e.g. J_max = 0 with odd-J allowed):
    // normalize to the strongest line as if it were allowed.
    for (const auto& [b, j] : keys) norm = std::max(norm, raw_strength(m, b, j, 1.0));
  }
  cat.normalization = norm;

  for (const auto& [b, j] : keys) {
    RoVibLine l;
    l.branch = b;
    l.j_lower = j;
    l.position = line_position(m, b, j);
    l.allowed = is_allowed(m.electronic_parity, j);
    l.strength = line_strength(m, b, j, beta2_half, norm);
    cat.lines.push_back(l);
  }
  std::stable_sort(cat.lines.begin(), cat.lines.end(),
                   [](const RoVibLine& a, const RoVibLine& b) { return a.position < b.position; });
  return cat;
}

std::string branch_name(Branch b) { return b == Branch::R ? "R" : "P"; }

std::string line_label(const RoVibLine& l) {
  return branch_name(l.branch) + "(" + std::to_string(l.j_lower) + ")";
}

nlohmann::json to_json(const RoVibLine& l) {
  return {{"branch", branch_name(l.branch)},
          {"J_lower", l.j_lower},
          {"position_cm1", l.position},
          {"strength", l.strength},
          {"allowed", l.allowed}};
}

nlohmann::json to_json(const LineCatalog& c) {
  const auto& m = c.molecule;
  nlohmann::json lines = nlohmann::json::array();
  for (const auto& l : c.lines) lines.push_back(to_json(l));
  return {{"molecule",
           {{"name", m.name},
            {"electronic_parity",
             m.electronic_parity == ElectronicParity::Symmetric ? "symmetric" : "antisymmetric"},
            {"nuclear_spin", m.nuclear_spin},
            {"B_lower", m.b_lower},
            {"B_upper", m.b_upper},
            {"D_lower", m.d_lower},
            {"D_upper", m.d_upper},
            {"nu0", m.nu0},
            {"T", m.temperature}}},
          {"beta2_half", c.beta2_half},
          {"normalization", c.normalization},
          {"lines", std::move(lines)}};
}

std::string to_csv(const LineCatalog& c) {
  std::ostringstream os;
  os << "branch,J_lower,position_cm1,strength,allowed\n";
  for (const auto& l : c.lines) {
    if (l.strength == 0.0) continue;
    os << branch_name(l.branch) << ',' << l.j_lower << ',' << format_exact(l.position) << ','
       << format_exact(l.strength) << ',' << (l.allowed ? "true" : "false") << '\n';
  }
  return os.str();
}

}  // namespace spinstat::specmodel
