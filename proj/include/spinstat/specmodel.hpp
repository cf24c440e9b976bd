#pragma once

// Rovibrational line catalogs for a linear molecule with two identical spin-0
// nuclei. The total wavefunction is psi_e psi_v psi_r psi_n; with psi_n and
// psi_v symmetric under nuclear exchange, the parity of psi_e fixes which
// rotational levels exist. Levels of the other parity get the population
// ratio beta2_half instead of zero.

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

namespace spinstat::specmodel {

// Second radiation constant hc/k_B, cm K.
inline constexpr double kSecondRadiationConstant = 1.4388;

enum class ElectronicParity { Symmetric, Antisymmetric };
enum class JParity { Even, Odd };
enum class Branch { P, R };

struct MoleculeSpec {
  std::string name = "CO2-like-2um";
  ElectronicParity electronic_parity = ElectronicParity::Symmetric;
  int nuclear_spin = 0;
  double b_lower = 0.39;   // cm^-1
  double b_upper = 0.39;
  double d_lower = 1.3e-7;
  double d_upper = 1.3e-7;
  double nu0 = 5000.0;     // band origin, cm^-1
  double temperature = 296.0;  // K

  // Throws ValidationError on any invariant violation.
  void validate() const;

  bool operator==(const MoleculeSpec&) const = default;
};

// Illustrative round-number constants for a CO2-like 2 um combination band.
MoleculeSpec co2_like_2um();

JParity allowed_parity(ElectronicParity e);
bool is_allowed(ElectronicParity e, int j_lower);

// F(J) = B J(J+1) - D J^2 (J+1)^2
double term_value(double b, double d, int j);

// nu0 + F_upper(J') - F_lower(J''); J' = J''+1 (R) or J''-1 (P).
// P(0) is rejected.
double line_position(const MoleculeSpec& m, Branch branch, int j_lower);

// g_ns (2J''+1) exp(-c2 F_lower(J'') / T) * Honl-London, unnormalized.
// g_ns = 1 on the allowed parity and beta2_half on the forbidden one.
double raw_strength(const MoleculeSpec& m, Branch branch, int j_lower, double beta2_half);

// raw_strength / normalization (the strongest allowed line of a catalog).
double line_strength(const MoleculeSpec& m, Branch branch, int j_lower, double beta2_half,
                     double normalization);

struct RoVibLine {
  Branch branch = Branch::R;
  int j_lower = 0;
  double position = 0.0;
  double strength = 0.0;
  bool allowed = true;

  bool operator==(const RoVibLine&) const = default;
};

struct BranchSet {
  bool p = false;
  bool r = true;

  bool operator==(const BranchSet&) const = default;
};

struct LineCatalog {
  MoleculeSpec molecule;
  double beta2_half = 0.0;
  double normalization = 1.0;  // raw strength of the strongest allowed line
  std::vector<RoVibLine> lines;  // ascending position

  std::vector<RoVibLine> allowed_lines() const;
  std::vector<RoVibLine> forbidden_lines() const;
  // Content hash over molecule, beta and lines.
  std::uint64_t hash() const;
};

LineCatalog build_catalog(const MoleculeSpec& m, BranchSet branches, int j_max,
                          double beta2_half);

std::string branch_name(Branch b);
std::string line_label(const RoVibLine& l);  // "R(2)"

nlohmann::json to_json(const RoVibLine& l);
nlohmann::json to_json(const LineCatalog& c);
// Header branch,J_lower,position_cm1,strength,allowed. Lines with zero
// strength (forbidden lines at beta2_half = 0) are omitted.
std::string to_csv(const LineCatalog& c);

}  // namespace spinstat::specmodel
