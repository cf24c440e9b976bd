#pragma once

// Permutation symmetry of n-particle states on the n!-dimensional space of
// orderings of n distinct single-particle labels: two-particle S/A states,
// central (isotypic) projectors of S_n for n <= 4, density-matrix mixtures of
// symmetry classes and the superselection check under symmetric dynamics.

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "spinstat/exec.hpp"
#include "spinstat/qfock.hpp"

namespace spinstat::permsym {

using qfock::FockState;
using qfock::Permutation;

inline constexpr double kProjectorTolerance = 1e-10;

// Young diagram: weakly decreasing positive parts.
class Partition {
 public:
  explicit Partition(std::vector<int> parts);

  const std::vector<int>& parts() const { return parts_; }
  int size() const;  // n
  Partition conjugate() const;
  // "[2,1]"
  std::string label() const;

  auto operator<=>(const Partition&) const = default;

 private:
  std::vector<int> parts_;
};

// Partitions of n in reverse lexicographic order: [n], [n-1,1], ..., [1^n].
std::vector<Partition> partitions(int n);

// Cycle type of a permutation as a partition.
Partition cycle_type(const Permutation& p);

// Irreducible character of S_n (n in [1,4]) at the class of the given cycle
// type, read from embedded integer tables.
int character(const Partition& irrep, const Partition& cls);

// Dimension of the irrep: the character at the identity.
int irrep_dimension(const Partition& irrep);

// Slot permutation on the ordering space: |w_0 ... w_{n-1}> maps to the
// word with (M(s) w)_{s(i)} = w_i. Basis index = lexicographic rank of the
// ordering.
Eigen::MatrixXd slot_permutation(const Permutation& s);

// Lexicographic rank of an ordering of {0..n-1}.
std::size_t ordering_index(const Permutation& p);

struct SymmetryProjector {
  Partition partition;
  Eigen::MatrixXd matrix;
};

// P_lambda = (d_lambda / n!) sum_s chi_lambda(s) M(s), one per partition.
// Throws ValidationError for n outside [2, 4].
std::vector<SymmetryProjector> young_projectors(int n);

// Hermitian, PSD, unit-trace. Construction validates.
class DensityMatrix {
 public:
  explicit DensityMatrix(Eigen::MatrixXcd m, double tol = kProjectorTolerance);

  static DensityMatrix pure(const Eigen::VectorXcd& psi);
  static DensityMatrix maximally_mixed(Eigen::Index dim);

  const Eigen::MatrixXcd& matrix() const { return m_; }
  Eigen::Index dim() const { return m_.rows(); }

 private:
  Eigen::MatrixXcd m_;
};

struct ClassWeight {
  Partition partition;
  double weight;
};

struct SymmetryWeights {
  int n = 0;
  std::vector<ClassWeight> classes;  // order of partitions(n)

  double operator[](const Partition& p) const;
  double total() const;
};

SymmetryWeights symmetry_decompose(const DensityMatrix& rho, int n);

// Two-particle states (|ab> +- |ba>)/sqrt2 in the orthonormal word basis.
// Identical labels give a zero antisymmetric state and set `degenerate`;
// the symmetric state is then |aa>.
struct TwoParticleStates {
  FockState symmetric{2};
  FockState antisymmetric{2};
  bool degenerate = false;
};

TwoParticleStates two_particle_states(int a, int b);

// Coefficients of a state over words that are orderings of {0..n-1}, indexed
// by ordering_index. Throws ValidationError for any other word.
Eigen::VectorXcd ordering_vector(const FockState& state);

struct ViolationMixture {
  double beta2_half;
  DensityMatrix rho_s;
  DensityMatrix rho_a;
  DensityMatrix rho;
};

// rho = (1 - x) rho_s + x rho_a. rho_s must lie in the fully symmetric class
// and rho_a in the fully antisymmetric class (SectorError otherwise).
ViolationMixture violation_mixture(double beta2_half, const DensityMatrix& rho_s,
                                   const DensityMatrix& rho_a);

// Maximum over `steps` evenly spaced times in [0, t_max] (and t = 0) of the
// largest |w_lambda(t) - w_lambda(0)| under rho(t) = U rho0 U+,
// U = exp(-iHt). H must commute with every slot permutation.
double superselection_drift(const Eigen::MatrixXcd& h, const DensityMatrix& rho0, double t_max,
                            int steps);

// Group average (1/n!) sum_s M(s) H M(s)^T.
Eigen::MatrixXcd symmetrize(const Eigen::MatrixXcd& h, int n);

// Random Hermitian matrix with Gaussian entries, symmetrized over S_n.
Eigen::MatrixXcd random_symmetric_hamiltonian(int n, std::uint64_t seed);

struct DriftSurvey {
  int n = 0;
  int samples = 0;
  double max_drift = 0.0;
};

// superselection_drift over `samples` random symmetric Hamiltonians
// (seeds derived from master_seed), t_max = 10 / ||H||, maximally mixed
// and random-pure initial states alternating.
DriftSurvey drift_survey(int n, int samples, std::uint64_t master_seed, int steps = 50,
                         Exec exec = Exec::Parallel);

// Squared norm of the antisymmetrized n-quon state sum_s sgn(s) |word(s)>,
// divided by (n!)^2 so that it equals 1 at q = -1 and vanishes at q = 1.
double antisymmetric_sector_norm(int n, qfock::QParameter q);

enum class Statistics { Boson, Fermion };

// Boson iff the total number of constituent fermions is even.
Statistics composite_statistics(int n_protons, int n_neutrons, int n_electrons);

const char* to_string(Statistics s);

nlohmann::json to_json(const SymmetryWeights& w);
// Nested arrays of [re, im] pairs, row-major.
nlohmann::json to_json(const DensityMatrix& rho);
DensityMatrix density_from_json(const nlohmann::json& j);

}  // namespace spinstat::permsym
