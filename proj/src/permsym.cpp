#include "spinstat/permsym.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include "spinstat/errors.hpp"
#include "spinstat/rng.hpp"

namespace spinstat::permsym {

Partition::Partition(std::vector<int> parts) : parts_(std::move(parts)) {
  if (parts_.empty()) throw ValidationError("partition must have at least one part");
  for (std::size_t i = 0; i < parts_.size(); ++i) {
    if (parts_[i] <= 0) throw ValidationError("partition parts must be positive");
    if (i > 0 && parts_[i] > parts_[i - 1]) {
      throw ValidationError("partition parts must be weakly decreasing");
    }
  }
}

int Partition::size() const { return std::accumulate(parts_.begin(), parts_.end(), 0); }

Partition Partition::conjugate() const {
  std::vector<int> cols(static_cast<std::size_t>(parts_.front()), 0);
  for (int row : parts_)
    for (int c = 0; c < row; ++c) ++cols[static_cast<std::size_t>(c)];
  return Partition(std::move(cols));
}

std::string Partition::label() const {
  std::string s = "[";
  for (std::size_t i = 0; i < parts_.size(); ++i) {
    if (i) s += ',';
    s += std::to_string(parts_[i]);
  }
  return s + "]";
}

namespace {

void partitions_rec(int remaining, int max_part, std::vector<int>& cur,
                    std::vector<Partition>& out) {
  if (remaining == 0) {
    out.emplace_back(cur);
    return;
  }
  for (int p = std::min(remaining, max_part); p >= 1; --p) {
    cur.push_back(p);
    partitions_rec(remaining - p, p, cur, out);
    cur.pop_back();
  }
}

struct CharacterTable {
  std::vector<std::vector<int>> classes;  // cycle types, column order
  std::vector<std::pair<std::vector<int>, std::vector<int>>> rows;  // irrep, values
};

const CharacterTable& table_for(int n) {
  static const std::array<CharacterTable, 5> tables = {{
      {},
      {{{1}}, {{{1}, {1}}}},
      {{{1, 1}, {2}}, {{{2}, {1, 1}}, {{1, 1}, {1, -1}}}},
      {{{1, 1, 1}, {2, 1}, {3}},
       {{{3}, {1, 1, 1}}, {{2, 1}, {2, 0, -1}}, {{1, 1, 1}, {1, -1, 1}}}},
      {{{1, 1, 1, 1}, {2, 1, 1}, {2, 2}, {3, 1}, {4}},
       {{{4}, {1, 1, 1, 1, 1}},
        {{3, 1}, {3, 1, -1, 0, -1}},
        {{2, 2}, {2, 0, 2, -1, 0}},
        {{2, 1, 1}, {3, -1, -1, 0, 1}},
        {{1, 1, 1, 1}, {1, -1, 1, 1, -1}}}},
  }};
  if (n < 1 || n > 4) {
    throw ValidationError("character tables are embedded for n in [1, 4], got " +
                          std::to_string(n));
  }
  return tables[static_cast<std::size_t>(n)];
}

}  // namespace

std::vector<Partition> partitions(int n) {
  if (n < 1) throw ValidationError("partitions: n must be positive");
  std::vector<Partition> out;
  std::vector<int> cur;
  partitions_rec(n, n, cur, out);
  return out;
}

Partition cycle_type(const Permutation& p) {
  std::vector<bool> seen(p.size(), false);
  std::vector<int> lengths;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (seen[i]) continue;
    int len = 0;
    for (std::size_t j = i; !seen[j]; j = static_cast<std::size_t>(p[j])) {
      seen[j] = true;
      ++len;
    }
    lengths.push_back(len);
  }
  std::sort(lengths.rbegin(), lengths.rend());
  return Partition(std::move(lengths));
}

int character(const Partition& irrep, const Partition& cls) {
  if (irrep.size() != cls.size()) throw ValidationError("character: partitions of different n");
  const auto& t = table_for(irrep.size());
  const auto col = std::find(t.classes.begin(), t.classes.end(), cls.parts());
  const auto row = std::find_if(t.rows.begin(), t.rows.end(),
                                [&](const auto& r) { return r.first == irrep.parts(); });
  return row->second[static_cast<std::size_t>(col - t.classes.begin())];
}

int irrep_dimension(const Partition& irrep) {
  return character(irrep, Partition(std::vector<int>(static_cast<std::size_t>(irrep.size()), 1)));
}

std::size_t ordering_index(const Permutation& p) {
  // Lehmer code.
  std::size_t idx = 0;
  const std::size_t n = p.size();
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t smaller = 0;
    for (std::size_t j = i + 1; j < n; ++j)
      if (p[j] < p[i]) ++smaller;
    idx = idx * (n - i) + smaller;
  }
  return idx;
}

Eigen::MatrixXd slot_permutation(const Permutation& s) {
  const auto basis = qfock::permutations(static_cast<int>(s.size()));
  const auto d = static_cast<Eigen::Index>(basis.size());
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(d, d);
  const auto s_inv = qfock::inverse(s);
  for (Eigen::Index col = 0; col < d; ++col) {
    // (M w)_{s(i)} = w_i  <=>  (M w) = w o s^-1
    const auto image = qfock::compose(basis[static_cast<std::size_t>(col)], s_inv);
    m(static_cast<Eigen::Index>(ordering_index(image)), col) = 1.0;
  }
  return m;
}

std::vector<SymmetryProjector> young_projectors(int n) {
  if (n < 2 || n > 4) {
    throw ValidationError("young_projectors: n must lie in [2, 4], got " + std::to_string(n));
  }
  const auto group = qfock::permutations(n);
  const double order = static_cast<double>(group.size());
  const auto d = static_cast<Eigen::Index>(group.size());

  std::vector<Eigen::MatrixXd> mats;
  std::vector<Partition> types;
  mats.reserve(group.size());
  for (const auto& s : group) {
    mats.push_back(slot_permutation(s));
    types.push_back(cycle_type(s));
  }

  std::vector<SymmetryProjector> out;
  for (const auto& lambda : partitions(n)) {
    Eigen::MatrixXd p = Eigen::MatrixXd::Zero(d, d);
    for (std::size_t i = 0; i < group.size(); ++i) p += character(lambda, types[i]) * mats[i];
    p *= irrep_dimension(lambda) / order;
    out.push_back({lambda, std::move(p)});
  }
  return out;
}

namespace {

int particles_for_dim(Eigen::Index dim) {
  Eigen::Index f = 1;
  for (int n = 1; n <= 8; ++n) {
    f *= n;
    if (f == dim) return n;
    if (f > dim) break;
  }
  throw ValidationError("dimension " + std::to_string(dim) + " is not n! for a supported n");
}

const std::vector<SymmetryProjector>& cached_projectors(int n) {
  static const std::array<std::vector<SymmetryProjector>, 3> cache = {
      young_projectors(2), young_projectors(3), young_projectors(4)};
  if (n < 2 || n > 4) {
    throw ValidationError("symmetry classes are available for n in [2, 4], got " +
                          std::to_string(n));
  }
  return cache[static_cast<std::size_t>(n - 2)];
}

SymmetryWeights weights_of(const Eigen::MatrixXcd& rho, int n) {
  SymmetryWeights w;
  w.n = n;
  for (const auto& p : cached_projectors(n)) {
    const double tr = (p.matrix.cast<std::complex<double>>() * rho).trace().real();
    w.classes.push_back({p.partition, tr});
  }
  return w;
}

}  // namespace

DensityMatrix::DensityMatrix(Eigen::MatrixXcd m, double tol) : m_(std::move(m)) {
  if (m_.rows() == 0 || m_.rows() != m_.cols()) {
    throw ValidationError("density matrix must be square and non-empty");
  }
  if ((m_ - m_.adjoint()).cwiseAbs().maxCoeff() > tol) {
    throw ValidationError("density matrix is not Hermitian");
  }
  if (std::abs(m_.trace() - std::complex<double>(1.0)) > 1e-12) {
    throw ValidationError("density matrix trace differs from 1");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m_, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -tol) {
    throw ValidationError("density matrix has a negative eigenvalue");
  }
}

DensityMatrix DensityMatrix::pure(const Eigen::VectorXcd& psi) {
  const double norm = psi.norm();
  if (norm == 0.0) throw ValidationError("cannot build a pure state from the zero vector");
  const Eigen::VectorXcd v = psi / norm;
  return DensityMatrix(v * v.adjoint());
}

DensityMatrix DensityMatrix::maximally_mixed(Eigen::Index dim) {
  return DensityMatrix(Eigen::MatrixXcd::Identity(dim, dim) / static_cast<double>(dim));
}

double SymmetryWeights::operator[](const Partition& p) const {
  for (const auto& c : classes)
    if (c.partition == p) return c.weight;
  throw ValidationError("no symmetry class " + p.label() + " for n = " + std::to_string(n));
}

double SymmetryWeights::total() const {
  double s = 0.0;
  for (const auto& c : classes) s += c.weight;
  return s;
}

SymmetryWeights symmetry_decompose(const DensityMatrix& rho, int n) {
  const auto expected = static_cast<Eigen::Index>(qfock::permutations(n).size());
  if (n < 2 || n > 4 || rho.dim() != expected) {
    throw ValidationError("symmetry_decompose: density matrix of dimension " +
                          std::to_string(rho.dim()) + " does not act on the n = " +
                          std::to_string(n) + " ordering space");
  }
  return weights_of(rho.matrix(), n);
}

TwoParticleStates two_particle_states(int a, int b) {
  if (a < 0 || b < 0) throw ValidationError("single-particle labels must be non-negative");
  TwoParticleStates out;
  const double h = 1.0 / std::sqrt(2.0);
  out.antisymmetric.add({a, b}, h);
  out.antisymmetric.add({b, a}, -h);
  if (a == b) {
    out.degenerate = true;
    out.symmetric.add({a, a}, 1.0);
  } else {
    out.symmetric.add({a, b}, h);
    out.symmetric.add({b, a}, h);
  }
  return out;
}

Eigen::VectorXcd ordering_vector(const FockState& state) {
  const auto n = static_cast<int>(state.particles());
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(qfock::permutations(n).size()));
  if (state.is_zero()) return v;

  std::vector<int> labels = state.terms().begin()->first.modes;
  std::sort(labels.begin(), labels.end());
  if (std::adjacent_find(labels.begin(), labels.end()) != labels.end()) {
    throw ValidationError("ordering_vector: words must use distinct labels");
  }
  for (const auto& [w, c] : state.terms()) {
    auto sorted = w.modes;
    std::sort(sorted.begin(), sorted.end());
    if (sorted != labels) throw ValidationError("ordering_vector: words use different label sets");
    Permutation p(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) {
      p[i] = static_cast<int>(std::lower_bound(labels.begin(), labels.end(), w.modes[i]) -
                              labels.begin());
    }
    v(static_cast<Eigen::Index>(ordering_index(p))) += c;
  }
  return v;
}

ViolationMixture violation_mixture(double beta2_half, const DensityMatrix& rho_s,
                                   const DensityMatrix& rho_a) {
  if (!(beta2_half >= 0.0 && beta2_half <= 1.0)) {
    throw ValidationError("beta2_half must lie in [0, 1]");
  }
  if (rho_s.dim() != rho_a.dim()) throw ValidationError("rho_s and rho_a differ in dimension");
  const int n = particles_for_dim(rho_s.dim());
  const auto ws = symmetry_decompose(rho_s, n);
  const auto wa = symmetry_decompose(rho_a, n);
  const Partition sym({n});
  const Partition anti(std::vector<int>(static_cast<std::size_t>(n), 1));
  if (ws[sym] < 1.0 - kProjectorTolerance) {
    throw SectorError("rho_s has weight " + std::to_string(1.0 - ws[sym]) +
                      " outside the symmetric class");
  }
  if (wa[anti] < 1.0 - kProjectorTolerance) {
    throw SectorError("rho_a has weight " + std::to_string(1.0 - wa[anti]) +
                      " outside the antisymmetric class");
  }
  DensityMatrix rho((1.0 - beta2_half) * rho_s.matrix() + beta2_half * rho_a.matrix());
  return {beta2_half, rho_s, rho_a, std::move(rho)};
}

double superselection_drift(const Eigen::MatrixXcd& h, const DensityMatrix& rho0, double t_max,
                            int steps) {
  if (steps < 1) throw ValidationError("superselection_drift: steps must be >= 1");
  if (h.rows() != rho0.dim() || h.cols() != rho0.dim()) {
    throw ValidationError("superselection_drift: H and rho0 differ in dimension");
  }
  const double scale = std::max(1.0, h.cwiseAbs().maxCoeff());
  if ((h - h.adjoint()).cwiseAbs().maxCoeff() > kProjectorTolerance * scale) {
    throw ValidationError("superselection_drift: H is not Hermitian");
  }
  const int n = particles_for_dim(rho0.dim());
  for (const auto& s : qfock::permutations(n)) {
    const Eigen::MatrixXcd m = slot_permutation(s).cast<std::complex<double>>();
    if ((h * m - m * h).cwiseAbs().maxCoeff() > kProjectorTolerance * scale) {
      throw CommutationError("H does not commute with every slot permutation");
    }
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
  const Eigen::MatrixXcd& v = es.eigenvectors();
  const Eigen::VectorXd& e = es.eigenvalues();
  const Eigen::MatrixXcd rho_eig = v.adjoint() * rho0.matrix() * v;

  const auto w0 = weights_of(rho0.matrix(), n);
  double drift = 0.0;
  const Eigen::Index d = rho0.dim();
  for (int k = 0; k <= steps; ++k) {
    const double t = t_max * static_cast<double>(k) / steps;
    Eigen::MatrixXcd rt(d, d);
    for (Eigen::Index i = 0; i < d; ++i)
      for (Eigen::Index j = 0; j < d; ++j)
        rt(i, j) = rho_eig(i, j) * std::polar(1.0, -(e(i) - e(j)) * t);
    const auto wt = weights_of(v * rt * v.adjoint(), n);
    for (std::size_t c = 0; c < wt.classes.size(); ++c) {
      drift = std::max(drift, std::abs(wt.classes[c].weight - w0.classes[c].weight));
    }
  }
  return drift;
}

Eigen::MatrixXcd symmetrize(const Eigen::MatrixXcd& h, int n) {
  const auto group = qfock::permutations(n);
  Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(h.rows(), h.cols());
  for (const auto& s : group) {
    const Eigen::MatrixXcd m = slot_permutation(s).cast<std::complex<double>>();
    acc += m * h * m.transpose();
  }
  return acc / static_cast<double>(group.size());
}

Eigen::MatrixXcd random_symmetric_hamiltonian(int n, std::uint64_t seed) {
  const auto d = static_cast<Eigen::Index>(qfock::permutations(n).size());
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> normal;
  Eigen::MatrixXcd a(d, d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) a(i, j) = {normal(gen), normal(gen)};
  const Eigen::MatrixXcd h = 0.5 * (a + a.adjoint());
  Eigen::MatrixXcd hs = symmetrize(h, n);
  return 0.5 * (hs + hs.adjoint());
}

namespace {

double one_drift_sample(int n, std::uint64_t master_seed, int i, int steps) {
  const auto seed = derive_seed(master_seed, static_cast<std::uint64_t>(i));
  const auto h = random_symmetric_hamiltonian(n, seed);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h, Eigen::EigenvaluesOnly);
  const double norm = es.eigenvalues().cwiseAbs().maxCoeff();
  const double t_max = 10.0 / std::max(norm, 1e-300);

  const Eigen::Index d = h.rows();
  if (i % 2 == 0) return superselection_drift(h, DensityMatrix::maximally_mixed(d), t_max, steps);
  std::mt19937_64 gen(splitmix64(seed));
  std::normal_distribution<double> normal;
  Eigen::VectorXcd psi(d);
  for (Eigen::Index k = 0; k < d; ++k) psi(k) = {normal(gen), normal(gen)};
  return superselection_drift(h, DensityMatrix::pure(psi), t_max, steps);
}

}  // namespace

DriftSurvey drift_survey(int n, int samples, std::uint64_t master_seed, int steps, Exec exec) {
  std::vector<double> drifts(static_cast<std::size_t>(std::max(samples, 0)), 0.0);
  if (exec == Exec::Serial) {
    for (int i = 0; i < samples; ++i)
      drifts[static_cast<std::size_t>(i)] = one_drift_sample(n, master_seed, i, steps);
  } else {
#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < samples; ++i)
      drifts[static_cast<std::size_t>(i)] = one_drift_sample(n, master_seed, i, steps);
  }
  DriftSurvey out;
  out.n = n;
  out.samples = samples;
  for (double d : drifts) out.max_drift = std::max(out.max_drift, d);
  return out;
}

double antisymmetric_sector_norm(int n, qfock::QParameter q) {
  FockState state(static_cast<std::size_t>(n));
  double count = 0.0;
  for (const auto& p : qfock::permutations(n)) {
    state.add(qfock::FockWord(p), qfock::inversions(p) % 2 ? -1.0 : 1.0);
    count += 1.0;
  }
  return qfock::state_norm2(state, q) / (count * count);
}

Statistics composite_statistics(int n_protons, int n_neutrons, int n_electrons) {
  if (n_protons < 0 || n_neutrons < 0 || n_electrons < 0) {
    throw ValidationError("constituent counts must be non-negative");
  }
  const long total = static_cast<long>(n_protons) + n_neutrons + n_electrons;
  return total % 2 == 0 ? Statistics::Boson : Statistics::Fermion;
}

const char* to_string(Statistics s) { return s == Statistics::Boson ? "boson" : "fermion"; }

nlohmann::json to_json(const SymmetryWeights& w) {
  nlohmann::json weights = nlohmann::json::object();
  for (const auto& c : w.classes) weights[c.partition.label()] = c.weight;
  return {{"n", w.n}, {"weights", std::move(weights)}};
}

nlohmann::json to_json(const DensityMatrix& rho) {
  nlohmann::json rows = nlohmann::json::array();
  const auto& m = rho.matrix();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back({m(i, j).real(), m(i, j).imag()});
    rows.push_back(std::move(row));
  }
  return rows;
}

DensityMatrix density_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.empty()) throw ValidationError("density matrix JSON must be a nested array");
  const auto d = static_cast<Eigen::Index>(j.size());
  Eigen::MatrixXcd m(d, d);
  for (Eigen::Index r = 0; r < d; ++r) {
    const auto& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != d) {
      throw ValidationError("density matrix JSON rows must have equal length");
    }
    for (Eigen::Index c = 0; c < d; ++c) {
      const auto& e = row[static_cast<std::size_t>(c)];
      if (e.is_number()) {
        m(r, c) = e.get<double>();
      } else if (e.is_array() && e.size() == 2) {
        m(r, c) = {e[0].get<double>(), e[1].get<double>()};
      } else {
        throw ValidationError("density matrix entries must be numbers or [re, im] pairs");
      }
    }
  }
  return DensityMatrix(std::move(m));
}

}  // namespace spinstat::permsym
