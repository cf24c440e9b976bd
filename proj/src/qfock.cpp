#include "spinstat/qfock.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "spinstat/errors.hpp"
#include "spinstat/format.hpp"

namespace spinstat::qfock {

QParameter::QParameter(double q) : q_(q) {
  if (!(q >= -1.0 && q <= 1.0)) {
    throw ValidationError("q must lie in [-1, 1], got " + std::to_string(q));
  }
}

void FockState::add(const FockWord& w, std::complex<double> c) {
  if (w.size() != n_) {
    throw ValidationError("word of length " + std::to_string(w.size()) +
                          " added to a state with " + std::to_string(n_) + " particles");
  }
  auto [it, inserted] = terms_.try_emplace(w, c);
  if (!inserted) it->second += c;
  if (it->second == std::complex<double>{}) terms_.erase(it);
}

FockState& FockState::operator*=(std::complex<double> s) {
  if (s == std::complex<double>{}) {
    terms_.clear();
    return *this;
  }
  for (auto& [w, c] : terms_) c *= s;
  return *this;
}

namespace {

constexpr std::size_t kMaxWordLength = 62;

void add_shifted(QPolynomial& acc, const QPolynomial& p, std::size_t shift) {
  if (p.empty()) return;
  if (acc.size() < p.size() + shift) acc.resize(p.size() + shift, 0);
  for (std::size_t k = 0; k < p.size(); ++k) acc[k + shift] += p[k];
}

// Normal-orders bra[depth] through the ket creators still present (bits of
// `removed` mark creators already contracted). a_k passing a+_l costs a factor
// q, and contracting with a+_k leaves delta = 1, so the creator at remaining
// position r contributes q^r.
class Contractor {
 public:
  Contractor(const FockWord& bra, const FockWord& ket) : bra_(bra), ket_(ket) {}

  QPolynomial run(std::uint64_t removed) {
    const auto depth = static_cast<std::size_t>(std::popcount(removed));
    if (depth == ket_.size()) return QPolynomial{1};
    if (auto it = memo_.find(removed); it != memo_.end()) return it->second;

    QPolynomial acc;
    const int k = bra_.modes[depth];
    std::size_t passed = 0;
    for (std::size_t j = 0; j < ket_.size(); ++j) {
      if (removed & (std::uint64_t{1} << j)) continue;
      if (ket_.modes[j] == k) {
        add_shifted(acc, run(removed | (std::uint64_t{1} << j)), passed);
      }
      ++passed;
    }
    while (!acc.empty() && acc.back() == 0) acc.pop_back();
    memo_.emplace(removed, acc);
    return acc;
  }

 private:
  const FockWord& bra_;
  const FockWord& ket_;
  std::unordered_map<std::uint64_t, QPolynomial> memo_;
};

}  // namespace

QPolynomial contraction_polynomial(const FockWord& bra, const FockWord& ket) {
  if (bra.size() != ket.size()) return {};
  if (ket.size() > kMaxWordLength) {
    throw SizeError("words longer than " + std::to_string(kMaxWordLength) + " modes");
  }
  return Contractor(bra, ket).run(0);
}

double evaluate(const QPolynomial& p, double q) {
  double acc = 0.0;
  for (auto it = p.rbegin(); it != p.rend(); ++it) acc = acc * q + static_cast<double>(*it);
  return acc;
}

double inner_product(const FockWord& bra, const FockWord& ket, QParameter q) {
  if (q.is_integral()) return static_cast<double>(*inner_product_exact(bra, ket, q));
  return evaluate(contraction_polynomial(bra, ket), q.value());
}

std::optional<std::int64_t> inner_product_exact(const FockWord& bra, const FockWord& ket,
                                                QParameter q) {
  if (!q.is_integral()) return std::nullopt;
  const auto p = contraction_polynomial(bra, ket);
  const auto qi = static_cast<std::int64_t>(q.value());
  std::int64_t acc = 0;
  for (auto it = p.rbegin(); it != p.rend(); ++it) acc = acc * qi + *it;
  return acc;
}

std::complex<double> inner_product(const FockState& bra, const FockState& ket, QParameter q) {
  if (bra.particles() != ket.particles()) return {};
  std::complex<double> acc{};
  for (const auto& [wb, cb] : bra.terms()) {
    for (const auto& [wk, ck] : ket.terms()) {
      acc += std::conj(cb) * ck * inner_product(wb, wk, q);
    }
  }
  return acc;
}

double state_norm2(const FockState& state, QParameter q) {
  return inner_product(state, state, q).real();
}

std::vector<Permutation> permutations(int n) {
  Permutation p(static_cast<std::size_t>(std::max(n, 0)));
  std::iota(p.begin(), p.end(), 0);
  std::vector<Permutation> out;
  do {
    out.push_back(p);
  } while (std::next_permutation(p.begin(), p.end()));
  return out;
}

int inversions(std::span<const int> p) {
  int count = 0;
  for (std::size_t i = 0; i < p.size(); ++i)
    for (std::size_t j = i + 1; j < p.size(); ++j)
      if (p[i] > p[j]) ++count;
  return count;
}

Permutation inverse(std::span<const int> p) {
  Permutation inv(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) inv[static_cast<std::size_t>(p[i])] = static_cast<int>(i);
  return inv;
}

Permutation compose(std::span<const int> a, std::span<const int> b) {
  Permutation out(b.size());
  for (std::size_t i = 0; i < b.size(); ++i) out[i] = a[static_cast<std::size_t>(b[i])];
  return out;
}

namespace {

void fill_gram_row(Eigen::MatrixXd& m, const std::vector<FockWord>& words, QParameter q,
                   Eigen::Index row) {
  for (Eigen::Index col = 0; col < m.cols(); ++col) {
    m(row, col) = inner_product(words[static_cast<std::size_t>(row)],
                                words[static_cast<std::size_t>(col)], q);
  }
}

}  // namespace

GramMatrix gram_matrix(int n, QParameter q, Exec exec, int max_n) {
  if (n < 1 || n > max_n) {
    throw SizeError("gram_matrix: n = " + std::to_string(n) + " outside [1, " +
                    std::to_string(max_n) + "]");
  }
  GramMatrix g;
  g.n = n;
  g.q = q.value();
  g.orderings = permutations(n);
  std::vector<FockWord> words;
  words.reserve(g.orderings.size());
  for (const auto& p : g.orderings) words.emplace_back(p);

  const auto d = static_cast<Eigen::Index>(words.size());
  g.entries.resize(d, d);
  if (exec == Exec::Serial) {
    for (Eigen::Index r = 0; r < d; ++r) fill_gram_row(g.entries, words, q, r);
  } else {
#pragma omp parallel for schedule(dynamic, 8)
    for (Eigen::Index r = 0; r < d; ++r) fill_gram_row(g.entries, words, q, r);
  }
  return g;
}

PositivityReport check_positivity(int n, QParameter q, double tol, int max_n) {
  const auto g = gram_matrix(n, q, Exec::Parallel, max_n);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(g.entries, Eigen::EigenvaluesOnly);
  PositivityReport r;
  r.n = n;
  r.q = q.value();
  r.min_eigenvalue = solver.eigenvalues().minCoeff();
  r.tolerance = tol;
  r.is_psd = r.min_eigenvalue >= -tol;
  return r;
}

nlohmann::json to_json(const PositivityReport& r) {
  return {{"n", r.n},
          {"q", r.q},
          {"min_eigenvalue", r.min_eigenvalue},
          {"tolerance", r.tolerance},
          {"is_psd", r.is_psd}};
}

nlohmann::json to_json(const GramMatrix& g) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index r = 0; r < g.entries.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < g.entries.cols(); ++c) row.push_back(g.entries(r, c));
    rows.push_back(std::move(row));
  }
  return {{"n", g.n}, {"q", g.q}, {"orderings", g.orderings}, {"entries", std::move(rows)}};
}

std::string to_csv(const GramMatrix& g) {
  std::ostringstream os;
  for (Eigen::Index r = 0; r < g.entries.rows(); ++r) {
    for (Eigen::Index c = 0; c < g.entries.cols(); ++c) {
      if (c) os << ',';
      os << format_exact(g.entries(r, c));
    }
    os << '\n';
  }
  return os.str();
}

}  // namespace spinstat::qfock
