#pragma once

// q-deformed Fock space. Creation/annihilation operators obey
//   a_k a+_l - q a+_l a_k = delta_kl,   a_k |0> = 0,   -1 <= q <= 1,
// interpolating between fermions (q = -1) and bosons (q = +1).

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "spinstat/exec.hpp"

namespace spinstat::qfock {

inline constexpr int kDefaultMaxParticles = 6;
inline constexpr double kEigenTolerance = 1e-10;

class QParameter {
 public:
  explicit QParameter(double q);

  double value() const { return q_; }
  // True for q in {-1, 0, 1}, where contractions are evaluated in integers.
  bool is_integral() const { return q_ == -1.0 || q_ == 0.0 || q_ == 1.0; }

 private:
  double q_;
};

// a+_{modes[0]} a+_{modes[1]} ... |0>. Empty word is the vacuum.
struct FockWord {
  std::vector<int> modes;

  FockWord() = default;
  FockWord(std::initializer_list<int> m) : modes(m) {}
  explicit FockWord(std::vector<int> m) : modes(std::move(m)) {}

  std::size_t size() const { return modes.size(); }
  auto operator<=>(const FockWord&) const = default;
};

// Linear combination of words with a common particle number.
class FockState {
 public:
  using Terms = std::map<FockWord, std::complex<double>>;

  explicit FockState(std::size_t particles) : n_(particles) {}

  // Accumulates c into the coefficient of w; throws ValidationError when
  // w.size() differs from the particle number. Zero coefficients are pruned.
  void add(const FockWord& w, std::complex<double> c);

  std::size_t particles() const { return n_; }
  const Terms& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }

  FockState& operator*=(std::complex<double> s);

 private:
  std::size_t n_;
  Terms terms_;
};

// Integer polynomial in q, coefficient k counts the contraction paths that
// pick up q^k when the annihilators of `bra` are normal-ordered through the
// creators of `ket`. Empty when the words cannot contract.
using QPolynomial = std::vector<std::int64_t>;

QPolynomial contraction_polynomial(const FockWord& bra, const FockWord& ket);
double evaluate(const QPolynomial& p, double q);

// <bra|ket> with <bra| = <0| a_{bra(n)} ... a_{bra(1)}. Words of unequal
// length give 0.
double inner_product(const FockWord& bra, const FockWord& ket, QParameter q);

// Same value in exact integer arithmetic; nullopt unless q is -1, 0 or 1.
std::optional<std::int64_t> inner_product_exact(const FockWord& bra, const FockWord& ket,
                                                QParameter q);

std::complex<double> inner_product(const FockState& bra, const FockState& ket, QParameter q);
double state_norm2(const FockState& state, QParameter q);

// --- permutations ---------------------------------------------------------

using Permutation = std::vector<int>;

// All permutations of {0..n-1} in lexicographic order.
std::vector<Permutation> permutations(int n);
// Pairs i < j with p[i] > p[j].
int inversions(std::span<const int> p);
Permutation inverse(std::span<const int> p);
// (a * b)(i) = a(b(i)).
Permutation compose(std::span<const int> a, std::span<const int> b);

// --- Gram matrix and positivity -------------------------------------------

struct GramMatrix {
  int n = 0;
  double q = 0.0;
  std::vector<Permutation> orderings;  // row/column labels
  Eigen::MatrixXd entries;
};

// entries(s, t) = inner_product(word(s), word(t), q) over n distinct modes,
// word(s) = (s[0], ..., s[n-1]). Throws SizeError for n outside [1, max_n].
GramMatrix gram_matrix(int n, QParameter q, Exec exec = Exec::Parallel,
                       int max_n = kDefaultMaxParticles);

struct PositivityReport {
  int n = 0;
  double q = 0.0;
  double min_eigenvalue = 0.0;
  double tolerance = kEigenTolerance;
  bool is_psd = false;
};

PositivityReport check_positivity(int n, QParameter q, double tol = kEigenTolerance,
                                  int max_n = kDefaultMaxParticles);

// Hook for a model-specific relation between q and the violation parameter.
// Nothing is registered by default.
using ViolationMap = std::function<double(QParameter)>;

nlohmann::json to_json(const PositivityReport& r);
nlohmann::json to_json(const GramMatrix& g);
// Row-major entries, one matrix row per line.
std::string to_csv(const GramMatrix& g);

}  // namespace spinstat::qfock
