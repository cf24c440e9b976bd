// The OpenMP kernels must reproduce their serial references bit for bit,
// whatever the thread count.

#include <doctest.h>

#include <omp.h>

#include "spinstat/calibrate.hpp"
#include "spinstat/permsym.hpp"
#include "spinstat/qfock.hpp"
#include "spinstat/synth.hpp"

using namespace spinstat;

namespace {

struct Threads {
  int saved = omp_get_max_threads();
  explicit Threads(int n) { omp_set_num_threads(n); }
  ~Threads() { omp_set_num_threads(saved); }
};

}  // namespace

TEST_CASE("Gram rows") {
  Threads t(4);
  for (double q : {-0.7, 0.25, 1.0}) {
    const auto a = qfock::gram_matrix(5, qfock::QParameter(q), Exec::Serial);
    const auto b = qfock::gram_matrix(5, qfock::QParameter(q), Exec::Parallel);
    CHECK(a.entries == b.entries);
    CHECK(a.orderings == b.orderings);
  }
}

TEST_CASE("optical depth and noise") {
  Threads t(3);
  const auto cat = specmodel::build_catalog(specmodel::MoleculeSpec{}, {true, true}, 30, 1e-3);
  const auto grid = synth::default_grid(cat, {});
  const auto ts = synth::optical_depth(cat, grid, {}, 0.01, Exec::Serial);
  const auto tp = synth::optical_depth(cat, grid, {}, 0.01, Exec::Parallel);
  CHECK(ts == tp);
  CHECK(synth::noisy_absorbance(ts, 1e4, 42, Exec::Serial) ==
        synth::noisy_absorbance(ts, 1e4, 42, Exec::Parallel));
}

TEST_CASE("drift survey") {
  Threads t(4);
  const auto a = permsym::drift_survey(3, 16, 5, 10, Exec::Serial);
  const auto b = permsym::drift_survey(3, 16, 5, 10, Exec::Parallel);
  CHECK(a.max_drift == b.max_drift);
}

TEST_CASE("Monte-Carlo trials") {
  Threads t(4);
  bounds::Scenario s;
  s.j_max = 6;
  s.beta2_half = 1e-3;
  const auto a = bounds::mc_calibrate(s, 100, Exec::Serial);
  const auto b = bounds::mc_calibrate(s, 100, Exec::Parallel);
  CHECK(a.upper_limit == b.upper_limit);
  CHECK(a.beta2_half_hat == b.beta2_half_hat);
  CHECK(a.coverage == b.coverage);
}
