#include <doctest.h>

#include <cmath>

#include "spinstat/calibrate.hpp"
#include "spinstat/errors.hpp"

using namespace spinstat;
using namespace spinstat::bounds;

namespace {

Scenario small_scenario() {
  Scenario s;
  s.j_max = 8;
  return s;
}

}  // namespace

TEST_CASE("scenario validation") {
  auto bad = [](auto mutate) {
    Scenario s;
    mutate(s);
    return s;
  };
  CHECK_NOTHROW(Scenario{}.validate());
  CHECK_THROWS_AS(bad([](Scenario& s) { s.beta2_half = 2.0; }).validate(), ValidationError);
  CHECK_THROWS_AS(bad([](Scenario& s) { s.snr = 0.0; }).validate(), ValidationError);
  CHECK_THROWS_AS(bad([](Scenario& s) { s.n_average = 0; }).validate(), ValidationError);
  CHECK_THROWS_AS(bad([](Scenario& s) { s.cl = 1.0; }).validate(), ValidationError);
  CHECK_THROWS_AS(bad([](Scenario& s) { s.grid_min = 10.0; s.grid_max = 5.0; }).validate(),
                  ValidationError);
  CHECK_THROWS_AS(bad([](Scenario& s) { s.baseline_degree = -1; }).validate(), ValidationError);
  CHECK_THROWS_AS(bad([](Scenario& s) { s.molecule.temperature = 0.0; }).validate(),
                  ValidationError);
  // An explicit grid that misses lines is a range error.
  CHECK_THROWS_AS(prepare(bad([](Scenario& s) { s.grid_min = 4990.0; s.grid_max = 5001.0; })),
                  RangeError);
}

TEST_CASE("median") {
  CHECK(median({3.0, 1.0, 2.0}) == 2.0);
  CHECK(median({4.0, 1.0, 2.0, 3.0}) == 2.5);
  CHECK(std::isnan(median({})));
}

TEST_CASE("replica averaging reduces the noise") {
  auto s = small_scenario();
  const auto p1 = prepare(s);
  s.n_average = 16;
  const auto p16 = prepare(s);
  auto rms = [](const synth::Spectrum& sp, const std::vector<double>& tau) {
    double acc = 0.0;
    for (std::size_t i = 0; i < tau.size(); ++i) acc += std::pow(sp.absorbance[i] - tau[i], 2);
    return std::sqrt(acc / static_cast<double>(tau.size()));
  };
  const double r1 = rms(simulate(p1, 3), p1.tau);
  const double r16 = rms(simulate(p16, 3), p16.tau);
  CHECK(r1 / r16 == doctest::Approx(4.0).epsilon(0.05));
  CHECK(simulate(p16, 3).meta.n_average == 16);
}

TEST_CASE("coverage at zero and at a small injected value") {
  for (double beta : {0.0, 1e-3}) {
    auto s = small_scenario();
    s.beta2_half = beta;
    const auto rep = mc_calibrate(s, 200);
    CHECK(rep.failures == 0);
    CHECK(rep.n_trials == 200);
    CHECK(rep.coverage_threshold == doctest::Approx(0.95 - 3.0 * std::sqrt(0.95 * 0.05 / 200)));
    CHECK(rep.coverage_ok);
    CHECK(rep.beta2_half_hat.size() == 200);
    if (beta > 0.0) {
      CHECK(rep.median_upper_limit >= beta);
      CHECK(rep.median_beta2_half_hat == doctest::Approx(beta).epsilon(0.2));
    }
  }
}

TEST_CASE("doubling snr halves the median limit") {
  auto s = small_scenario();
  const auto a = mc_calibrate(s, 100);
  s.snr *= 2.0;
  const auto b = mc_calibrate(s, 100);
  CHECK(a.median_upper_limit / b.median_upper_limit == doctest::Approx(2.0).epsilon(0.2));
}

TEST_CASE("calibration is exec-independent and seeded") {
  const auto s = small_scenario();
  const auto a = mc_calibrate(s, 100, Exec::Serial);
  const auto b = mc_calibrate(s, 100, Exec::Parallel);
  CHECK(a.upper_limit == b.upper_limit);
  CHECK(a.beta2_half_hat == b.beta2_half_hat);
  auto other = s;
  other.seed = 43;
  CHECK(mc_calibrate(other, 100).upper_limit != a.upper_limit);
  CHECK_THROWS_AS(mc_calibrate(s, 99), ValidationError);
}

TEST_CASE("unfittable trials raise a calibration error") {
  // Noise so large that the fitted intensity scale is often driven to zero.
  auto s = small_scenario();
  s.snr = 1.0;
  s.column = 1e-6;
  CHECK_THROWS_AS(mc_calibrate(s, 100), CalibrationError);
}

TEST_CASE("report JSON") {
  auto s = small_scenario();
  const auto rep = mc_calibrate(s, 100);
  const auto j = to_json(rep);
  CHECK(j.at("n_trials") == 100);
  CHECK(j.at("coverage_ok").get<bool>() == rep.coverage_ok);
}
