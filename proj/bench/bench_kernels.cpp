// Serial reference against the OpenMP path for each parallel kernel.
// Arg(0) is serial, Arg(1) parallel.

#include <benchmark/benchmark.h>

#include "spinstat/calibrate.hpp"
#include "spinstat/permsym.hpp"
#include "spinstat/qfock.hpp"
#include "spinstat/synth.hpp"

using namespace spinstat;

namespace {

Exec exec_of(const benchmark::State& state) { return state.range(0) ? Exec::Parallel : Exec::Serial; }

void BM_gram(benchmark::State& state) {
  const auto exec = exec_of(state);
  for (auto _ : state) benchmark::DoNotOptimize(qfock::gram_matrix(6, qfock::QParameter(0.3), exec));
}

void BM_optical_depth(benchmark::State& state) {
  const auto exec = exec_of(state);
  const auto cat = specmodel::build_catalog(specmodel::MoleculeSpec{}, {true, true}, 40, 1e-3);
  const auto grid = synth::default_grid(cat, {});
  for (auto _ : state) benchmark::DoNotOptimize(synth::optical_depth(cat, grid, {}, 0.01, exec));
  state.counters["points"] = static_cast<double>(grid.size());
}

void BM_noise(benchmark::State& state) {
  const auto exec = exec_of(state);
  const auto cat = specmodel::build_catalog(specmodel::MoleculeSpec{}, {true, true}, 40, 1e-3);
  const auto tau = synth::optical_depth(cat, synth::default_grid(cat, {}), {}, 0.01, Exec::Serial);
  for (auto _ : state) benchmark::DoNotOptimize(synth::noisy_absorbance(tau, 1e4, 42, exec));
}

void BM_drift_survey(benchmark::State& state) {
  const auto exec = exec_of(state);
  for (auto _ : state) benchmark::DoNotOptimize(permsym::drift_survey(3, 100, 2024, 10, exec));
}

void BM_mc_calibrate(benchmark::State& state) {
  const auto exec = exec_of(state);
  bounds::Scenario s;
  s.j_max = 8;
  for (auto _ : state) benchmark::DoNotOptimize(bounds::mc_calibrate(s, 100, exec));
}

}  // namespace

BENCHMARK(BM_gram)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_optical_depth)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_noise)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_drift_survey)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_mc_calibrate)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond)->Iterations(1);

BENCHMARK_MAIN();
