// Serial reference vs OpenMP path loop on the same partition.
#include <benchmark/benchmark.h>

#include <numbers>

#include "pathsim/engine.hpp"

using namespace pathsim;

namespace {

struct Workload {
  EhtPtr sigma;
  EpsPtr chain;
};

// Four-qubit Haar circuit with a phase oracle between the two wavelet layers.
const Workload& workload() {
  static const Workload w = [] {
    Circuit c;
    c.norms = NormPair(2.0);
    c.initial = dyad(basis_state(16, 0), basis_state(16, 0));
    const EpsPtr phase = diagonal_unitary(16, [](Index x) { return std::polar(1.0, 2.0 * std::numbers::pi * double(x * x) / 16.0); });
    c.unitaries = {haar_wavelet(4), phase, haar_wavelet(4)};
    c.measurement = as_operator(dyad(basis_state(16, 0), basis_state(16, 0)));
    return Workload{c.initial, expectation_operator(c)};
  }();
  return w;
}

constexpr std::uint64_t kPaths = 200000;

void BM_Serial(benchmark::State& state) {
  const auto& w = workload();
  const unsigned workers = unsigned(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(run_paths_serial(*w.sigma, *w.chain, kPaths, 1, workers).mean());
  state.SetItemsProcessed(std::int64_t(state.iterations() * kPaths));
}

void BM_OpenMP(benchmark::State& state) {
  const auto& w = workload();
  const unsigned workers = unsigned(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(run_paths_parallel(*w.sigma, *w.chain, kPaths, 1, workers).mean());
  state.SetItemsProcessed(std::int64_t(state.iterations() * kPaths));
}

void BM_StepCost(benchmark::State& state) {
  const EpsPtr g = haar_wavelet(int(state.range(0)));
  RngStream rng(3, 0);
  Index m = 0;
  for (auto _ : state) {
    auto t = g->sample_forward(m, rng);
    m = t->next;
    benchmark::DoNotOptimize(t->ratio_p);
  }
}

}  // namespace

BENCHMARK(BM_Serial)->Arg(1)->Arg(2)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_OpenMP)->Arg(1)->Arg(2)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_StepCost)->DenseRange(2, 20, 6);

BENCHMARK_MAIN();
