#include <benchmark/benchmark.h>

#include <cmath>
#include <cstddef>
#include <random>
#include <vector>

#include "modsig/graph.hpp"
#include "modsig/modularity.hpp"
#include "modsig/null_model.hpp"
#include "modsig/sim.hpp"

namespace {

struct Setup {
  modsig::PiVector pi;
  modsig::CommunityAssignment groups;
};

// Expected degrees spaced geometrically over [10, 100], five groups.
Setup make_setup(std::size_t n) {
  std::vector<double> ed(n);
  for (std::size_t i = 0; i < n; ++i) {
    ed[i] = 10.0 * std::pow(10.0, static_cast<double>(i) / static_cast<double>(n - 1));
  }
  double total = 0.0;
  for (double d : ed) total += d;
  std::vector<double> pi(n);
  for (std::size_t i = 0; i < n; ++i) pi[i] = ed[i] / std::sqrt(total);
  std::mt19937_64 rng(11);
  std::vector<std::size_t> codes(n);
  for (std::size_t i = 0; i < n; ++i) codes[i] = rng() % 5;
  return {modsig::PiVector(std::move(pi)), modsig::CommunityAssignment::from_codes(codes)};
}

void BM_BiasFactorized(benchmark::State& state) {
  const Setup s = make_setup(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(modsig::bias_hat(s.pi, s.groups));
  state.SetComplexityN(state.range(0));
}

void BM_BiasPairLoop(benchmark::State& state) {
  const Setup s = make_setup(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(modsig::reference::bias_hat(s.pi, s.groups));
  state.SetComplexityN(state.range(0));
}

void BM_VarianceFactorized(benchmark::State& state) {
  const Setup s = make_setup(static_cast<std::size_t>(state.range(0)));
  const auto m = modsig::EdgeModel::poisson();
  for (auto _ : state) benchmark::DoNotOptimize(modsig::variance_hat(s.pi, m, s.groups));
  state.SetComplexityN(state.range(0));
}

void BM_VariancePairLoop(benchmark::State& state) {
  const Setup s = make_setup(static_cast<std::size_t>(state.range(0)));
  const auto m = modsig::EdgeModel::poisson();
  for (auto _ : state) {
    benchmark::DoNotOptimize(modsig::reference::variance_hat(s.pi, m, s.groups));
  }
  state.SetComplexityN(state.range(0));
}

void BM_SampleGraph(benchmark::State& state) {
  const Setup s = make_setup(static_cast<std::size_t>(state.range(0)));
  const auto m = state.range(1) == 0 ? modsig::EdgeModel::poisson() : modsig::EdgeModel::negbin(2.0);
  std::uint64_t seed = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(modsig::sample_graph(s.pi, m, seed++).num_edges());
  }
}

}  // namespace

BENCHMARK(BM_BiasFactorized)->RangeMultiplier(4)->Range(256, 16384)->Complexity();
BENCHMARK(BM_BiasPairLoop)->RangeMultiplier(4)->Range(256, 4096)->Complexity();
BENCHMARK(BM_VarianceFactorized)->RangeMultiplier(4)->Range(256, 16384)->Complexity();
BENCHMARK(BM_VariancePairLoop)->RangeMultiplier(4)->Range(256, 4096)->Complexity();
BENCHMARK(BM_SampleGraph)->Args({500, 0})->Args({500, 1})->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
