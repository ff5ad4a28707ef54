#include <benchmark/benchmark.h>

#include <random>

#include "dds/cluster.hpp"
#include "dds/diffusion.hpp"

namespace {

Eigen::MatrixXd random_features(int n, int c, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd f(n, c);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < c; ++j) f(i, j) = normal(rng);
  return f;
}

void BM_BuildGraph(benchmark::State& state) {
  const auto f = random_features(static_cast<int>(state.range(0)), 16, 7);
  for (auto _ : state) benchmark::DoNotOptimize(dds::build_graph(f));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_BuildGraph)->RangeMultiplier(2)->Range(250, 2000)->Complexity();

void BM_DiffuseIterative(benchmark::State& state) {
  const auto f = random_features(static_cast<int>(state.range(0)), 16, 7);
  const auto g = dds::build_graph(f);
  dds::DiffusionCfg cfg;
  cfg.max_iters = 10;
  cfg.tol = 1e-300;  // force a fixed iteration count
  for (auto _ : state) benchmark::DoNotOptimize(dds::diffuse_iterative(g, f, cfg));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_DiffuseIterative)->RangeMultiplier(2)->Range(250, 2000)->Complexity();

void BM_DiffuseClosedForm(benchmark::State& state) {
  const auto f = random_features(static_cast<int>(state.range(0)), 16, 7);
  const auto g = dds::build_graph(f);
  for (auto _ : state) benchmark::DoNotOptimize(dds::diffuse_closed_form(g, f, 0.5));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_DiffuseClosedForm)->RangeMultiplier(2)->Range(250, 2000)->Complexity();

void BM_GftBaseline(benchmark::State& state) {
  const auto f = random_features(static_cast<int>(state.range(0)), 16, 7);
  const auto g = dds::build_graph(f);
  for (auto _ : state) benchmark::DoNotOptimize(dds::gft_baseline(g, f, 0.25));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_GftBaseline)->RangeMultiplier(2)->Range(250, 2000)->Complexity();

void BM_KMeans(benchmark::State& state) {
  const auto f = random_features(static_cast<int>(state.range(0)), 16, 7);
  for (auto _ : state) benchmark::DoNotOptimize(dds::kmeans(f, 16, 0, 1));
}
BENCHMARK(BM_KMeans)->Range(250, 2000);

}  // namespace

BENCHMARK_MAIN();
