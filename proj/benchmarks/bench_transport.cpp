#include <benchmark/benchmark.h>

#include <algorithm>
#include <vector>

#include "wbary/random.hpp"
#include "wbary/transport.hpp"

namespace {

using namespace wbary;

DiscreteMeasure cloud(std::mt19937_64& rng, std::size_t dim, std::size_t m) {
  std::vector<double> pts(m * dim);
  for (double& x : pts) x = uniform01(rng);
  std::vector<double> w(m);
  double total = 0.0;
  for (double& v : w) total += (v = 0.1 + uniform01(rng));
  for (double& v : w) v /= total;
  return DiscreteMeasure(dim, std::move(pts), std::move(w));
}

void BM_NetworkSimplex(benchmark::State& state) {
  auto rng = make_stream(1, 0);
  const auto m = static_cast<std::size_t>(state.range(0));
  const auto a = cloud(rng, 2, m);
  const auto b = cloud(rng, 2, m);
  for (auto _ : state) benchmark::DoNotOptimize(w2_exact(a, b).cost);
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_NetworkSimplex)->RangeMultiplier(2)->Range(16, 256)->Complexity();

void BM_Quantile1d(benchmark::State& state) {
  auto rng = make_stream(2, 0);
  const auto m = static_cast<std::size_t>(state.range(0));
  const Measure a = cloud(rng, 1, m);
  const Measure b = cloud(rng, 1, m);
  for (auto _ : state) benchmark::DoNotOptimize(w2_1d(a, b));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Quantile1d)->RangeMultiplier(4)->Range(64, 16384)->Complexity();

void BM_Staircase(benchmark::State& state) {
  auto rng = make_stream(3, 0);
  const auto m = static_cast<std::size_t>(state.range(0));
  auto a = cloud(rng, 1, m);
  auto b = cloud(rng, 1, m);
  std::vector<double> x = a.points(), y = b.points();
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  std::vector<double> phi(m);
  for (auto _ : state) {
    benchmark::DoNotOptimize(w2_sorted_1d(x, a.weights(), y, b.weights(), phi));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Staircase)->RangeMultiplier(4)->Range(64, 16384)->Complexity();

void BM_Assignment(benchmark::State& state) {
  auto rng = make_stream(4, 0);
  const auto n = static_cast<std::size_t>(state.range(0));
  std::vector<double> cost(n * n);
  for (double& c : cost) c = uniform01(rng);
  for (auto _ : state) benchmark::DoNotOptimize(solve_assignment(cost, n).value);
}
BENCHMARK(BM_Assignment)->RangeMultiplier(2)->Range(8, 128);

}  // namespace
