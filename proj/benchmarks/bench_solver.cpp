#include <benchmark/benchmark.h>

#include <vector>

#include "wbary/experiments.hpp"
#include "wbary/random.hpp"
#include "wbary/solver.hpp"

namespace {

using namespace wbary;

void BM_ProjectSimplex(benchmark::State& state) {
  auto rng = make_stream(5, 0);
  const auto n = static_cast<std::size_t>(state.range(0));
  std::vector<double> v(n);
  for (double& x : v) x = 2.0 * uniform01(rng) - 0.5;
  const double h = 1.0 / static_cast<double>(n);
  for (auto _ : state) benchmark::DoNotOptimize(project_simplex(v, 1e-6, h));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_ProjectSimplex)->RangeMultiplier(4)->Range(64, 16384)->Complexity();

BarycenterProblem reference_problem(std::size_t n, std::size_t cells) {
  const auto model = RandomMeasureModel::gaussian(cells, 0.5, 0.15, 1);
  auto rng = make_stream(1, 0);
  BarycenterProblem p;
  for (const auto& d : model.draw(n, rng)) p.measures.push_back(grid_to_discrete(d));
  p.gamma = 0.1;
  p.penalty = Penalty::entropy(1e-6);
  p.shape = {cells};
  return p;
}

void BM_ObjectiveEvaluation(benchmark::State& state) {
  const auto p = reference_problem(8, static_cast<std::size_t>(state.range(0)));
  const BarycenterObjective obj(p);
  const auto f = GridDensity::uniform(p.domain, p.shape);
  for (auto _ : state) benchmark::DoNotOptimize(obj.evaluate(f).value);
}
BENCHMARK(BM_ObjectiveEvaluation)->RangeMultiplier(2)->Range(64, 512);

void BM_Solve1d(benchmark::State& state) {
  const auto p = reference_problem(static_cast<std::size_t>(state.range(0)), 128);
  for (auto _ : state) {
    const auto sol = solve(p, SolverConfig{});
    benchmark::DoNotOptimize(sol.density.values().data());
    state.counters["iterations"] = static_cast<double>(sol.iterations);
  }
}
BENCHMARK(BM_Solve1d)->Arg(4)->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_Solve2d(benchmark::State& state) {
  auto rng = make_stream(6, 0);
  BarycenterProblem p;
  for (int i = 0; i < 4; ++i) {
    std::vector<double> pts(2 * 20);
    for (double& x : pts) x = uniform01(rng);
    p.measures.push_back(DiscreteMeasure::uniform(2, std::move(pts)));
  }
  p.gamma = 0.1;
  p.penalty = Penalty::sobolev(1, 1e-6);
  p.domain = BoxDomain::unit(2);
  const auto side = static_cast<std::size_t>(state.range(0));
  p.shape = {side, side};
  SolverConfig cfg;
  cfg.max_iters = 100;
  for (auto _ : state) benchmark::DoNotOptimize(solve(p, cfg).density.values().data());
}
BENCHMARK(BM_Solve2d)->Arg(6)->Arg(10)->Unit(benchmark::kMillisecond);

}  // namespace
