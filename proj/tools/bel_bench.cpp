// Serial reference path against the OpenMP path for the node-wise kernels.
// Arg 0 selects Exec::serial, arg 1 Exec::parallel.

#include <benchmark/benchmark.h>

#include <cmath>

#include "bel/construction.hpp"
#include "bel/pfunction.hpp"

using namespace bel;

namespace {

Exec exec_of(const benchmark::State& state) { return state.range(0) == 0 ? Exec::serial : Exec::parallel; }

const ExampleManifold& example() {
  static const auto ex = build_example(3, 0.5);
  return ex;
}

const SolutionProfile& theorem_solution() {
  static const auto s = solve_radial(example().manifold, 5.0, 1.0, 1000.0);
  return s;
}

void BM_curvature_report(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(curvature_report(example().manifold, 5.0, exec_of(state)));
}

void BM_pohozaev_trace(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(pohozaev_trace(theorem_solution(), 1e-8, 1e-8, exec_of(state)));
}

void BM_condition_checks(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(condition_checks(example().manifold, exec_of(state)));
}

void BM_solve_many(benchmark::State& state) {
  std::vector<double> p, ell;
  for (double pi : {3.0, 4.0, 5.0, 6.0}) {
    for (double li : {0.5, 1.0, 2.0, 4.0}) p.push_back(pi), ell.push_back(li);
  }
  for (auto _ : state) benchmark::DoNotOptimize(solve_many(example().manifold, p, ell, 1000.0, {}, exec_of(state)));
}

void BM_integral_estimate_sweep(benchmark::State& state) {
  static const auto data = v_transform(bubble(4, 0.125));
  std::vector<double> radii;
  for (int k = 0; k <= 20; ++k) radii.push_back(std::pow(10.0, k / 10.0));
  for (auto _ : state) benchmark::DoNotOptimize(integral_estimate_sweep(data, 2.0, radii, exec_of(state)));
}

}  // namespace

BENCHMARK(BM_curvature_report)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_pohozaev_trace)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_condition_checks)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_solve_many)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_integral_estimate_sweep)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
