// Serial reference versus OpenMP execution of the parallel kernels. With
// RUELLE_THREADS unset the parallel variants use the OpenMP default.

#include <benchmark/benchmark.h>

#include <cmath>

#include "ruelle/flows.hpp"
#include "ruelle/quadrature.hpp"
#include "ruelle/toric.hpp"

using namespace ruelle;

namespace {

double smooth(const Point& u) {
  double s = 0.0;
  for (int i = 0; i < u.size(); ++i) s += std::exp(-u(i)) * (1.0 + i * u(i));
  return s;
}

Execution mode(const benchmark::State& state) {
  return state.range(0) == 0 ? Execution::Serial : Execution::Parallel;
}

void BM_SimplexReference(benchmark::State& state) {
  for (auto _ : state) {
    benchmark::DoNotOptimize(integrate_simplex_reference(3, smooth, 24, 8));
  }
}
BENCHMARK(BM_SimplexReference)->Unit(benchmark::kMillisecond);

void BM_SimplexAdaptive(benchmark::State& state) {
  QuadratureSpec spec;
  spec.rel_tol = 1e-10;
  spec.exec = mode(state);
  for (auto _ : state) {
    benchmark::DoNotOptimize(integrate_simplex(3, smooth, spec).value);
  }
}
BENCHMARK(BM_SimplexAdaptive)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_ToricRuelle(benchmark::State& state) {
  const auto region = MomentRegion::pfamily({1.0, 2.0, 3.0}, 0.5);
  QuadratureSpec spec;
  spec.exec = mode(state);
  for (auto _ : state) {
    benchmark::DoNotOptimize(ruelle_invariant_toric(region, spec).value);
  }
}
BENCHMARK(BM_ToricRuelle)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_FlowEstimate(benchmark::State& state) {
  const ToricField field(MomentRegion::pfamily({1.0, 1.0}, 0.5));
  EstimateOptions opts;
  opts.exec = mode(state);
  opts.pilot = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(ruelle_estimate(field, 10.0, 32, 0, opts).estimate);
  }
}
BENCHMARK(BM_FlowEstimate)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
