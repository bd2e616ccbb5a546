#include <benchmark/benchmark.h>

#include "qh/sim/sampler.hpp"
#include "qh/sim/transform.hpp"
#include "qh/verify/fit.hpp"
#include "qh/verify/moments.hpp"

namespace {

using qh::sim::Exec;

const qh::sim::ProcessDescriptor& dirichlet() {
  static const qh::sim::ProcessDescriptor d{qh::sim::DirichletBridge{1.0, 1.0}};
  return d;
}

const qh::sim::PathEnsemble& wiener_ensemble() {
  static const qh::sim::PathEnsemble e =
      qh::sim::sample_ensemble(qh::sim::ProcessDescriptor{qh::sim::Wiener{}}, {1, 2, 3}, 200000, 11);
  return e;
}

void BM_Sample(benchmark::State& state, Exec exec) {
  const std::vector<double> times{0.25, 0.5, 0.75, 1.0};
  for (auto _ : state) {
    auto e = qh::sim::sample_ensemble(dirichlet(), times, static_cast<std::size_t>(state.range(0)), 3, exec);
    benchmark::DoNotOptimize(e.values.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_Transform(benchmark::State& state, Exec exec) {
  const std::vector<double> targets{1, 2};
  const qh::sim::TransformKind kind = qh::sim::DirichletTransform{1, 1};
  const auto e = qh::sim::sample_ensemble(dirichlet(), qh::sim::source_grid(kind, targets), 200000, 5);
  for (auto _ : state) {
    auto y = qh::sim::transform_paths(e, kind, targets, exec);
    benchmark::DoNotOptimize(y.values.data());
  }
}

void BM_MeanCov(benchmark::State& state, Exec exec) {
  const auto& e = wiener_ensemble();  // sampled once, outside the timing
  for (auto _ : state) {
    auto m = qh::verify::estimate_mean_cov(e, exec);
    benchmark::DoNotOptimize(m.cov.data());
  }
}

void BM_VarianceFit(benchmark::State& state, Exec exec) {
  const auto& e = wiener_ensemble();
  for (auto _ : state) {
    auto f = qh::verify::fit_conditional_variance(e, 1, 2, 3, {}, exec);
    benchmark::DoNotOptimize(f.variance.fitted.data());
  }
}

}  // namespace

BENCHMARK_CAPTURE(BM_Sample, serial, Exec::Serial)->Arg(200000)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Sample, parallel, Exec::Parallel)->Arg(200000)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK_CAPTURE(BM_Transform, serial, Exec::Serial)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Transform, parallel, Exec::Parallel)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK_CAPTURE(BM_MeanCov, serial, Exec::Serial)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_MeanCov, parallel, Exec::Parallel)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK_CAPTURE(BM_VarianceFit, serial, Exec::Serial)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_VarianceFit, parallel, Exec::Parallel)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
