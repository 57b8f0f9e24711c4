#include <benchmark/benchmark.h>

#include "vecgee/gee.hpp"
#include "vecgee/inference.hpp"
#include "vecgee/model_spec.hpp"
#include "vecgee/simulation.hpp"
#include "vecgee/sorbinil_data.hpp"
#include "vecgee/working_dependence.hpp"

using namespace vecgee;

static void BM_SorbinilFit(benchmark::State& state) {
  const auto model = sorbinil_symmetric_model();
  const auto data = align_to_model(sorbinil_dataset(), model);
  FitOptions options;
  options.dependence.kind = static_cast<DependenceKind>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(fit_gee(model, data, options).beta);
}
BENCHMARK(BM_SorbinilFit)
    ->Arg(static_cast<int>(DependenceKind::independence))
    ->Arg(static_cast<int>(DependenceKind::unstructured))
    ->Arg(static_cast<int>(DependenceKind::odds_ratio));

static void BM_SolveP11(benchmark::State& state) {
  double gamma = -5.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve_p11(gamma, 0.37, 0.61));
    gamma = gamma > 5.0 ? -5.0 : gamma + 0.01;
  }
}
BENCHMARK(BM_SolveP11);

static void BM_BurnReplicate(benchmark::State& state) {
  const auto pool = synthetic_age_pool();
  const auto model = burn_model();
  std::uint64_t seed = 1;
  for (auto _ : state) {
    const auto data = generate_burn_dataset(static_cast<std::size_t>(state.range(0)), seed++, pool);
    benchmark::DoNotOptimize(fit_gee(model, data).sandwich_vcov);
  }
}
BENCHMARK(BM_BurnReplicate)->Arg(200)->Arg(2000);

static void BM_ConfidenceRegion(benchmark::State& state) {
  const auto model = sorbinil_four_parameter_model();
  FitOptions options;
  options.dependence = WorkingDependence::unstructured();
  const auto fit = fit_gee(model, align_to_model(sorbinil_dataset(), model), options);
  const int resolution = static_cast<int>(state.range(0));
  const auto grid =
      default_region_grid(1, 3, 0.95, fit.beta, {fit.sandwich_vcov}, fit.n, fit.p, resolution);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        confidence_region(1, 3, 0.95, grid, fit.beta, fit.sandwich_vcov, fit.n, fit.p).boundary);
  }
}
BENCHMARK(BM_ConfidenceRegion)->Arg(100)->Arg(200);
BENCHMARK_MAIN();
