#include <benchmark/benchmark.h>

#include "changeband/bootstrap.hpp"
#include "changeband/detection.hpp"
#include "changeband/fitting.hpp"
#include "changeband/simulate.hpp"

namespace {

using namespace changeband;

dataset strong_signal_dataset(std::uint64_t seed) {
  const scenario_spec s = builtin_scenario(2, sigma_level::small);
  rng::gaussian_stream stream(seed);
  return simulate_dataset(s.model, s.theta, s.sigma, s.design, stream);
}

void bm_eval_model(benchmark::State& state) {
  const model_spec pll = model_spec::four_pll_spec();
  const param_vector theta = four_pll_params(8.791, -0.946, 17.589, 10.0);
  double t = 0.1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(eval_model(pll, theta, t));
    t = t < 45.0 ? t + 0.1 : 0.1;
  }
}
BENCHMARK(bm_eval_model);

void bm_eval_abs_derivative(benchmark::State& state) {
  const model_spec bet = model_spec::beta_spec(54.0);
  const param_vector theta = beta_params(6.997, 2.952, 0.506, 0.215);
  double t = 0.1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(eval_abs_derivative(bet, theta, t));
    t = t < 45.0 ? t + 0.1 : 0.1;
  }
}
BENCHMARK(bm_eval_abs_derivative);

void bm_fit_cold(benchmark::State& state) {
  const dataset data = strong_signal_dataset(1);
  const model_spec pll = model_spec::four_pll_spec();
  for (auto _ : state) {
    benchmark::DoNotOptimize(fit_ols(data, pll));
  }
}
BENCHMARK(bm_fit_cold)->Unit(benchmark::kMillisecond);

void bm_fit_warm(benchmark::State& state) {
  const dataset data = strong_signal_dataset(1);
  const model_spec pll = model_spec::four_pll_spec();
  fit_options opts;
  opts.warm_start = four_pll_params(8.791, -0.946, 17.589, 10.0);
  opts.warm_start_only = true;
  for (auto _ : state) {
    benchmark::DoNotOptimize(fit_ols(data, pll, opts));
  }
}
BENCHMARK(bm_fit_warm);

void bm_lower_band(benchmark::State& state) {
  const dataset data = strong_signal_dataset(1);
  const model_spec pll = model_spec::four_pll_spec();
  const fit_result fit = fit_ols(data, pll);
  bootstrap_config cfg;
  cfg.b1 = static_cast<int>(state.range(0));
  cfg.b2 = 5;
  cfg.seed = 7;
  cfg.grid_step = 0.5;
  for (auto _ : state) {
    benchmark::DoNotOptimize(lower_band(data, fit, cfg));
  }
}
BENCHMARK(bm_lower_band)->Arg(80)->Arg(160)->Unit(benchmark::kMillisecond);

void bm_extract_regions(benchmark::State& state) {
  const dataset data = strong_signal_dataset(1);
  const model_spec pll = model_spec::four_pll_spec();
  const fit_result fit = fit_ols(data, pll);
  bootstrap_config cfg;
  cfg.b1 = 80;
  cfg.b2 = 5;
  cfg.seed = 7;
  cfg.grid_step = 0.1;
  const confidence_band band = lower_band(data, fit, cfg);
  const double lambda = default_lambda(45.0).lambda;
  for (auto _ : state) {
    benchmark::DoNotOptimize(extract_regions(band, lambda));
  }
}
BENCHMARK(bm_extract_regions);

}  // namespace

int main(int argc, char** argv) {
  benchmark::Initialize(&argc, argv);
  if (benchmark::ReportUnrecognizedArguments(argc, argv)) return 1;
  benchmark::RunSpecifiedBenchmarks();
  benchmark::Shutdown();
  return 0;
}
