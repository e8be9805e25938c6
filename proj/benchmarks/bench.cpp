#include "evtrack/abscheme.hpp"
#include "evtrack/diqcodec.hpp"
#include "evtrack/rdsolver.hpp"

#include <benchmark/benchmark.h>

namespace {

evtrack::StateSpaceModel scalar_model() {
  evtrack::Matrix A(1, 1), B(1, 1), S(1, 1);
  A << -0.1;
  B << 1.0;
  S << 1.0;
  return evtrack::make_model(A, B, S);
}

evtrack::StateSpaceModel planar_model() {
  evtrack::Matrix A(2, 2), B(2, 2), S(2, 2);
  A << -0.0145, -0.0886, 0.0886, 0.0;
  B << 0.1, 0.0, 0.0, 0.1;
  S << 1.0, 0.0, 0.0, 1.0;
  return evtrack::make_model(A, B, S);
}

void bm_matrix_exp(benchmark::State& state) {
  const auto model = planar_model();
  for (auto _ : state) {
    benchmark::DoNotOptimize(evtrack::matrix_exp(model.A, 1.0));
  }
}
BENCHMARK(bm_matrix_exp);

void bm_solve_ct_info(benchmark::State& state) {
  const auto model = planar_model();
  for (auto _ : state) {
    benchmark::DoNotOptimize(evtrack::solve_ct_info(model, 1.0));
  }
}
BENCHMARK(bm_solve_ct_info);

void bm_solve_dt_rate(benchmark::State& state) {
  const auto model = planar_model();
  const auto dmodel = evtrack::discretize(model, 1.0);
  const auto dd = evtrack::ct_to_dt_distortion(dmodel, 1.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        evtrack::solve_dt_rate(dmodel, dd.value, dmodel.Q_bar));
  }
}
BENCHMARK(bm_solve_dt_rate);

void bm_ab_step(benchmark::State& state) {
  evtrack::ABConfig cfg;
  cfg.A = -0.1;
  cfg.B = 1.0;
  cfg.d = 1.0;
  cfg.tau = 1e-2;
  cfg.horizon = 10.0;  // 1000 steps per iteration
  cfg.seed = 7;
  for (auto _ : state) {
    benchmark::DoNotOptimize(evtrack::run_ab(cfg));
  }
  state.SetItemsProcessed(state.iterations() * 1000);
}
BENCHMARK(bm_ab_step);

void bm_codec_step(benchmark::State& state) {
  const auto model = planar_model();
  evtrack::CodecRunOptions opts;
  opts.steps = 200;
  opts.seed = 7;
  for (auto _ : state) {
    benchmark::DoNotOptimize(evtrack::run_codec(model, 1.0, 1.0, opts));
  }
  state.SetItemsProcessed(state.iterations() * opts.steps);
}
BENCHMARK(bm_codec_step);

}  // namespace

BENCHMARK_MAIN();
