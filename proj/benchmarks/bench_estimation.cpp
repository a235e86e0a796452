#include <benchmark/benchmark.h>

#include <filesystem>
#include <random>

#include "robreg/csv.hpp"
#include "robreg/estimation.hpp"
#include "robreg/reproduce.hpp"

using namespace robreg;

namespace {

const std::filesystem::path kData = ROBREG_BENCH_DATA_DIR;

const Dataset& shock() {
  static const Dataset d =
      build_design(load_csv(kData / "shock.csv", {{"shocks"}, {"time"}}), shock_design());
  return d;
}

const Dataset& taylor() {
  static const Dataset d = build_design(
      load_csv(kData / "taylor_triangle.csv", {{"AY"}, {"DY"}, {"paid"}}), taylor_design());
  return d;
}

ErrorModel model_for(int which) {
  switch (which) {
    case 0: return ErrorModel::huber();
    case 1: return ErrorModel::tukey_biweight();
    case 2: return ErrorModel::student_t();
    default: return ErrorModel::lptn();
  }
}

void BM_WeightFunction(benchmark::State& state) {
  const ErrorModel m = model_for(static_cast<int>(state.range(0)));
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g(0.0, 3.0);
  std::vector<double> eps(4096);
  for (auto& e : eps) e = g(rng);
  for (auto _ : state) {
    double acc = 0.0;
    for (double e : eps) acc += m.weight_fn(e) + m.psi_fn(e);
    benchmark::DoNotOptimize(acc);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(eps.size()));
  state.SetLabel(m.describe());
}
BENCHMARK(BM_WeightFunction)->DenseRange(0, 3);

void BM_IrlsTaylor(benchmark::State& state) {
  const ErrorModel m = model_for(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(fit_m_irls(taylor(), m).beta_hat);
  state.SetLabel(m.describe());
}
BENCHMARK(BM_IrlsTaylor)->Arg(0)->Arg(1)->Unit(benchmark::kMicrosecond);

void BM_MapShockLptn(benchmark::State& state) {
  for (auto _ : state)
    benchmark::DoNotOptimize(fit_map(shock(), ErrorModel::lptn(0.9), PriorSpec::flat()).beta_hat);
}
BENCHMARK(BM_MapShockLptn)->Unit(benchmark::kMillisecond);

void BM_MapTaylorLptn(benchmark::State& state) {
  for (auto _ : state)
    benchmark::DoNotOptimize(fit_map(taylor(), ErrorModel::lptn(0.88), PriorSpec::flat()).beta_hat);
}
BENCHMARK(BM_MapTaylorLptn)->Unit(benchmark::kMillisecond)->Iterations(2);

}  // namespace

BENCHMARK_MAIN();
