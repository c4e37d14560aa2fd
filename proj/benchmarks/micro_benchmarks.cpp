#include <benchmark/benchmark.h>

#include "tabeval/autoenc.hpp"
#include "tabeval/fixture.hpp"
#include "tabeval/forest.hpp"
#include "tabeval/metrics.hpp"
#include "tabeval/numstats.hpp"
#include "tabeval/perturb.hpp"
#include "tabeval/rng.hpp"

namespace {

using namespace tabeval;

Matrix normal_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  Rng rng(seed);
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = rng.normal();
  }
  return m;
}

void BM_FrechetDistance(benchmark::State& state) {
  const auto dim = state.range(0);
  const GaussianSummary a = mean_cov(normal_matrix(4 * dim, dim, 1));
  const GaussianSummary b = mean_cov(normal_matrix(4 * dim, dim, 2));
  for (auto _ : state) benchmark::DoNotOptimize(frechet_distance(a, b));
}
BENCHMARK(BM_FrechetDistance)->Arg(8)->Arg(32)->Arg(128);

void BM_KsStatistic(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(3);
  std::vector<double> a(n), b(n);
  for (auto& v : a) v = rng.normal();
  for (auto& v : b) v = rng.normal() + 0.1;
  for (auto _ : state) benchmark::DoNotOptimize(ks_statistic(a, b));
  state.SetItemsProcessed(static_cast<std::int64_t>(2 * n) * state.iterations());
}
BENCHMARK(BM_KsStatistic)->Arg(1000)->Arg(100000);

void BM_ForestTraining(benchmark::State& state) {
  const auto ds = make_desk_fixture({static_cast<std::size_t>(state.range(0)), 7, 2.0});
  const EncodedMatrix x = fit_encoder(ds).encode(ds);
  ForestConfig cfg;
  cfg.n_trees = 20;
  for (auto _ : state) benchmark::DoNotOptimize(train_forest(x.values, *x.labels, cfg));
}
BENCHMARK(BM_ForestTraining)->Arg(1000)->Arg(4000)->Unit(benchmark::kMillisecond);

void BM_AutoencoderEpoch(benchmark::State& state) {
  const auto ds = make_desk_fixture({4000, 7, 2.0});
  const EncodedMatrix x = fit_encoder(ds).encode(ds);
  AutoencoderConfig cfg;
  cfg.epochs = 1;
  for (auto _ : state) benchmark::DoNotOptimize(train_autoencoder(x, cfg));
}
BENCHMARK(BM_AutoencoderEpoch)->Unit(benchmark::kMillisecond);

void BM_SdvFidelity(benchmark::State& state) {
  const auto real = make_desk_fixture({4000, 7, 2.0});
  const auto gen = add_gaussian_noise(real, 0.3, 1.0, 5);
  for (auto _ : state) benchmark::DoNotOptimize(sdv_fidelity(real, gen).combined);
}
BENCHMARK(BM_SdvFidelity)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
