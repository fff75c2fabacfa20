#include <benchmark/benchmark.h>

#include "advclaim/attacks/attack.hpp"
#include "advclaim/attribution/shapley.hpp"
#include "advclaim/data/synth.hpp"
#include "advclaim/models/birecurrent.hpp"
#include "advclaim/models/knn.hpp"
#include "advclaim/models/tree_ensemble.hpp"
#include "advclaim/numkit/matrix.hpp"
#include "advclaim/numkit/ops.hpp"
#include "advclaim/numkit/rng.hpp"

using namespace advclaim;

namespace {

const Dataset& bench_data() {
  static const Dataset ds = [] {
    SynthConfig cfg;
    cfg.n_samples = 1000;
    cfg.n_features = 38;
    cfg.seed = 11;
    return synth_generate(cfg);
  }();
  return ds;
}

const BiRecurrentModel& bench_lstm() {
  static const BiRecurrentModel m = [] {
    BiRecurrentParams p;
    p.hidden_size = 64;
    p.epochs = 1;
    p.seed = 3;
    return train_birecurrent(bench_data(), p);
  }();
  return m;
}

const TreeEnsemble& bench_gbt() {
  static const TreeEnsemble m = train_gbt(bench_data(), TreeParams{});
  return m;
}

}  // namespace

static void BM_gemm_nn(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(1);
  Matrix a = sample_normal(rng, n, n);
  Matrix b = sample_normal(rng, n, n);
  Matrix c(n, n);
  for (auto _ : state) {
    gemm_nn(a, b, c.view());
    benchmark::DoNotOptimize(c.values().data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(2 * n * n * n));
}
BENCHMARK(BM_gemm_nn)->Arg(32)->Arg(128)->Arg(256);

static void BM_lstm_predict(benchmark::State& state) {
  const auto& m = bench_lstm();
  Matrix x = bench_data().part_features(SplitPart::test);
  for (auto _ : state) benchmark::DoNotOptimize(m.predict_proba(x));
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(x.rows()));
}
BENCHMARK(BM_lstm_predict);

static void BM_lstm_input_gradient(benchmark::State& state) {
  const auto& m = bench_lstm();
  Matrix x = bench_data().part_features(SplitPart::test);
  auto y = bench_data().part_labels(SplitPart::test);
  for (auto _ : state) benchmark::DoNotOptimize(m.input_gradient(x, y));
}
BENCHMARK(BM_lstm_input_gradient);

static void BM_gbt_train(benchmark::State& state) {
  TreeParams p;
  p.n_trees = 20;
  p.histogram_bins = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(train_gbt(bench_data(), p));
}
BENCHMARK(BM_gbt_train)->Arg(0)->Arg(32)->Unit(benchmark::kMillisecond);

static void BM_gbt_predict(benchmark::State& state) {
  const auto& m = bench_gbt();
  Matrix x = bench_data().part_features(SplitPart::test);
  for (auto _ : state) benchmark::DoNotOptimize(m.predict_proba(x));
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(x.rows()));
}
BENCHMARK(BM_gbt_predict);

static void BM_knn_predict(benchmark::State& state) {
  const KnnModel m = train_knn(bench_data(), 5);
  Matrix x = bench_data().part_features(SplitPart::test);
  for (auto _ : state) benchmark::DoNotOptimize(m.predict_proba(x));
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(x.rows()));
}
BENCHMARK(BM_knn_predict)->Unit(benchmark::kMillisecond);

static void BM_pgd(benchmark::State& state) {
  const auto& m = bench_lstm();
  Matrix x = bench_data().part_features(SplitPart::test);
  auto y = bench_data().part_labels(SplitPart::test);
  AttackConfig cfg;
  cfg.epsilon = 0.1;
  cfg.steps = 10;
  for (auto _ : state) benchmark::DoNotOptimize(pgd(m, x, y, cfg));
}
BENCHMARK(BM_pgd)->Unit(benchmark::kMillisecond);

static void BM_mc_shapley(benchmark::State& state) {
  const auto f = score_fn(bench_gbt());
  Matrix x = bench_data().part_features(SplitPart::test);
  const auto& train = bench_data().indices(SplitPart::train);
  Matrix background = bench_data().features.select_rows(std::span(train).first(50));
  const auto perms = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(mc_shapley(f, x.row(0), background, perms, 5));
}
BENCHMARK(BM_mc_shapley)->Arg(50)->Arg(200)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
