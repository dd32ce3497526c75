#include <benchmark/benchmark.h>

#include <memory>
#include <vector>

#include "dsgrl/augment.hpp"
#include "dsgrl/encoder.hpp"
#include "dsgrl/evaluation.hpp"
#include "dsgrl/graph.hpp"
#include "dsgrl/matrix.hpp"
#include "dsgrl/rng.hpp"
#include "dsgrl/trainer.hpp"

using namespace dsgrl;

namespace {

Matrix random_matrix(Rng& rng, index_t rows, index_t cols) {
  Matrix m(rows, cols);
  for (index_t i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(-1.0, 1.0);
  return m;
}

Graph bench_graph(index_t block, std::uint64_t seed) {
  return generate_sbm({block, block, block}, 0.1, 0.01, 0.5, seed);
}

}  // namespace

static void BM_matmul(benchmark::State& state) {
  const index_t n = state.range(0);
  Rng rng(1);
  Matrix a = random_matrix(rng, n, n);
  Matrix b = random_matrix(rng, n, n);
  for (auto _ : state) {
    Matrix c = matmul(a, b);
    benchmark::DoNotOptimize(c.data());
  }
  state.SetComplexityN(n);
}
BENCHMARK(BM_matmul)->Arg(64)->Arg(128)->Arg(256)->Complexity();

static void BM_spmm(benchmark::State& state) {
  const index_t block = state.range(0);
  Graph g = bench_graph(block, 1);
  auto a_hat = normalize_adjacency(*g.adjacency);
  Rng rng(2);
  Matrix x = random_matrix(rng, g.n, 64);
  for (auto _ : state) {
    Matrix y = multiply(*a_hat, x);
    benchmark::DoNotOptimize(y.data());
  }
}
BENCHMARK(BM_spmm)->Arg(50)->Arg(150);

static void BM_high_order_build(benchmark::State& state) {
  const index_t n = state.range(0);
  Rng rng(3);
  Matrix h = random_matrix(rng, n, 16);
  for (auto _ : state) {
    Csr aprime = build_high_order_network(h);
    benchmark::DoNotOptimize(aprime.vals.data());
  }
}
BENCHMARK(BM_high_order_build)->Arg(128)->Arg(256);

static void BM_gcn_forward(benchmark::State& state) {
  const index_t block = state.range(0);
  Graph g = bench_graph(block, 4);
  auto a_hat = normalize_adjacency(*g.adjacency);
  Rng rng(4);
  GcnStack stack;
  stack.weights = init_weight_chain({g.features.cols(), 128, 64}, rng);
  Tensor x(g.features);
  for (auto _ : state) {
    Tensor z = gcn_forward(a_hat, x, stack);
    benchmark::DoNotOptimize(z.value().data());
  }
}
BENCHMARK(BM_gcn_forward)->Arg(50)->Arg(150);

static void BM_train_epoch_feature(benchmark::State& state) {
  Graph g = bench_graph(50, 5);
  TrainConfig cfg;
  cfg.d = 16;
  cfg.epochs = 1;
  for (auto _ : state) {
    TrainResult res = train(g, cfg);
    benchmark::DoNotOptimize(res.embedding.data());
  }
}
BENCHMARK(BM_train_epoch_feature);

static void BM_train_epoch_topology(benchmark::State& state) {
  Graph g = bench_graph(50, 6);
  TrainConfig cfg;
  cfg.mode = Mode::Topology;
  cfg.d = 16;
  cfg.epochs = 1;
  for (auto _ : state) {
    TrainResult res = train(g, cfg);
    benchmark::DoNotOptimize(res.embedding.data());
  }
}
BENCHMARK(BM_train_epoch_topology);

static void BM_linear_probe(benchmark::State& state) {
  Rng rng(7);
  const index_t n = 300, d = 32;
  Matrix z = random_matrix(rng, n, d);
  std::vector<index_t> y(n);
  for (index_t i = 0; i < n; ++i) {
    y[i] = static_cast<index_t>(i % 3);
    z(i, 0) += 3.0 * static_cast<double>(y[i]);
  }
  for (auto _ : state) {
    LinearProbe probe = fit_linear_probe(z, y, 1e-2, 100);
    benchmark::DoNotOptimize(probe.weight.data());
  }
}
BENCHMARK(BM_linear_probe);

BENCHMARK_MAIN();
