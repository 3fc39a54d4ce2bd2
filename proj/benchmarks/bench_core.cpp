#include <benchmark/benchmark.h>

#include "adrl/nd/ops.hpp"
#include "adrl/rng.hpp"

using namespace adrl;
using namespace adrl::nd;

static void BM_matmul(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  Rng rng(1);
  std::vector<Real> av(static_cast<std::size_t>(n) * n), bv = av;
  for (auto& x : av) x = rng.uniform(-1, 1);
  for (auto& x : bv) x = rng.uniform(-1, 1);
  auto a = Tensor::constant(n, n, av);
  auto b = Tensor::constant(n, n, bv);
  for (auto _ : state) {
    auto c = matmul(a, b);
    benchmark::DoNotOptimize(c.data());
  }
  state.counters["gflops"] = benchmark::Counter(
      2.0 * n * n * n * static_cast<double>(state.iterations()) * 1e-9,
      benchmark::Counter::kIsRate);
}
BENCHMARK(BM_matmul)->Arg(128)->Arg(256)->Arg(512);

BENCHMARK_MAIN();
