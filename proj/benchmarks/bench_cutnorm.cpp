#include <benchmark/benchmark.h>

#include "cutlim/cutnorm.hpp"
#include "cutlim/rng.hpp"

namespace {

cutlim::RealMatrix random_matrix(int m, int n, std::uint64_t seed) {
  cutlim::CounterRng rng(seed);
  cutlim::RealMatrix a = cutlim::RealMatrix::zeros(m, n);
  for (double& v : a.values) v = 2.0 * rng.next_unit() - 1.0;
  return a;
}

void BM_CutNormExact(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto a = random_matrix(n, n, 7);
  for (auto _ : state) {
    benchmark::DoNotOptimize(cutlim::cut_norm_exact(a).value);
  }
}
BENCHMARK(BM_CutNormExact)->Arg(8)->Arg(12)->Arg(16)->Arg(20);

void BM_CutNormAlternating(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto a = random_matrix(n, n, 7);
  for (auto _ : state) {
    benchmark::DoNotOptimize(cutlim::cut_norm_alternating(a, 16, 3).value);
  }
}
BENCHMARK(BM_CutNormAlternating)->Arg(16)->Arg(64)->Arg(128);

}  // namespace

BENCHMARK_MAIN();
