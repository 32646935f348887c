#include <benchmark/benchmark.h>

#include "cutlim/kernel.hpp"
#include "cutlim/rng.hpp"
#include "cutlim/sampling.hpp"

namespace {

cutlim::StepKernel random_kernel(int cells, std::uint64_t seed) {
  cutlim::CounterRng rng(seed);
  cutlim::StepKernel k;
  k.alphabet = cutlim::Alphabet{2};
  k.row_weights.assign(static_cast<std::size_t>(cells), 1.0 / cells);
  k.col_weights = k.row_weights;
  for (int i = 0; i < cells * cells; ++i) {
    const double p = rng.next_unit();
    k.blocks.push_back(1.0 - p);
    k.blocks.push_back(p);
  }
  return k;
}

void BM_WeakRegularity(benchmark::State& state) {
  const auto k = random_kernel(static_cast<int>(state.range(0)), 11);
  for (auto _ : state) {
    benchmark::DoNotOptimize(cutlim::weak_regularity(k, 0.2, 32).residual);
  }
}
BENCHMARK(BM_WeakRegularity)->Arg(8)->Arg(16)->Unit(benchmark::kMillisecond);

void BM_SampleMatrix(benchmark::State& state) {
  const auto k = random_kernel(16, 5);
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(cutlim::sample_matrix(k, n, 9).symbols.size());
  }
}
BENCHMARK(BM_SampleMatrix)->Arg(64)->Arg(256);

}  // namespace
