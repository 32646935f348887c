#include <benchmark/benchmark.h>

#include "cutlim/distance.hpp"
#include "cutlim/models.hpp"

namespace {

void BM_ParityExactDistance(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto even = cutlim::parity_measure(n, cutlim::ParityClass::kEven);
  const auto odd = cutlim::parity_measure(n, cutlim::ParityClass::kOdd);
  for (auto _ : state) {
    benchmark::DoNotOptimize(cutlim::discrete_cut_distance(even, odd, {}).value);
  }
}
BENCHMARK(BM_ParityExactDistance)->Arg(3)->Arg(4)->Arg(5)->Unit(benchmark::kMillisecond);

void BM_AdversaryFlipCoupling(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto flip = cutlim::parity_flip_coupling(n);
  for (auto _ : state) {
    benchmark::DoNotOptimize(cutlim::adversary_value(flip).value);
  }
}
BENCHMARK(BM_AdversaryFlipCoupling)->Arg(6)->Arg(8)->Arg(10);

void BM_KernelTransportUpper(benchmark::State& state) {
  const int grid = static_cast<int>(state.range(0));
  const auto a = cutlim::iscaled_limit_kernel(grid);
  const auto b = cutlim::curie_weiss_limit_kernel(2.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(cutlim::kernel_distance(a, b, {}).upper);
  }
}
BENCHMARK(BM_KernelTransportUpper)->Arg(8)->Arg(12)->Unit(benchmark::kMillisecond);

}  // namespace
