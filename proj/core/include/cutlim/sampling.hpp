#pragma once

#include <cstdint>
#include <span>
#include <unordered_map>
#include <utility>
#include <vector>

#include "cutlim/kernel.hpp"
#include "cutlim/measure.hpp"
#include "cutlim/rng.hpp"

namespace cutlim {

// One sampling draw from a kernel: n row and n column coordinates, the
// n x n minor of probability vectors at those coordinates, and a symbol
// array drawn independently per entry from the minor. Bit-reproducible
// from (kernel, seed, n).
struct SampleBatch {
  int n = 0;
  std::uint64_t seed = 0;
  std::vector<double> row_coords;
  std::vector<double> col_coords;
  StepKernel minor;                  // n x n, uniform weights
  std::vector<std::uint8_t> symbols; // n x n, row-major

  std::uint8_t symbol(int i, int j) const { return symbols[static_cast<std::size_t>(i) * n + j]; }
};

SampleBatch sample_matrix(const StepKernel& kappa, int n, std::uint64_t seed);

// Empirical distribution of the rows of the symbol array, an element of
// P(Omega^n) with atom weight 1/n per row (equal rows merge).
DiscreteMeasure empirical_law(const SampleBatch& batch);

// The symbol array as a point-mass step kernel on the same n x n grid.
StepKernel symbol_kernel(const SampleBatch& batch);

// Infinite exchangeable array generator for a finite kernel mixture: the
// component kernel is drawn once, then every entry (i, j) is generated
// from its own derived substream. Entries are pure functions of
// (mixture, seed, i, j), so any access order yields the same array and
// extending a prefix never changes earlier entries.
class ExchangeableStream {
 public:
  ExchangeableStream(std::vector<std::pair<double, StepKernel>> mixture, std::uint64_t seed);

  std::uint8_t at(std::int64_t i, std::int64_t j) const;
  const StepKernel& component() const { return mixture_[component_index_].second; }
  std::size_t component_index() const { return component_index_; }

  // Materialises the top-left rows x cols prefix (row-major).
  std::vector<std::uint8_t> prefix(int rows, int cols) const;

 private:
  int row_cell(std::int64_t i) const;
  int col_cell(std::int64_t j) const;

  std::vector<std::pair<double, StepKernel>> mixture_;
  std::size_t component_index_ = 0;
  CounterRng base_;
  mutable std::unordered_map<std::int64_t, int> row_cache_;
  mutable std::unordered_map<std::int64_t, int> col_cache_;
};

struct ConvergenceRow {
  int n = 0;
  double mean = 0.0;
  double std_error = 0.0;
};

// For each n: the average (over trials) heuristic cut-distance estimate
// between the law of kappa and the embedded empirical law of an n-sample.
// Trials run on derived seeds, so results are reproducible and
// thread-count independent.
std::vector<ConvergenceRow> sampling_convergence_experiment(const StepKernel& kappa,
                                                            std::span<const int> n_list, int trials,
                                                            std::uint64_t seed, int threads = 1);

}  // namespace cutlim
