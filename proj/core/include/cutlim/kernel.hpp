#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "cutlim/cutnorm.hpp"
#include "cutlim/measure.hpp"

namespace cutlim {

// Piecewise-constant map [0,1]^2 -> P(Omega) on a weighted grid. Block
// (i, j) holds the probability vector taken on the rectangle of mass
// row_weights[i] * col_weights[j]. Immutable by convention.
struct StepKernel {
  Alphabet alphabet;
  std::vector<double> row_weights;
  std::vector<double> col_weights;
  std::vector<double> blocks;  // k * l * q, row-major over (i, j, symbol)

  int num_rows() const { return static_cast<int>(row_weights.size()); }
  int num_cols() const { return static_cast<int>(col_weights.size()); }

  std::span<const double> block(int i, int j) const {
    const std::size_t q = static_cast<std::size_t>(alphabet.size);
    return {blocks.data() + (static_cast<std::size_t>(i) * col_weights.size() + j) * q, q};
  }
  double at(int i, int j, int symbol) const {
    return blocks[(static_cast<std::size_t>(i) * col_weights.size() + j) * alphabet.size + symbol];
  }
  double& at(int i, int j, int symbol) {
    return blocks[(static_cast<std::size_t>(i) * col_weights.size() + j) * alphabet.size + symbol];
  }

  static StepKernel constant(Alphabet alphabet, const std::vector<double>& probs);
  void validate() const;
};

// Coarsening of a grid axis: assignment maps each original cell to its
// class; weights are the summed class masses.
struct Partition {
  std::vector<int> assignment;
  int classes = 0;
  std::vector<double> weights;

  static Partition trivial(std::span<const double> cell_weights);
  static Partition identity(std::span<const double> cell_weights);
  static Partition from_assignment(std::vector<int> assignment, std::span<const double> cell_weights);
  void validate(int cells) const;
};

// Evaluates an analytic kernel at cell midpoints of a uniform grid.
// The callback must return a probability vector of length q.
StepKernel discretize(Alphabet alphabet, int grid,
                      const std::function<std::vector<double>(double s, double x)>& fn);

// Conditional expectation of kappa given the rectangle algebra of the two
// partitions; the result lives on kappa's original grid. Mass-weighted and
// idempotent for fixed partitions.
StepKernel average(const StepKernel& kappa, const Partition& rows, const Partition& cols);

// The omega-slice as a weighted real matrix.
RealMatrix slice(const StepKernel& kappa, int symbol);

// Packs the omega-slice into a symmetric (k+l) x (k+l) step function on
// half-scaled axes: zero on the diagonal quadrants, the slice in the
// off-diagonal quadrants (transposed in the lower one).
RealMatrix bipartite_embed(const StepKernel& kappa, int symbol);

// Pair-alphabet product: rows are the product of the two row grids,
// columns the common refinement; block = componentwise outer product.
StepKernel tensor(const StepKernel& a, const StepKernel& b);

// Pair-alphabet rank-one pairing: rows are the common refinement, columns
// the product of the two column grids.
StepKernel oplus(const StepKernel& a, const StepKernel& b);

// Rewrites both kernels on the overlay of their grids so that they share
// identical row and column weights. Cells below kWeightFloor are merged.
std::pair<StepKernel, StepKernel> common_refinement(const StepKernel& a, const StepKernel& b);

inline constexpr double kWeightFloor = 1e-15;

struct WeakRegularityResult {
  Partition rows;
  Partition cols;
  double residual = 0.0;   // certified cut distance between kappa and its average
  int iterations = 0;
  bool certified = false;  // residual came from exact cut norms
  bool reached_target = false;
};

// Frieze-Kannan style witness splitting: repeatedly finds the worst
// symbol's cut witness of kappa - kappa^{S,X} and splits both partitions
// along it. Stops when the residual drops below eps or after max_iters.
WeakRegularityResult weak_regularity(const StepKernel& kappa, double eps, int max_iters);

}  // namespace cutlim
