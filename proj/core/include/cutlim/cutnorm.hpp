#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "cutlim/errors.hpp"

namespace cutlim {

// Dense real matrix with optional per-axis weights. Without weights an
// m x n matrix is treated as uniformly weighted (1/m, 1/n), so the cut
// norm carries the usual 1/(mn) normalisation. With weights the entries
// are measured by the product weight p_i * w_j, which makes the cut norm
// of a step-function difference equal to its integral cut norm.
struct RealMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> values;       // row-major, rows*cols entries
  std::vector<double> row_weights;  // empty means uniform 1/rows
  std::vector<double> col_weights;  // empty means uniform 1/cols

  static RealMatrix zeros(int m, int n);

  double value(int i, int j) const { return values[static_cast<std::size_t>(i) * cols + j]; }
  double& value(int i, int j) { return values[static_cast<std::size_t>(i) * cols + j]; }
  double row_weight(int i) const {
    return row_weights.empty() ? 1.0 / rows : row_weights[static_cast<std::size_t>(i)];
  }
  double col_weight(int j) const {
    return col_weights.empty() ? 1.0 / cols : col_weights[static_cast<std::size_t>(j)];
  }

  RealMatrix transposed() const;
  void validate() const;
};

// Adversary certificate: a rectangle (row set, column set), the symbol it
// came from when the matrix is a kernel slice, and the signed weighted
// mass of the rectangle.
struct CutWitness {
  std::vector<int> row_set;
  std::vector<int> col_set;
  int symbol = -1;
  double value = 0.0;
};

struct CutNormResult {
  double value = 0.0;  // |witness.value| of the best rectangle found
  CutWitness witness;
  bool exact = false;
};

// Subset enumeration runs over the smaller axis; beyond this the exact
// routine refuses and callers fall back to cut_norm_alternating.
inline constexpr int kMaxExactCutAxis = 24;

// Exact cut norm: max over rectangles S x X of |sum_{S x X} p_i w_j A_ij|.
// Enumerates subsets of the smaller axis (Gray code), solves the other
// axis greedily per sign; rows with zero partial sum are included.
// Throws SizeLimitError when min(rows, cols) > kMaxExactCutAxis.
CutNormResult cut_norm_exact(const RealMatrix& a);

// Local-search lower bound: alternately fixes one side of the rectangle
// and picks the sign-optimal other side until a fixed point, keeping the
// best over `restarts` seeded starts and both signs. Deterministic for a
// fixed (seed, restarts) pair.
CutNormResult cut_norm_alternating(const RealMatrix& a, int restarts, std::uint64_t seed);

// Draws a k x k minor by weighted row/column sampling and returns its cut
// norm (exact when k <= kMaxExactCutAxis, alternating otherwise). The
// witness indexes the minor, not the parent matrix.
CutNormResult sampled_cut_norm(const RealMatrix& a, int k, std::uint64_t seed);

// Weighted mass of an explicit rectangle; used to re-check witnesses.
double rectangle_mass(const RealMatrix& a, std::span<const int> row_set, std::span<const int> col_set);

}  // namespace cutlim
