#include "cutlim/cutnorm.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>

#include "cutlim/rng.hpp"

namespace cutlim {

RealMatrix RealMatrix::zeros(int m, int n) {
  RealMatrix a;
  a.rows = m;
  a.cols = n;
  a.values.assign(static_cast<std::size_t>(m) * static_cast<std::size_t>(n), 0.0);
  return a;
}

RealMatrix RealMatrix::transposed() const {
  RealMatrix t;
  t.rows = cols;
  t.cols = rows;
  t.values.resize(values.size());
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) t.value(j, i) = value(i, j);
  }
  t.row_weights = col_weights;
  t.col_weights = row_weights;
  return t;
}

void RealMatrix::validate() const {
  if (rows < 1 || cols < 1) throw std::invalid_argument("RealMatrix: empty axis");
  if (values.size() != static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols)) {
    throw std::invalid_argument("RealMatrix: value buffer size mismatch");
  }
  for (double v : values) {
    if (!std::isfinite(v)) throw std::invalid_argument("RealMatrix: non-finite entry");
  }
  auto check_axis = [](const std::vector<double>& w, int n, const char* name) {
    if (w.empty()) return;
    if (static_cast<int>(w.size()) != n) throw std::invalid_argument(std::string("RealMatrix: ") + name);
    double total = 0.0;
    for (double x : w) {
      if (!(x >= 0.0)) throw std::invalid_argument(std::string("RealMatrix: negative weight on ") + name);
      total += x;
    }
    if (std::abs(total - 1.0) > 1e-9) {
      throw std::invalid_argument(std::string("RealMatrix: weights do not sum to 1 on ") + name);
    }
  };
  check_axis(row_weights, rows, "rows");
  check_axis(col_weights, cols, "cols");
}

namespace {

// Weighted entries b[i*k + j] = p_i * w_j * a_ij with the enumeration axis
// (the smaller one) mapped to columns.
struct Weighted {
  int m = 0;         // greedy axis size
  int k = 0;         // enumeration axis size
  bool transposed = false;
  std::vector<double> b;  // m x k, row-major

  double at(int i, int j) const { return b[static_cast<std::size_t>(i) * k + j]; }
};

Weighted make_weighted(const RealMatrix& a, bool force_cols_small) {
  Weighted w;
  w.transposed = force_cols_small && a.cols > a.rows;
  w.m = w.transposed ? a.cols : a.rows;
  w.k = w.transposed ? a.rows : a.cols;
  w.b.resize(static_cast<std::size_t>(w.m) * static_cast<std::size_t>(w.k));
  for (int i = 0; i < a.rows; ++i) {
    const double pi = a.row_weight(i);
    for (int j = 0; j < a.cols; ++j) {
      const double v = pi * a.col_weight(j) * a.value(i, j);
      if (w.transposed) {
        w.b[static_cast<std::size_t>(j) * w.k + i] = v;
      } else {
        w.b[static_cast<std::size_t>(i) * w.k + j] = v;
      }
    }
  }
  return w;
}

CutWitness witness_from_masks(const Weighted& w, std::uint32_t col_mask, int sign) {
  // Recompute greedy-axis sums from scratch for an exact, drift-free value.
  std::vector<double> r(static_cast<std::size_t>(w.m), 0.0);
  for (int j = 0; j < w.k; ++j) {
    if (!(col_mask >> j & 1u)) continue;
    for (int i = 0; i < w.m; ++i) r[static_cast<std::size_t>(i)] += w.at(i, j);
  }
  CutWitness wit;
  double total = 0.0;
  for (int i = 0; i < w.m; ++i) {
    if (sign * r[static_cast<std::size_t>(i)] >= 0.0) {
      wit.row_set.push_back(i);
      total += r[static_cast<std::size_t>(i)];
    }
  }
  for (int j = 0; j < w.k; ++j) {
    if (col_mask >> j & 1u) wit.col_set.push_back(j);
  }
  wit.value = total;
  if (w.transposed) std::swap(wit.row_set, wit.col_set);
  return wit;
}

}  // namespace

CutNormResult cut_norm_exact(const RealMatrix& a) {
  a.validate();
  if (std::min(a.rows, a.cols) > kMaxExactCutAxis) {
    throw SizeLimitError("cut_norm_exact: min axis exceeds " + std::to_string(kMaxExactCutAxis) +
                         ", use cut_norm_alternating");
  }
  const Weighted w = make_weighted(a, /*force_cols_small=*/true);
  const int m = w.m, k = w.k;

  std::vector<double> r(static_cast<std::size_t>(m), 0.0);
  double sum_pos = 0.0, sum_neg = 0.0;
  double best = 0.0;
  std::uint32_t best_mask = 0;
  int best_sign = +1;

  const std::uint64_t subsets = 1ULL << k;
  std::uint32_t gray = 0;
  for (std::uint64_t step = 1; step < subsets; ++step) {
    const int j = std::countr_zero(step);
    const bool insert = !(gray >> j & 1u);
    gray ^= 1u << j;
    const double dir = insert ? 1.0 : -1.0;
    for (int i = 0; i < m; ++i) {
      const double old = r[static_cast<std::size_t>(i)];
      const double next = old + dir * w.at(i, j);
      r[static_cast<std::size_t>(i)] = next;
      sum_pos += std::max(next, 0.0) - std::max(old, 0.0);
      sum_neg += std::max(-next, 0.0) - std::max(-old, 0.0);
    }
    // Periodic fresh recomputation bounds the incremental float drift.
    if ((step & 0xfffULL) == 0) {
      sum_pos = sum_neg = 0.0;
      for (int i = 0; i < m; ++i) {
        sum_pos += std::max(r[static_cast<std::size_t>(i)], 0.0);
        sum_neg += std::max(-r[static_cast<std::size_t>(i)], 0.0);
      }
    }
    if (sum_pos > best) { best = sum_pos; best_mask = gray; best_sign = +1; }
    if (sum_neg > best) { best = sum_neg; best_mask = gray; best_sign = -1; }
  }

  CutNormResult out;
  out.exact = true;
  out.witness = witness_from_masks(w, best_mask, best_sign);
  out.value = std::abs(out.witness.value);
  return out;
}

CutNormResult cut_norm_alternating(const RealMatrix& a, int restarts, std::uint64_t seed) {
  a.validate();
  if (restarts < 1) throw std::invalid_argument("cut_norm_alternating: restarts must be >= 1");
  const Weighted w = make_weighted(a, /*force_cols_small=*/false);
  const int m = w.m, k = w.k;

  std::vector<char> col_in(static_cast<std::size_t>(k), 0);
  std::vector<char> row_in(static_cast<std::size_t>(m), 0);
  std::vector<double> r(static_cast<std::size_t>(m), 0.0);
  std::vector<double> c(static_cast<std::size_t>(k), 0.0);

  double best = 0.0;
  std::vector<int> best_rows, best_cols;
  double best_signed = 0.0;

  for (int restart = 0; restart < restarts; ++restart) {
    CounterRng rng = CounterRng(seed).derive(static_cast<std::uint64_t>(restart));
    for (int sign : {+1, -1}) {
      for (int j = 0; j < k; ++j) col_in[static_cast<std::size_t>(j)] = rng.next_bool() ? 1 : 0;
      double value = 0.0;
      for (int round = 0; round < 200; ++round) {
        std::fill(r.begin(), r.end(), 0.0);
        for (int j = 0; j < k; ++j) {
          if (!col_in[static_cast<std::size_t>(j)]) continue;
          for (int i = 0; i < m; ++i) r[static_cast<std::size_t>(i)] += w.at(i, j);
        }
        for (int i = 0; i < m; ++i) row_in[static_cast<std::size_t>(i)] = sign * r[static_cast<std::size_t>(i)] >= 0.0;
        std::fill(c.begin(), c.end(), 0.0);
        for (int i = 0; i < m; ++i) {
          if (!row_in[static_cast<std::size_t>(i)]) continue;
          for (int j = 0; j < k; ++j) c[static_cast<std::size_t>(j)] += w.at(i, j);
        }
        bool changed = false;
        double signed_mass = 0.0;
        for (int j = 0; j < k; ++j) {
          const bool keep = sign * c[static_cast<std::size_t>(j)] >= 0.0;
          if (keep != static_cast<bool>(col_in[static_cast<std::size_t>(j)])) changed = true;
          col_in[static_cast<std::size_t>(j)] = keep;
          if (keep) signed_mass += c[static_cast<std::size_t>(j)];
        }
        if (std::abs(signed_mass) <= value + 1e-15 && !changed) { value = std::abs(signed_mass); break; }
        value = std::abs(signed_mass);
        if (!changed) break;
      }
      // Re-evaluate the final rectangle cleanly.
      std::vector<int> rows_v, cols_v;
      for (int i = 0; i < m; ++i) {
        if (row_in[static_cast<std::size_t>(i)]) rows_v.push_back(i);
      }
      for (int j = 0; j < k; ++j) {
        if (col_in[static_cast<std::size_t>(j)]) cols_v.push_back(j);
      }
      double mass = 0.0;
      for (int i : rows_v) {
        for (int j : cols_v) mass += w.at(i, j);
      }
      if (std::abs(mass) > best) {
        best = std::abs(mass);
        best_signed = mass;
        best_rows = rows_v;
        best_cols = cols_v;
      }
    }
  }

  CutNormResult out;
  out.exact = false;
  out.value = best;
  out.witness.row_set = std::move(best_rows);
  out.witness.col_set = std::move(best_cols);
  out.witness.value = best_signed;
  return out;
}

CutNormResult sampled_cut_norm(const RealMatrix& a, int k, std::uint64_t seed) {
  a.validate();
  if (k < 16) throw std::invalid_argument("sampled_cut_norm: k must be >= 16");
  CounterRng row_rng = CounterRng(seed).derive(1);
  CounterRng col_rng = CounterRng(seed).derive(2);

  std::vector<double> pr(static_cast<std::size_t>(a.rows));
  std::vector<double> pc(static_cast<std::size_t>(a.cols));
  for (int i = 0; i < a.rows; ++i) pr[static_cast<std::size_t>(i)] = a.row_weight(i);
  for (int j = 0; j < a.cols; ++j) pc[static_cast<std::size_t>(j)] = a.col_weight(j);

  RealMatrix minor = RealMatrix::zeros(k, k);
  std::vector<int> ri(static_cast<std::size_t>(k)), cj(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) ri[static_cast<std::size_t>(i)] = static_cast<int>(row_rng.next_weighted(pr));
  for (int j = 0; j < k; ++j) cj[static_cast<std::size_t>(j)] = static_cast<int>(col_rng.next_weighted(pc));
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) {
      minor.value(i, j) = a.value(ri[static_cast<std::size_t>(i)], cj[static_cast<std::size_t>(j)]);
    }
  }
  if (k <= kMaxExactCutAxis) return cut_norm_exact(minor);
  return cut_norm_alternating(minor, std::max(32, k), CounterRng(seed).derive(3).next_u64());
}

double rectangle_mass(const RealMatrix& a, std::span<const int> row_set, std::span<const int> col_set) {
  double mass = 0.0;
  for (int i : row_set) {
    const double pi = a.row_weight(i);
    for (int j : col_set) mass += pi * a.col_weight(j) * a.value(i, j);
  }
  return mass;
}

}  // namespace cutlim
