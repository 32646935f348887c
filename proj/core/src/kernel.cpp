#include "cutlim/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "cutlim/rng.hpp"

namespace cutlim {

namespace {

void check_prob_vector(std::span<const double> p, const char* where) {
  double total = 0.0;
  for (double v : p) {
    if (!(v >= -1e-12)) throw std::invalid_argument(std::string(where) + ": negative probability");
    total += v;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw std::invalid_argument(std::string(where) + ": probabilities do not sum to 1");
  }
}

void check_axis_weights(std::span<const double> w, const char* where) {
  if (w.empty()) throw std::invalid_argument(std::string(where) + ": empty axis");
  double total = 0.0;
  for (double v : w) {
    if (!(v > 0.0)) throw std::invalid_argument(std::string(where) + ": weights must be positive");
    total += v;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw std::invalid_argument(std::string(where) + ": weights do not sum to 1");
  }
}

// Overlay of two weight vectors: emits merged cell weights plus the index
// of the source cell on each side. Slivers below kWeightFloor fold into
// the previous cell.
struct Overlay {
  std::vector<double> weights;
  std::vector<int> from_a;
  std::vector<int> from_b;
};

Overlay overlay_axes(std::span<const double> a, std::span<const double> b) {
  Overlay out;
  std::size_t ia = 0, ib = 0;
  double ra = a[0], rb = b[0];
  while (true) {
    const double step = std::min(ra, rb);
    if (step >= kWeightFloor || out.weights.empty()) {
      out.weights.push_back(step);
      out.from_a.push_back(static_cast<int>(ia));
      out.from_b.push_back(static_cast<int>(ib));
    } else {
      out.weights.back() += step;  // merge sliver into the previous cell
    }
    ra -= step;
    rb -= step;
    const bool adv_a = ra <= kWeightFloor;
    const bool adv_b = rb <= kWeightFloor;
    if (adv_a) {
      if (++ia == a.size()) break;
      ra += a[ia];
    }
    if (adv_b) {
      if (++ib == b.size()) break;
      rb += b[ib];
    }
  }
  // Renormalise away the accumulated float error.
  const double total = std::accumulate(out.weights.begin(), out.weights.end(), 0.0);
  for (double& w : out.weights) w /= total;
  return out;
}

}  // namespace

StepKernel StepKernel::constant(Alphabet alphabet, const std::vector<double>& probs) {
  StepKernel k;
  k.alphabet = alphabet;
  k.row_weights = {1.0};
  k.col_weights = {1.0};
  k.blocks = probs;
  k.validate();
  return k;
}

void StepKernel::validate() const {
  alphabet.validate();
  check_axis_weights(row_weights, "StepKernel rows");
  check_axis_weights(col_weights, "StepKernel cols");
  const std::size_t expect = row_weights.size() * col_weights.size() * static_cast<std::size_t>(alphabet.size);
  if (blocks.size() != expect) throw std::invalid_argument("StepKernel: block buffer size mismatch");
  for (int i = 0; i < num_rows(); ++i) {
    for (int j = 0; j < num_cols(); ++j) check_prob_vector(block(i, j), "StepKernel block");
  }
}

Partition Partition::trivial(std::span<const double> cell_weights) {
  Partition p;
  p.assignment.assign(cell_weights.size(), 0);
  p.classes = 1;
  p.weights = {std::accumulate(cell_weights.begin(), cell_weights.end(), 0.0)};
  return p;
}

Partition Partition::identity(std::span<const double> cell_weights) {
  Partition p;
  p.assignment.resize(cell_weights.size());
  std::iota(p.assignment.begin(), p.assignment.end(), 0);
  p.classes = static_cast<int>(cell_weights.size());
  p.weights.assign(cell_weights.begin(), cell_weights.end());
  return p;
}

Partition Partition::from_assignment(std::vector<int> assignment, std::span<const double> cell_weights) {
  if (assignment.size() != cell_weights.size()) {
    throw std::invalid_argument("Partition: assignment length mismatch");
  }
  // Compress class ids to 0..classes-1 preserving first-appearance order.
  Partition p;
  p.assignment = std::move(assignment);
  std::vector<int> remap;
  for (int& c : p.assignment) {
    if (c < 0) throw std::invalid_argument("Partition: negative class id");
    auto it = std::find(remap.begin(), remap.end(), c);
    if (it == remap.end()) {
      remap.push_back(c);
      c = static_cast<int>(remap.size()) - 1;
    } else {
      c = static_cast<int>(it - remap.begin());
    }
  }
  p.classes = static_cast<int>(remap.size());
  p.weights.assign(static_cast<std::size_t>(p.classes), 0.0);
  for (std::size_t i = 0; i < p.assignment.size(); ++i) {
    p.weights[static_cast<std::size_t>(p.assignment[i])] += cell_weights[i];
  }
  return p;
}

void Partition::validate(int cells) const {
  if (static_cast<int>(assignment.size()) != cells) {
    throw std::invalid_argument("Partition: does not match grid cell count");
  }
  for (int c : assignment) {
    if (c < 0 || c >= classes) throw std::invalid_argument("Partition: class id out of range");
  }
}

StepKernel discretize(Alphabet alphabet, int grid,
                      const std::function<std::vector<double>(double, double)>& fn) {
  if (grid < 1) throw std::invalid_argument("discretize: grid must be >= 1");
  StepKernel k;
  k.alphabet = alphabet;
  k.row_weights.assign(static_cast<std::size_t>(grid), 1.0 / grid);
  k.col_weights.assign(static_cast<std::size_t>(grid), 1.0 / grid);
  k.blocks.resize(static_cast<std::size_t>(grid) * grid * static_cast<std::size_t>(alphabet.size));
  for (int i = 0; i < grid; ++i) {
    const double s = (i + 0.5) / grid;
    for (int j = 0; j < grid; ++j) {
      const double x = (j + 0.5) / grid;
      std::vector<double> p = fn(s, x);
      if (static_cast<int>(p.size()) != alphabet.size) {
        throw std::invalid_argument("discretize: callback returned wrong arity");
      }
      check_prob_vector(p, "discretize");
      for (int w = 0; w < alphabet.size; ++w) k.at(i, j, w) = p[static_cast<std::size_t>(w)];
    }
  }
  return k;
}

StepKernel average(const StepKernel& kappa, const Partition& rows, const Partition& cols) {
  rows.validate(kappa.num_rows());
  cols.validate(kappa.num_cols());
  const int q = kappa.alphabet.size;
  const std::size_t cells = static_cast<std::size_t>(rows.classes) * static_cast<std::size_t>(cols.classes);
  std::vector<double> sums(cells * static_cast<std::size_t>(q), 0.0);
  std::vector<double> mass(cells, 0.0);
  for (int i = 0; i < kappa.num_rows(); ++i) {
    const int ci = rows.assignment[static_cast<std::size_t>(i)];
    const double pi = kappa.row_weights[static_cast<std::size_t>(i)];
    for (int j = 0; j < kappa.num_cols(); ++j) {
      const int cj = cols.assignment[static_cast<std::size_t>(j)];
      const double m = pi * kappa.col_weights[static_cast<std::size_t>(j)];
      const std::size_t cell = static_cast<std::size_t>(ci) * cols.classes + cj;
      mass[cell] += m;
      for (int w = 0; w < q; ++w) sums[cell * q + w] += m * kappa.at(i, j, w);
    }
  }
  StepKernel out = kappa;
  for (int i = 0; i < kappa.num_rows(); ++i) {
    const int ci = rows.assignment[static_cast<std::size_t>(i)];
    for (int j = 0; j < kappa.num_cols(); ++j) {
      const int cj = cols.assignment[static_cast<std::size_t>(j)];
      const std::size_t cell = static_cast<std::size_t>(ci) * cols.classes + cj;
      for (int w = 0; w < q; ++w) out.at(i, j, w) = sums[cell * q + w] / mass[cell];
    }
  }
  return out;
}

RealMatrix slice(const StepKernel& kappa, int symbol) {
  if (symbol < 0 || symbol >= kappa.alphabet.size) throw std::out_of_range("slice: symbol out of range");
  RealMatrix m = RealMatrix::zeros(kappa.num_rows(), kappa.num_cols());
  m.row_weights = kappa.row_weights;
  m.col_weights = kappa.col_weights;
  for (int i = 0; i < m.rows; ++i) {
    for (int j = 0; j < m.cols; ++j) m.value(i, j) = kappa.at(i, j, symbol);
  }
  return m;
}

RealMatrix bipartite_embed(const StepKernel& kappa, int symbol) {
  if (symbol < 0 || symbol >= kappa.alphabet.size) {
    throw std::out_of_range("bipartite_embed: symbol out of range");
  }
  const int k = kappa.num_rows();
  const int l = kappa.num_cols();
  RealMatrix m = RealMatrix::zeros(k + l, k + l);
  m.row_weights.resize(static_cast<std::size_t>(k + l));
  for (int i = 0; i < k; ++i) m.row_weights[static_cast<std::size_t>(i)] = kappa.row_weights[static_cast<std::size_t>(i)] / 2.0;
  for (int j = 0; j < l; ++j) m.row_weights[static_cast<std::size_t>(k + j)] = kappa.col_weights[static_cast<std::size_t>(j)] / 2.0;
  m.col_weights = m.row_weights;
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < l; ++j) {
      const double v = kappa.at(i, j, symbol);
      m.value(i, k + j) = v;
      m.value(k + j, i) = v;
    }
  }
  return m;
}

StepKernel tensor(const StepKernel& a, const StepKernel& b) {
  const Overlay cols = overlay_axes(a.col_weights, b.col_weights);
  const int qa = a.alphabet.size, qb = b.alphabet.size;
  Alphabet pair_alphabet{qa * qb};
  pair_alphabet.validate();
  StepKernel out;
  out.alphabet = pair_alphabet;
  out.col_weights = cols.weights;
  const int ka = a.num_rows(), kb = b.num_rows();
  out.row_weights.reserve(static_cast<std::size_t>(ka) * static_cast<std::size_t>(kb));
  for (int i = 0; i < ka; ++i) {
    for (int i2 = 0; i2 < kb; ++i2) {
      out.row_weights.push_back(a.row_weights[static_cast<std::size_t>(i)] *
                                b.row_weights[static_cast<std::size_t>(i2)]);
    }
  }
  const int l = static_cast<int>(cols.weights.size());
  out.blocks.resize(out.row_weights.size() * static_cast<std::size_t>(l) * static_cast<std::size_t>(qa * qb));
  for (int i = 0; i < ka; ++i) {
    for (int i2 = 0; i2 < kb; ++i2) {
      const int row = i * kb + i2;
      for (int j = 0; j < l; ++j) {
        auto pa = a.block(i, cols.from_a[static_cast<std::size_t>(j)]);
        auto pb = b.block(i2, cols.from_b[static_cast<std::size_t>(j)]);
        for (int w1 = 0; w1 < qa; ++w1) {
          for (int w2 = 0; w2 < qb; ++w2) {
            out.at(row, j, w1 * qb + w2) = pa[static_cast<std::size_t>(w1)] * pb[static_cast<std::size_t>(w2)];
          }
        }
      }
    }
  }
  return out;
}

StepKernel oplus(const StepKernel& a, const StepKernel& b) {
  const Overlay rows = overlay_axes(a.row_weights, b.row_weights);
  const int qa = a.alphabet.size, qb = b.alphabet.size;
  Alphabet pair_alphabet{qa * qb};
  pair_alphabet.validate();
  StepKernel out;
  out.alphabet = pair_alphabet;
  out.row_weights = rows.weights;
  const int la = a.num_cols(), lb = b.num_cols();
  out.col_weights.reserve(static_cast<std::size_t>(la) * static_cast<std::size_t>(lb));
  for (int j = 0; j < la; ++j) {
    for (int j2 = 0; j2 < lb; ++j2) {
      out.col_weights.push_back(a.col_weights[static_cast<std::size_t>(j)] *
                                b.col_weights[static_cast<std::size_t>(j2)]);
    }
  }
  const int k = static_cast<int>(rows.weights.size());
  out.blocks.resize(static_cast<std::size_t>(k) * out.col_weights.size() * static_cast<std::size_t>(qa * qb));
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < la; ++j) {
      for (int j2 = 0; j2 < lb; ++j2) {
        const int col = j * lb + j2;
        auto pa = a.block(rows.from_a[static_cast<std::size_t>(i)], j);
        auto pb = b.block(rows.from_b[static_cast<std::size_t>(i)], j2);
        for (int w1 = 0; w1 < qa; ++w1) {
          for (int w2 = 0; w2 < qb; ++w2) {
            out.at(i, col, w1 * qb + w2) = pa[static_cast<std::size_t>(w1)] * pb[static_cast<std::size_t>(w2)];
          }
        }
      }
    }
  }
  return out;
}

std::pair<StepKernel, StepKernel> common_refinement(const StepKernel& a, const StepKernel& b) {
  if (!(a.alphabet == b.alphabet)) throw std::invalid_argument("common_refinement: alphabet mismatch");
  const Overlay rows = overlay_axes(a.row_weights, b.row_weights);
  const Overlay cols = overlay_axes(a.col_weights, b.col_weights);
  const int q = a.alphabet.size;
  auto rebuild = [&](const StepKernel& src, const std::vector<int>& row_map, const std::vector<int>& col_map) {
    StepKernel out;
    out.alphabet = src.alphabet;
    out.row_weights = rows.weights;
    out.col_weights = cols.weights;
    out.blocks.resize(rows.weights.size() * cols.weights.size() * static_cast<std::size_t>(q));
    for (std::size_t i = 0; i < rows.weights.size(); ++i) {
      for (std::size_t j = 0; j < cols.weights.size(); ++j) {
        auto p = src.block(row_map[i], col_map[j]);
        for (int w = 0; w < q; ++w) out.at(static_cast<int>(i), static_cast<int>(j), w) = p[static_cast<std::size_t>(w)];
      }
    }
    return out;
  };
  return {rebuild(a, rows.from_a, cols.from_a), rebuild(b, rows.from_b, cols.from_b)};
}

WeakRegularityResult weak_regularity(const StepKernel& kappa, double eps, int max_iters) {
  if (!(eps > 0.0)) throw std::invalid_argument("weak_regularity: eps must be positive");
  if (max_iters < 0) throw std::invalid_argument("weak_regularity: max_iters must be >= 0");
  kappa.validate();

  WeakRegularityResult res;
  res.rows = Partition::trivial(kappa.row_weights);
  res.cols = Partition::trivial(kappa.col_weights);
  const bool exact_ok = std::min(kappa.num_rows(), kappa.num_cols()) <= kMaxExactCutAxis;

  for (int iter = 0; iter <= max_iters; ++iter) {
    const StepKernel avg = average(kappa, res.rows, res.cols);
    double worst = -1.0;
    CutWitness witness;
    for (int w = 0; w < kappa.alphabet.size; ++w) {
      RealMatrix diff = slice(kappa, w);
      const RealMatrix avg_slice = slice(avg, w);
      for (std::size_t t = 0; t < diff.values.size(); ++t) diff.values[t] -= avg_slice.values[t];
      CutNormResult r = exact_ok ? cut_norm_exact(diff)
                                 : cut_norm_alternating(diff, 32, 0x5eedULL + static_cast<std::uint64_t>(iter));
      if (r.value > worst) {  // ties keep the smallest symbol
        worst = r.value;
        witness = r.witness;
        witness.symbol = w;
      }
    }
    res.residual = worst;
    res.certified = exact_ok;
    res.iterations = iter;
    if (worst < eps) {
      res.reached_target = true;
      return res;
    }
    if (iter == max_iters) break;

    // Split both partitions along the witness rectangle.
    auto split = [](const Partition& p, std::span<const double> cell_weights, const std::vector<int>& chosen) {
      std::vector<char> in(p.assignment.size(), 0);
      for (int c : chosen) in[static_cast<std::size_t>(c)] = 1;
      std::vector<int> next(p.assignment.size());
      for (std::size_t i = 0; i < p.assignment.size(); ++i) {
        next[i] = p.assignment[i] * 2 + in[i];
      }
      return Partition::from_assignment(std::move(next), cell_weights);
    };
    res.rows = split(res.rows, kappa.row_weights, witness.row_set);
    res.cols = split(res.cols, kappa.col_weights, witness.col_set);
  }
  res.reached_target = res.residual < eps;
  return res;
}

}  // namespace cutlim
