#include "cutlim/law.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "cutlim/rng.hpp"

namespace cutlim {

void Law::canonicalize() {
  std::sort(atoms.begin(), atoms.end(), [](const LawAtom& a, const LawAtom& b) {
    if (a.values != b.values) return a.values < b.values;
    return a.weight > b.weight;
  });
  std::vector<LawAtom> merged;
  merged.reserve(atoms.size());
  for (auto& atom : atoms) {
    if (!merged.empty() && merged.back().values == atom.values) {
      merged.back().weight += atom.weight;
    } else {
      merged.push_back(std::move(atom));
    }
  }
  atoms = std::move(merged);
}

void Law::validate() const {
  alphabet.validate();
  if (col_weights.empty()) throw std::invalid_argument("Law: empty column grid");
  double cw = 0.0;
  for (double w : col_weights) {
    if (!(w > 0.0)) throw std::invalid_argument("Law: column weights must be positive");
    cw += w;
  }
  if (std::abs(cw - 1.0) > 1e-9) throw std::invalid_argument("Law: column weights do not sum to 1");
  if (atoms.empty()) throw std::invalid_argument("Law: no atoms");
  double aw = 0.0;
  const std::size_t expect = col_weights.size() * static_cast<std::size_t>(alphabet.size);
  for (const auto& atom : atoms) {
    if (!(atom.weight > 0.0)) throw std::invalid_argument("Law: atom weights must be positive");
    aw += atom.weight;
    if (atom.values.size() != expect) throw std::invalid_argument("Law: atom profile size mismatch");
  }
  if (std::abs(aw - 1.0) > 1e-9) throw std::invalid_argument("Law: atom weights do not sum to 1");
  for (int a = 0; a < num_atoms(); ++a) {
    for (int c = 0; c < num_cols(); ++c) {
      double total = 0.0;
      for (double v : cell(a, c)) {
        if (!(v >= -1e-12)) throw std::invalid_argument("Law: negative probability");
        total += v;
      }
      if (std::abs(total - 1.0) > 1e-12) throw std::invalid_argument("Law: cell is not a probability vector");
    }
  }
}

bool operator==(const Law& a, const Law& b) {
  return a.alphabet == b.alphabet && a.col_weights == b.col_weights && [&] {
    if (a.atoms.size() != b.atoms.size()) return false;
    for (std::size_t i = 0; i < a.atoms.size(); ++i) {
      if (a.atoms[i].weight != b.atoms[i].weight || a.atoms[i].values != b.atoms[i].values) return false;
    }
    return true;
  }();
}

Law embed(const DiscreteMeasure& mu) {
  const int n = mu.dimension();
  const int q = mu.alphabet().size;
  Law law;
  law.alphabet = mu.alphabet();
  law.col_weights.assign(static_cast<std::size_t>(n), 1.0 / n);
  law.atoms.reserve(mu.support_size());
  for (const auto& [c, w] : mu.support()) {
    LawAtom atom;
    atom.weight = w;
    atom.values.assign(static_cast<std::size_t>(n) * static_cast<std::size_t>(q), 0.0);
    for (int i = 0; i < n; ++i) {
      atom.values[static_cast<std::size_t>(i) * q + c[static_cast<std::size_t>(i)]] = 1.0;
    }
    law.atoms.push_back(std::move(atom));
  }
  law.canonicalize();
  law.validate();
  return law;
}

StepKernel to_kernel(const Law& mu) {
  StepKernel k;
  k.alphabet = mu.alphabet;
  k.col_weights = mu.col_weights;
  k.row_weights.reserve(mu.atoms.size());
  for (const auto& atom : mu.atoms) k.row_weights.push_back(atom.weight);
  k.blocks.reserve(mu.atoms.size() * mu.col_weights.size() * static_cast<std::size_t>(mu.alphabet.size));
  for (const auto& atom : mu.atoms) {
    k.blocks.insert(k.blocks.end(), atom.values.begin(), atom.values.end());
  }
  return k;
}

Law from_kernel(const StepKernel& kappa) {
  Law law;
  law.alphabet = kappa.alphabet;
  law.col_weights = kappa.col_weights;
  const std::size_t stride = kappa.col_weights.size() * static_cast<std::size_t>(kappa.alphabet.size);
  law.atoms.reserve(kappa.row_weights.size());
  for (int i = 0; i < kappa.num_rows(); ++i) {
    LawAtom atom;
    atom.weight = kappa.row_weights[static_cast<std::size_t>(i)];
    atom.values.assign(kappa.blocks.begin() + static_cast<std::ptrdiff_t>(stride * static_cast<std::size_t>(i)),
                       kappa.blocks.begin() + static_cast<std::ptrdiff_t>(stride * (static_cast<std::size_t>(i) + 1)));
    law.atoms.push_back(std::move(atom));
  }
  law.canonicalize();
  law.validate();
  return law;
}

std::vector<double> mean_profile(const Law& mu) {
  std::vector<double> mean(mu.col_weights.size() * static_cast<std::size_t>(mu.alphabet.size), 0.0);
  for (const auto& atom : mu.atoms) {
    for (std::size_t t = 0; t < mean.size(); ++t) mean[t] += atom.weight * atom.values[t];
  }
  return mean;
}

Law extremal(const Law& mu) {
  Law out;
  out.alphabet = mu.alphabet;
  out.col_weights = mu.col_weights;
  out.atoms.push_back(LawAtom{1.0, mean_profile(mu)});
  out.validate();
  return out;
}

double extremal_l1_bracket(const Law& a, const Law& b) {
  auto [ka, kb] = common_refinement(to_kernel(extremal(a)), to_kernel(extremal(b)));
  const int q = ka.alphabet.size;
  double best = 0.0;
  for (int w = 0; w < q; ++w) {
    double l1 = 0.0;
    for (int j = 0; j < ka.num_cols(); ++j) {
      l1 += ka.col_weights[static_cast<std::size_t>(j)] * std::abs(ka.at(0, j, w) - kb.at(0, j, w));
    }
    best = std::max(best, l1);
  }
  return best;
}

ExtremalityBound extremality_defect(const Law& mu, const ExtremalityOptions& opts) {
  const StepKernel full = to_kernel(mu);
  const StepKernel bar = to_kernel(extremal(mu));
  auto [a, b] = common_refinement(full, bar);
  const int q = a.alphabet.size;
  const bool exact_ok = std::min(a.num_rows(), a.num_cols()) <= kMaxExactCutAxis;
  if (!exact_ok && !opts.allow_l1_fallback) {
    throw SizeLimitError("extremality_defect: grid too large for exact cut norms");
  }
  ExtremalityBound bound;
  bound.exact_cut = exact_ok;
  for (int w = 0; w < q; ++w) {
    RealMatrix diff = slice(a, w);
    const RealMatrix other = slice(b, w);
    for (std::size_t t = 0; t < diff.values.size(); ++t) diff.values[t] -= other.values[t];
    double value = 0.0;
    if (exact_ok) {
      value = cut_norm_exact(diff).value;
    } else {
      // Certified fallback: sup over rectangles is at most
      // (integral |f| + |integral f|) / 2.
      double l1 = 0.0, total = 0.0;
      for (int i = 0; i < diff.rows; ++i) {
        for (int j = 0; j < diff.cols; ++j) {
          const double mass = diff.row_weight(i) * diff.col_weight(j) * diff.value(i, j);
          l1 += std::abs(mass);
          total += mass;
        }
      }
      value = 0.5 * (l1 + std::abs(total));
    }
    bound.upper = std::max(bound.upper, value);
  }
  return bound;
}

OverlapResult multi_overlap(const Law& mu, int ell, std::span<const int> symbols,
                            const OverlapOptions& opts) {
  if (ell < 1) throw std::invalid_argument("multi_overlap: ell must be >= 1");
  if (symbols.empty()) throw std::invalid_argument("multi_overlap: need at least one symbol");
  for (int w : symbols) {
    if (w < 0 || w >= mu.alphabet.size) throw std::out_of_range("multi_overlap: symbol out of range");
  }
  const int m = static_cast<int>(symbols.size());
  const int atoms = mu.num_atoms();

  auto inner = [&](std::span<const int> tuple) {
    double integral = 0.0;
    for (int c = 0; c < mu.num_cols(); ++c) {
      double prod = mu.col_weights[static_cast<std::size_t>(c)];
      for (int r = 0; r < m; ++r) {
        prod *= mu.cell(tuple[static_cast<std::size_t>(r)], c)[static_cast<std::size_t>(symbols[static_cast<std::size_t>(r)])];
      }
      integral += prod;
    }
    return std::pow(integral, ell);
  };

  double tuple_count = std::pow(static_cast<double>(atoms), m);
  OverlapResult out;
  if (tuple_count <= static_cast<double>(opts.max_enumeration)) {
    std::vector<int> tuple(static_cast<std::size_t>(m), 0);
    double total = 0.0;
    while (true) {
      double w = 1.0;
      for (int r = 0; r < m; ++r) w *= mu.atoms[static_cast<std::size_t>(tuple[static_cast<std::size_t>(r)])].weight;
      total += w * inner(tuple);
      int pos = m - 1;
      while (pos >= 0 && tuple[static_cast<std::size_t>(pos)] == atoms - 1) tuple[static_cast<std::size_t>(pos--)] = 0;
      if (pos < 0) break;
      ++tuple[static_cast<std::size_t>(pos)];
    }
    out.value = total;
    out.exact = true;
    return out;
  }

  // Monte Carlo over independent atom replicas with a derived stream.
  CounterRng rng = CounterRng(opts.seed).derive(0x0f3a11);
  std::vector<double> weights;
  weights.reserve(mu.atoms.size());
  for (const auto& a : mu.atoms) weights.push_back(a.weight);
  std::vector<int> tuple(static_cast<std::size_t>(m));
  double sum = 0.0, sum_sq = 0.0;
  for (int s = 0; s < opts.mc_samples; ++s) {
    for (int r = 0; r < m; ++r) tuple[static_cast<std::size_t>(r)] = static_cast<int>(rng.next_weighted(weights));
    const double v = inner(tuple);
    sum += v;
    sum_sq += v * v;
  }
  const double n = static_cast<double>(opts.mc_samples);
  out.value = sum / n;
  out.std_error = std::sqrt(std::max(0.0, sum_sq / n - out.value * out.value) / n);
  out.exact = false;
  return out;
}

}  // namespace cutlim
