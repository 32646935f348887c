#include "cutlim/distance.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <stdexcept>

#include "cutlim/law.hpp"
#include "cutlim/lp.hpp"
#include "cutlim/rng.hpp"
#include "cutlim/sampling.hpp"

namespace cutlim {

namespace {

constexpr int kMaxAdversaryDim = 24;

void check_pairable(const DiscreteMeasure& a, const DiscreteMeasure& b, const char* op) {
  if (!(a.alphabet() == b.alphabet()) || a.dimension() != b.dimension()) {
    throw std::invalid_argument(std::string(op) + ": shape mismatch");
  }
}

std::vector<int> identity_perm(int n) {
  std::vector<int> p(static_cast<std::size_t>(n));
  std::iota(p.begin(), p.end(), 0);
  return p;
}

}  // namespace

void Coupling::validate(double tol) const {
  check_pairable(left, right, "Coupling");
  std::vector<double> lm(left.support_size(), 0.0);
  std::vector<double> rm(right.support_size(), 0.0);
  for (const auto& e : entries) {
    if (e.left_index < 0 || e.left_index >= static_cast<int>(left.support_size()) ||
        e.right_index < 0 || e.right_index >= static_cast<int>(right.support_size())) {
      throw std::invalid_argument("Coupling: entry index out of range");
    }
    if (e.mass < -tol) throw std::invalid_argument("Coupling: negative mass");
    lm[static_cast<std::size_t>(e.left_index)] += e.mass;
    rm[static_cast<std::size_t>(e.right_index)] += e.mass;
  }
  if (product_scale > 0.0) {
    if (left_residual.size() != left.support_size() || right_residual.size() != right.support_size()) {
      throw std::invalid_argument("Coupling: residual size mismatch");
    }
    double ls = 0.0, rs = 0.0;
    for (std::size_t i = 0; i < left_residual.size(); ++i) {
      lm[i] += left_residual[i];
      ls += left_residual[i];
    }
    for (std::size_t j = 0; j < right_residual.size(); ++j) {
      rm[j] += right_residual[j];
      rs += right_residual[j];
    }
    if (std::abs(ls - product_scale) > tol || std::abs(rs - product_scale) > tol) {
      throw std::invalid_argument("Coupling: residual masses do not match product_scale");
    }
  }
  auto lsup = left.support();
  auto rsup = right.support();
  for (std::size_t i = 0; i < lm.size(); ++i) {
    if (std::abs(lm[i] - lsup[i].second) > tol) {
      throw std::invalid_argument("Coupling: left marginal mismatch");
    }
  }
  for (std::size_t j = 0; j < rm.size(); ++j) {
    if (std::abs(rm[j] - rsup[j].second) > tol) {
      throw std::invalid_argument("Coupling: right marginal mismatch");
    }
  }
}

Coupling diagonal_coupling(const DiscreteMeasure& mu) {
  Coupling g;
  g.left = mu;
  g.right = mu;
  g.entries.reserve(mu.support_size());
  for (int i = 0; i < static_cast<int>(mu.support_size()); ++i) {
    g.entries.push_back({i, i, mu.support()[static_cast<std::size_t>(i)].second});
  }
  return g;
}

Coupling independent_coupling(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  check_pairable(mu, nu, "independent_coupling");
  Coupling g;
  g.left = mu;
  g.right = nu;
  g.product_scale = 1.0;
  g.left_residual.reserve(mu.support_size());
  g.right_residual.reserve(nu.support_size());
  for (const auto& [c, w] : mu.support()) g.left_residual.push_back(w);
  for (const auto& [c, w] : nu.support()) g.right_residual.push_back(w);
  return g;
}

Coupling greedy_tv_coupling(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  check_pairable(mu, nu, "greedy_tv_coupling");
  Coupling g;
  g.left = mu;
  g.right = nu;
  g.left_residual.assign(mu.support_size(), 0.0);
  g.right_residual.assign(nu.support_size(), 0.0);
  auto ls = mu.support();
  auto rs = nu.support();
  double shared = 0.0;
  std::size_t i = 0, j = 0;
  // Walk the sorted supports: put min(mu, nu) on the diagonal.
  while (i < ls.size() && j < rs.size()) {
    if (ls[i].first < rs[j].first) {
      g.left_residual[i] = ls[i].second;
      ++i;
    } else if (rs[j].first < ls[i].first) {
      g.right_residual[j] = rs[j].second;
      ++j;
    } else {
      const double m = std::min(ls[i].second, rs[j].second);
      if (m > 0.0) g.entries.push_back({static_cast<int>(i), static_cast<int>(j), m});
      shared += m;
      g.left_residual[i] = ls[i].second - m;
      g.right_residual[j] = rs[j].second - m;
      ++i;
      ++j;
    }
  }
  for (; i < ls.size(); ++i) g.left_residual[i] = ls[i].second;
  for (; j < rs.size(); ++j) g.right_residual[j] = rs[j].second;
  g.product_scale = 1.0 - shared;
  if (g.product_scale <= 1e-14) {
    g.product_scale = 0.0;
    g.left_residual.clear();
    g.right_residual.clear();
  }
  return g;
}

namespace {

// Exact sup over (S, X, omega) for a fixed coupling and permutation. All
// per-entry coordinate counts are integers, so the Gray-code sweep is
// drift-free. The event S folds greedily per sign: for gamma >= 0,
// sup_S sum_{e in S} gamma_e f_e = sum_e gamma_e (f_e)_+.
struct AdversarySweep {
  const Coupling& g;
  std::span<const int> perm;
  int n;
  int q;

  AdversaryResult run() const {
    AdversaryResult best;
    int best_symbol = -1, best_sign = +1;
    std::uint32_t best_mask = 0;
    for (int w = 0; w < q; ++w) {
      sweep_symbol(w, best, best_symbol, best_sign, best_mask);
    }
    if (best_symbol < 0) {  // zero adversary value; empty witness
      best.value = 0.0;
      return best;
    }
    finalize(best, best_symbol, best_sign, best_mask);
    return best;
  }

 private:
  int left_hit(int li, int x, int w) const {
    return g.left.support()[static_cast<std::size_t>(li)].first[static_cast<std::size_t>(x)] == w ? 1 : 0;
  }
  int right_hit(int ri, int x, int w) const {
    const int y = perm.empty() ? x : perm[static_cast<std::size_t>(x)];
    return g.right.support()[static_cast<std::size_t>(ri)].first[static_cast<std::size_t>(y)] == w ? 1 : 0;
  }

  void sweep_symbol(int w, AdversaryResult& best, int& best_symbol, int& best_sign,
                    std::uint32_t& best_mask) const {
    const std::size_t ne = g.entries.size();
    const std::size_t nl = g.left_residual.size();
    const std::size_t nr = g.right_residual.size();
    const bool product = g.product_scale > 0.0;

    std::vector<int> f(ne, 0);
    double pos = 0.0, neg = 0.0;
    std::vector<int> fl(nl, 0), fr(nr, 0);
    std::vector<double> u(static_cast<std::size_t>(n) + 1, 0.0);
    std::vector<double> v(static_cast<std::size_t>(n) + 1, 0.0);
    if (product) {
      for (std::size_t i = 0; i < nl; ++i) u[0] += g.left_residual[i];
      for (std::size_t j = 0; j < nr; ++j) v[0] += g.right_residual[j];
    }
    std::vector<double> vcnt(static_cast<std::size_t>(n) + 2, 0.0);
    std::vector<double> vsum(static_cast<std::size_t>(n) + 2, 0.0);
    std::vector<double> ucnt(static_cast<std::size_t>(n) + 2, 0.0);
    std::vector<double> usum(static_cast<std::size_t>(n) + 2, 0.0);

    std::uint32_t gray = 0;
    const std::uint64_t subsets = 1ULL << n;
    for (std::uint64_t step = 1; step < subsets; ++step) {
      const int x = std::countr_zero(step);
      const bool insert = !(gray >> x & 1u);
      gray ^= 1u << x;
      const int dir = insert ? 1 : -1;

      for (std::size_t e = 0; e < ne; ++e) {
        const auto& ent = g.entries[e];
        const int d = left_hit(ent.left_index, x, w) - right_hit(ent.right_index, x, w);
        if (d == 0) continue;
        const int old = f[e];
        const int next = old + dir * d;
        f[e] = next;
        const double m = ent.mass;
        pos += m * (std::max(next, 0) - std::max(old, 0));
        neg += m * (std::max(-next, 0) - std::max(-old, 0));
      }

      double prod_pos = 0.0, prod_neg = 0.0;
      if (product) {
        for (std::size_t i = 0; i < nl; ++i) {
          const int d = left_hit(static_cast<int>(i), x, w);
          if (d == 0) continue;
          u[static_cast<std::size_t>(fl[i])] -= g.left_residual[i];
          fl[i] += dir * d;
          u[static_cast<std::size_t>(fl[i])] += g.left_residual[i];
        }
        for (std::size_t j = 0; j < nr; ++j) {
          const int d = right_hit(static_cast<int>(j), x, w);
          if (d == 0) continue;
          v[static_cast<std::size_t>(fr[j])] -= g.right_residual[j];
          fr[j] += dir * d;
          v[static_cast<std::size_t>(fr[j])] += g.right_residual[j];
        }
        // Prefix sums over counts give sum_{k > k'} u_k v_k' (k - k') and
        // the symmetric term in O(n).
        vcnt[0] = vsum[0] = ucnt[0] = usum[0] = 0.0;
        for (int k = 0; k <= n; ++k) {
          vcnt[static_cast<std::size_t>(k) + 1] = vcnt[static_cast<std::size_t>(k)] + v[static_cast<std::size_t>(k)];
          vsum[static_cast<std::size_t>(k) + 1] = vsum[static_cast<std::size_t>(k)] + k * v[static_cast<std::size_t>(k)];
          ucnt[static_cast<std::size_t>(k) + 1] = ucnt[static_cast<std::size_t>(k)] + u[static_cast<std::size_t>(k)];
          usum[static_cast<std::size_t>(k) + 1] = usum[static_cast<std::size_t>(k)] + k * u[static_cast<std::size_t>(k)];
        }
        for (int k = 1; k <= n; ++k) {
          prod_pos += u[static_cast<std::size_t>(k)] * (k * vcnt[static_cast<std::size_t>(k)] - vsum[static_cast<std::size_t>(k)]);
          prod_neg += v[static_cast<std::size_t>(k)] * (k * ucnt[static_cast<std::size_t>(k)] - usum[static_cast<std::size_t>(k)]);
        }
        const double inv = 1.0 / g.product_scale;
        prod_pos *= inv;
        prod_neg *= inv;
      }

      const double val_pos = pos + prod_pos;
      const double val_neg = neg + prod_neg;
      if (val_pos > best.value * n) {
        best.value = val_pos / n;
        best_symbol = w;
        best_sign = +1;
        best_mask = gray;
      }
      if (val_neg > best.value * n) {
        best.value = val_neg / n;
        best_symbol = w;
        best_sign = -1;
        best_mask = gray;
      }
    }
  }

  void finalize(AdversaryResult& best, int symbol, int sign, std::uint32_t mask) const {
    best.witness.symbol = symbol;
    best.witness.col_set.clear();
    for (int x = 0; x < n; ++x) {
      if (mask >> x & 1u) best.witness.col_set.push_back(x);
    }
    // Fresh evaluation of the chosen (X, omega, sign).
    double total = 0.0;
    best.witness.row_set.clear();
    for (std::size_t e = 0; e < g.entries.size(); ++e) {
      int f = 0;
      for (int x : best.witness.col_set) {
        f += left_hit(g.entries[e].left_index, x, symbol) - right_hit(g.entries[e].right_index, x, symbol);
      }
      if (sign * f > 0) {
        best.witness.row_set.push_back(static_cast<int>(e));
        total += g.entries[e].mass * f;
      }
    }
    if (g.product_scale > 0.0) {
      for (std::size_t i = 0; i < g.left_residual.size(); ++i) {
        if (g.left_residual[i] == 0.0) continue;
        int fi = 0;
        for (int x : best.witness.col_set) fi += left_hit(static_cast<int>(i), x, symbol);
        for (std::size_t j = 0; j < g.right_residual.size(); ++j) {
          if (g.right_residual[j] == 0.0) continue;
          int fj = 0;
          for (int x : best.witness.col_set) fj += right_hit(static_cast<int>(j), x, symbol);
          const int d = fi - fj;
          if (sign * d > 0) total += g.left_residual[i] * g.right_residual[j] / g.product_scale * d;
        }
      }
    }
    best.value = std::abs(total) / n;
    best.witness.value = sign * best.value;
  }
};

}  // namespace

AdversaryResult adversary_value(const Coupling& coupling, std::span<const int> perm) {
  const int n = coupling.left.dimension();
  check_pairable(coupling.left, coupling.right, "adversary_value");
  if (n > kMaxAdversaryDim) {
    throw SizeLimitError("adversary_value: dimension exceeds " + std::to_string(kMaxAdversaryDim));
  }
  if (!perm.empty() && static_cast<int>(perm.size()) != n) {
    throw std::invalid_argument("adversary_value: permutation length mismatch");
  }
  AdversarySweep sweep{coupling, perm, n, coupling.left.alphabet().size};
  return sweep.run();
}

DiscreteMeasure permute_coordinates(const DiscreteMeasure& mu, std::span<const int> perm) {
  const int n = mu.dimension();
  if (static_cast<int>(perm.size()) != n) throw std::invalid_argument("permute_coordinates: bad length");
  std::vector<DiscreteMeasure::Entry> entries;
  entries.reserve(mu.support_size());
  Config c(static_cast<std::size_t>(n));
  for (const auto& [src, w] : mu.support()) {
    for (int i = 0; i < n; ++i) c[static_cast<std::size_t>(i)] = src[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])];
    entries.emplace_back(c, w);
  }
  return DiscreteMeasure(mu.alphabet(), n, std::move(entries));
}

namespace {

bool measures_close(const DiscreteMeasure& a, const DiscreteMeasure& b, double tol) {
  if (a.support_size() != b.support_size()) return false;
  auto sa = a.support();
  auto sb = b.support();
  for (std::size_t i = 0; i < sa.size(); ++i) {
    if (sa[i].first != sb[i].first || std::abs(sa[i].second - sb[i].second) > tol) return false;
  }
  return true;
}

}  // namespace

bool is_exchangeable(const DiscreteMeasure& mu) {
  const int n = mu.dimension();
  if (n < 2) return true;
  // Transposition (0 1) and the n-cycle generate the symmetric group.
  std::vector<int> swap01 = identity_perm(n);
  std::swap(swap01[0], swap01[1]);
  std::vector<int> cycle(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) cycle[static_cast<std::size_t>(i)] = (i + 1) % n;
  return measures_close(mu, permute_coordinates(mu, swap01), 1e-12) &&
         measures_close(mu, permute_coordinates(mu, cycle), 1e-12);
}

namespace {

// Cutting-plane LP for min over couplings of the adversary value at a
// fixed permutation. Variables: one mass per support pair plus t.
struct CouplingLp {
  const DiscreteMeasure& mu;
  const DiscreteMeasure& nu;
  std::span<const int> perm;
  double tolerance;
  bool full_enumeration;

  struct Outcome {
    double value = 0.0;
    Coupling coupling;
    CutWitness witness;
    int rounds = 0;
  };

  Outcome solve() const {
    const int n = mu.dimension();
    const int q = mu.alphabet().size;
    const int sl = static_cast<int>(mu.support_size());
    const int sr = static_cast<int>(nu.support_size());
    const int vars = sl * sr + 1;  // gamma entries then t
    const int t_var = sl * sr;

    LpProblem p;
    p.num_vars = vars;
    p.objective.assign(static_cast<std::size_t>(vars), 0.0);
    p.objective[static_cast<std::size_t>(t_var)] = 1.0;
    for (int i = 0; i < sl; ++i) {
      std::vector<double> row(static_cast<std::size_t>(vars), 0.0);
      for (int j = 0; j < sr; ++j) row[static_cast<std::size_t>(i * sr + j)] = 1.0;
      p.eq_rows.push_back(std::move(row));
      p.eq_rhs.push_back(mu.support()[static_cast<std::size_t>(i)].second);
    }
    for (int j = 0; j + 1 < sr; ++j) {  // last right row is redundant
      std::vector<double> row(static_cast<std::size_t>(vars), 0.0);
      for (int i = 0; i < sl; ++i) row[static_cast<std::size_t>(i * sr + j)] = 1.0;
      p.eq_rows.push_back(std::move(row));
      p.eq_rhs.push_back(nu.support()[static_cast<std::size_t>(j)].second);
    }

    auto coordinate_hits = [&](int x, int w, std::vector<int>& lh, std::vector<int>& rh) {
      const int y = perm.empty() ? x : perm[static_cast<std::size_t>(x)];
      for (int i = 0; i < sl; ++i) {
        lh[static_cast<std::size_t>(i)] =
            mu.support()[static_cast<std::size_t>(i)].first[static_cast<std::size_t>(x)] == w ? 1 : 0;
      }
      for (int j = 0; j < sr; ++j) {
        rh[static_cast<std::size_t>(j)] =
            nu.support()[static_cast<std::size_t>(j)].first[static_cast<std::size_t>(y)] == w ? 1 : 0;
      }
    };

    // Adds the linearised constraint sum_e gamma_e (sign f_e)_+ / n <= t.
    auto add_witness_row = [&](const std::vector<int>& cols, int w, int sign) {
      std::vector<int> lh(static_cast<std::size_t>(sl)), rh(static_cast<std::size_t>(sr));
      std::vector<int> fl(static_cast<std::size_t>(sl), 0), fr(static_cast<std::size_t>(sr), 0);
      for (int x : cols) {
        coordinate_hits(x, w, lh, rh);
        for (int i = 0; i < sl; ++i) fl[static_cast<std::size_t>(i)] += lh[static_cast<std::size_t>(i)];
        for (int j = 0; j < sr; ++j) fr[static_cast<std::size_t>(j)] += rh[static_cast<std::size_t>(j)];
      }
      std::vector<double> row(static_cast<std::size_t>(vars), 0.0);
      for (int i = 0; i < sl; ++i) {
        for (int j = 0; j < sr; ++j) {
          const int f = sign * (fl[static_cast<std::size_t>(i)] - fr[static_cast<std::size_t>(j)]);
          if (f > 0) row[static_cast<std::size_t>(i * sr + j)] = static_cast<double>(f) / n;
        }
      }
      row[static_cast<std::size_t>(t_var)] = -1.0;
      p.le_rows.push_back(std::move(row));
      p.le_rhs.push_back(0.0);
    };

    std::set<std::tuple<std::uint32_t, int, int>> seen;
    auto remember = [&](const std::vector<int>& cols, int w, int sign) {
      std::uint32_t mask = 0;
      for (int x : cols) mask |= 1u << x;
      return seen.insert({mask, w, sign}).second;
    };

    if (full_enumeration) {
      for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
        std::vector<int> cols;
        for (int x = 0; x < n; ++x) {
          if (mask >> x & 1u) cols.push_back(x);
        }
        for (int w = 0; w < q; ++w) {
          for (int sign : {+1, -1}) add_witness_row(cols, w, sign);
        }
      }
    } else {
      std::vector<int> full = identity_perm(n);
      for (int w = 0; w < q; ++w) {
        for (int sign : {+1, -1}) {
          add_witness_row(full, w, sign);
          remember(full, w, sign);
        }
      }
    }

    Outcome out;
    for (int round = 0; round < 600; ++round) {
      ++out.rounds;
      LpSolution sol = solve_lp(p);
      if (sol.status != LpSolution::Status::kOptimal) {
        throw NumericError("discrete_cut_distance: coupling LP failed");
      }
      Coupling g;
      g.left = mu;
      g.right = nu;
      for (int i = 0; i < sl; ++i) {
        for (int j = 0; j < sr; ++j) {
          const double m = sol.x[static_cast<std::size_t>(i * sr + j)];
          if (m > 1e-13) g.entries.push_back({i, j, m});
        }
      }
      AdversaryResult adv = adversary_value(g, perm);
      if (full_enumeration || adv.value <= sol.objective + tolerance) {
        out.value = adv.value;
        out.coupling = std::move(g);
        out.witness = adv.witness;
        return out;
      }
      const int sign = adv.witness.value >= 0.0 ? +1 : -1;
      if (!remember(adv.witness.col_set, adv.witness.symbol, sign)) {
        // Separation returned a known row; numerically stuck. Accept the
        // certified value of the current coupling.
        out.value = adv.value;
        out.coupling = std::move(g);
        out.witness = adv.witness;
        return out;
      }
      add_witness_row(adv.witness.col_set, adv.witness.symbol, sign);
    }
    throw NumericError("discrete_cut_distance: cutting-plane rounds exhausted");
  }
};

std::vector<int> greedy_marginal_matching(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  const int n = mu.dimension();
  const int q = mu.alphabet().size;
  std::vector<std::vector<double>> lm(static_cast<std::size_t>(n)), rm(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    lm[static_cast<std::size_t>(i)] = mu.coordinate_marginal(i);
    rm[static_cast<std::size_t>(i)] = nu.coordinate_marginal(i);
  }
  auto cost = [&](int i, int j) {
    double d = 0.0;
    for (int w = 0; w < q; ++w) {
      d += std::abs(lm[static_cast<std::size_t>(i)][static_cast<std::size_t>(w)] -
                    rm[static_cast<std::size_t>(j)][static_cast<std::size_t>(w)]);
    }
    return 0.5 * d;
  };
  std::vector<int> perm(static_cast<std::size_t>(n), -1);
  std::vector<bool> left_done(static_cast<std::size_t>(n), false), right_done(static_cast<std::size_t>(n), false);
  for (int step = 0; step < n; ++step) {
    double best = std::numeric_limits<double>::infinity();
    int bi = -1, bj = -1;
    for (int i = 0; i < n; ++i) {
      if (left_done[static_cast<std::size_t>(i)]) continue;
      for (int j = 0; j < n; ++j) {
        if (right_done[static_cast<std::size_t>(j)]) continue;
        const double c = cost(i, j);
        if (c < best - 1e-15) { best = c; bi = i; bj = j; }
      }
    }
    perm[static_cast<std::size_t>(bi)] = bj;
    left_done[static_cast<std::size_t>(bi)] = true;
    right_done[static_cast<std::size_t>(bj)] = true;
  }
  return perm;
}

}  // namespace

DiscreteDistanceResult discrete_cut_distance(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                             const DiscreteDistanceOptions& opts) {
  check_pairable(mu, nu, "discrete_cut_distance");
  const int n = mu.dimension();

  DiscreteDistanceResult res;
  if (opts.mode == DiscreteMode::kExact) {
    if (n > kMaxExactDiscreteDim || mu.support_size() > kMaxExactDiscreteSupport ||
        nu.support_size() > kMaxExactDiscreteSupport) {
      throw SizeLimitError(
          "discrete_cut_distance: exact mode requires dimension <= 8 and support <= 64; use upper mode");
    }
    std::vector<std::vector<int>> perms;
    if (opts.variant == DiscreteVariant::kStrong) {
      perms.push_back(identity_perm(n));
    } else if (is_exchangeable(mu) && is_exchangeable(nu)) {
      // Any permutation can be absorbed into the coupling.
      perms.push_back(identity_perm(n));
    } else {
      std::vector<int> p = identity_perm(n);
      do {
        perms.push_back(p);
      } while (std::next_permutation(p.begin(), p.end()));
    }

    res.kind = BoundKind::kExact;
    res.value = std::numeric_limits<double>::infinity();
    for (const auto& perm : perms) {
      CouplingLp lp{mu, nu, perm, opts.tolerance, opts.full_witness_enumeration};
      auto out = lp.solve();
      res.iterations += out.rounds;
      if (out.value < res.value) {
        res.value = out.value;
        res.permutation = perm;
        res.coupling = std::move(out.coupling);
        res.witness = out.witness;
      }
      if (res.value <= opts.tolerance) break;  // cannot improve below zero
    }
    res.coupling_nnz = res.coupling.nnz();
    return res;
  }

  // Upper mode: best over a portfolio of couplings and permutations.
  std::vector<Coupling> couplings;
  couplings.push_back(greedy_tv_coupling(mu, nu));
  couplings.push_back(independent_coupling(mu, nu));
  for (const auto& extra : opts.extra_couplings) couplings.push_back(extra);

  std::vector<std::vector<int>> perms;
  perms.push_back(identity_perm(n));
  if (opts.variant == DiscreteVariant::kWeak) {
    auto matched = greedy_marginal_matching(mu, nu);
    if (matched != perms.front()) perms.push_back(std::move(matched));
  }

  res.kind = BoundKind::kUpper;
  res.value = std::numeric_limits<double>::infinity();
  for (const auto& g : couplings) {
    for (const auto& perm : perms) {
      AdversaryResult adv = adversary_value(g, perm);
      ++res.iterations;
      if (adv.value < res.value) {
        res.value = adv.value;
        res.permutation = perm;
        res.coupling = g;
        res.witness = adv.witness;
      }
    }
  }
  res.coupling_nnz = res.coupling.nnz();
  return res;
}

// -- kernel distances --------------------------------------------------------

namespace {

struct DiffBound {
  double value = 0.0;
  CutWitness witness;
  bool exact = true;
};

// Upper bound on max_omega of the rectangle sup of (a - b), both on the
// same grid: exact block cut norms when the grid is enumerable, otherwise
// the certified envelope (|integral| + integral |.|) / 2.
DiffBound bound_same_grid(const StepKernel& a, const StepKernel& b) {
  DiffBound out;
  const int q = a.alphabet.size;
  const bool exact_ok = std::min(a.num_rows(), a.num_cols()) <= kMaxExactCutAxis;
  out.exact = exact_ok;
  for (int w = 0; w < q; ++w) {
    RealMatrix diff = slice(a, w);
    const RealMatrix other = slice(b, w);
    for (std::size_t t = 0; t < diff.values.size(); ++t) diff.values[t] -= other.values[t];
    double value = 0.0;
    CutWitness witness;
    if (exact_ok) {
      CutNormResult r = cut_norm_exact(diff);
      value = r.value;
      witness = r.witness;
    } else {
      double l1 = 0.0, total = 0.0;
      for (int i = 0; i < diff.rows; ++i) {
        for (int j = 0; j < diff.cols; ++j) {
          const double m = diff.row_weight(i) * diff.col_weight(j) * diff.value(i, j);
          l1 += std::abs(m);
          total += m;
        }
      }
      value = 0.5 * (l1 + std::abs(total));
    }
    if (value > out.value) {
      out.value = value;
      out.witness = witness;
      out.witness.symbol = w;
    }
  }
  return out;
}

// Realises a pair of transport plans as a common grid: each plan entry
// becomes one cell carrying the plan mass and the source blocks of the
// two kernels.
std::pair<StepKernel, StepKernel> realize_alignment(const StepKernel& a, const StepKernel& b,
                                                    const std::vector<TransportPlanEntry>& rows,
                                                    const std::vector<TransportPlanEntry>& cols) {
  const int q = a.alphabet.size;
  auto build = [&](const StepKernel& src, bool left_side) {
    StepKernel out;
    out.alphabet = src.alphabet;
    out.row_weights.reserve(rows.size());
    out.col_weights.reserve(cols.size());
    double rt = 0.0, ct = 0.0;
    for (const auto& e : rows) rt += e.mass;
    for (const auto& e : cols) ct += e.mass;
    for (const auto& e : rows) out.row_weights.push_back(e.mass / rt);
    for (const auto& e : cols) out.col_weights.push_back(e.mass / ct);
    out.blocks.resize(rows.size() * cols.size() * static_cast<std::size_t>(q));
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const int si = left_side ? rows[i].from : rows[i].to;
      for (std::size_t j = 0; j < cols.size(); ++j) {
        const int sj = left_side ? cols[j].from : cols[j].to;
        auto p = src.block(si, sj);
        for (int w = 0; w < q; ++w) {
          out.at(static_cast<int>(i), static_cast<int>(j), w) = p[static_cast<std::size_t>(w)];
        }
      }
    }
    return out;
  };
  return {build(a, true), build(b, false)};
}

std::vector<double> row_profile_means(const StepKernel& k, int symbol) {
  std::vector<double> m(static_cast<std::size_t>(k.num_rows()), 0.0);
  for (int i = 0; i < k.num_rows(); ++i) {
    double acc = 0.0;
    for (int j = 0; j < k.num_cols(); ++j) acc += k.col_weights[static_cast<std::size_t>(j)] * k.at(i, j, symbol);
    m[static_cast<std::size_t>(i)] = acc;
  }
  return m;
}

std::vector<double> col_profile_means(const StepKernel& k, int symbol) {
  std::vector<double> m(static_cast<std::size_t>(k.num_cols()), 0.0);
  for (int j = 0; j < k.num_cols(); ++j) {
    double acc = 0.0;
    for (int i = 0; i < k.num_rows(); ++i) acc += k.row_weights[static_cast<std::size_t>(i)] * k.at(i, j, symbol);
    m[static_cast<std::size_t>(j)] = acc;
  }
  return m;
}

// Sorted-by-profile monotone coupling of one axis.
std::vector<TransportPlanEntry> sorted_monotone_plan(const StepKernel& a, const StepKernel& b, bool rows) {
  const int q = a.alphabet.size;
  auto keys = [&](const StepKernel& k) {
    const int cells = rows ? k.num_rows() : k.num_cols();
    std::vector<std::vector<double>> key(static_cast<std::size_t>(cells));
    for (int w = 0; w < q; ++w) {
      auto m = rows ? row_profile_means(k, w) : col_profile_means(k, w);
      for (int c = 0; c < cells; ++c) key[static_cast<std::size_t>(c)].push_back(m[static_cast<std::size_t>(c)]);
    }
    return key;
  };
  auto ka = keys(a);
  auto kb = keys(b);
  auto order = [](const std::vector<std::vector<double>>& key) {
    std::vector<int> idx(key.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](int x, int y) {
      if (key[static_cast<std::size_t>(x)] != key[static_cast<std::size_t>(y)]) {
        return key[static_cast<std::size_t>(x)] < key[static_cast<std::size_t>(y)];
      }
      return x < y;
    });
    return idx;
  };
  auto oa = order(ka);
  auto ob = order(kb);
  std::vector<double> wa, wb;
  for (int i : oa) wa.push_back((rows ? a.row_weights : a.col_weights)[static_cast<std::size_t>(i)]);
  for (int j : ob) wb.push_back((rows ? b.row_weights : b.col_weights)[static_cast<std::size_t>(j)]);
  auto plan = monotone_coupling(wa, wb);
  for (auto& e : plan) {
    e.from = oa[static_cast<std::size_t>(e.from)];
    e.to = ob[static_cast<std::size_t>(e.to)];
  }
  return plan;
}

// Optimal-transport plan on one axis with full-profile L1 cost; the
// opposite axis is aligned by its overlay. Small instances only.
std::optional<std::vector<TransportPlanEntry>> lp_profile_plan(const StepKernel& a, const StepKernel& b,
                                                               bool rows) {
  const int q = a.alphabet.size;
  const std::vector<double>& wa = rows ? a.row_weights : a.col_weights;
  const std::vector<double>& wb = rows ? b.row_weights : b.col_weights;
  if (static_cast<long long>(wa.size()) * static_cast<long long>(wb.size()) > 1024) return std::nullopt;
  const std::vector<double>& oa = rows ? a.col_weights : a.row_weights;
  const std::vector<double>& ob = rows ? b.col_weights : b.row_weights;
  const auto cells = monotone_coupling(oa, ob);
  auto cost = [&](int i, int j) {
    double d = 0.0;
    for (const auto& cell : cells) {
      for (int w = 0; w < q; ++w) {
        const double va = rows ? a.at(i, cell.from, w) : a.at(cell.from, i, w);
        const double vb = rows ? b.at(j, cell.to, w) : b.at(cell.to, j, w);
        d += cell.mass * std::abs(va - vb);
      }
    }
    return d;
  };
  try {
    return solve_transport(wa, wb, cost).plan;
  } catch (const SizeLimitError&) {
    return std::nullopt;
  }
}

// Lower bound via the coordinate-free witness family: relax one axis'
// maps to transports, fix the other axis' set to everything, and solve
// min over plans of max over the two signed folds. Sound for both the
// weak and the strong distance.
double witness_relaxation_lower(const StepKernel& a, const StepKernel& b) {
  const int q = a.alphabet.size;
  double best = 0.0;
  auto side = [&](bool rows) {
    const std::vector<double>& wa = rows ? a.row_weights : a.col_weights;
    const std::vector<double>& wb = rows ? b.row_weights : b.col_weights;
    const int na = static_cast<int>(wa.size());
    const int nb = static_cast<int>(wb.size());
    if (static_cast<long long>(na) * nb > 20000) return;
    for (int w = 0; w < q; ++w) {
      auto ma = rows ? row_profile_means(a, w) : col_profile_means(a, w);
      auto mb = rows ? row_profile_means(b, w) : col_profile_means(b, w);
      LpProblem p;
      p.num_vars = na * nb + 1;
      const int t_var = na * nb;
      p.objective.assign(static_cast<std::size_t>(p.num_vars), 0.0);
      p.objective[static_cast<std::size_t>(t_var)] = 1.0;
      for (int i = 0; i < na; ++i) {
        std::vector<double> row(static_cast<std::size_t>(p.num_vars), 0.0);
        for (int j = 0; j < nb; ++j) row[static_cast<std::size_t>(i * nb + j)] = 1.0;
        p.eq_rows.push_back(std::move(row));
        p.eq_rhs.push_back(wa[static_cast<std::size_t>(i)]);
      }
      for (int j = 0; j + 1 < nb; ++j) {
        std::vector<double> row(static_cast<std::size_t>(p.num_vars), 0.0);
        for (int i = 0; i < na; ++i) row[static_cast<std::size_t>(i * nb + j)] = 1.0;
        p.eq_rows.push_back(std::move(row));
        p.eq_rhs.push_back(wb[static_cast<std::size_t>(j)]);
      }
      for (int sign : {+1, -1}) {
        std::vector<double> row(static_cast<std::size_t>(p.num_vars), 0.0);
        for (int i = 0; i < na; ++i) {
          for (int j = 0; j < nb; ++j) {
            const double d = sign * (ma[static_cast<std::size_t>(i)] - mb[static_cast<std::size_t>(j)]);
            if (d > 0.0) row[static_cast<std::size_t>(i * nb + j)] = d;
          }
        }
        row[static_cast<std::size_t>(t_var)] = -1.0;
        p.le_rows.push_back(std::move(row));
        p.le_rhs.push_back(0.0);
      }
      LpSolution sol = solve_lp(p);
      if (sol.status == LpSolution::Status::kOptimal) best = std::max(best, sol.objective);
    }
  };
  side(true);
  side(false);
  return best;
}

KernelDistanceResult transport_distance(const StepKernel& a, const StepKernel& b,
                                        const KernelDistanceOptions& opts) {
  KernelDistanceResult res;
  res.mode = opts.family == TransformFamily::kRowsOnly ? "transport-strong" : "transport-weak";

  // Candidate plans per axis; identity (the plain overlay) always included.
  std::vector<std::vector<TransportPlanEntry>> row_plans;
  row_plans.push_back(monotone_coupling(a.row_weights, b.row_weights));
  row_plans.push_back(sorted_monotone_plan(a, b, /*rows=*/true));
  if (auto lp = lp_profile_plan(a, b, /*rows=*/true)) row_plans.push_back(std::move(*lp));

  std::vector<std::vector<TransportPlanEntry>> col_plans;
  col_plans.push_back(monotone_coupling(a.col_weights, b.col_weights));
  if (opts.family == TransformFamily::kRowsAndCols) {
    col_plans.push_back(sorted_monotone_plan(a, b, /*rows=*/false));
    if (auto lp = lp_profile_plan(a, b, /*rows=*/false)) col_plans.push_back(std::move(*lp));
  }

  res.upper = std::numeric_limits<double>::infinity();
  for (const auto& rp : row_plans) {
    for (const auto& cp : col_plans) {
      auto [ra, rb] = realize_alignment(a, b, rp, cp);
      DiffBound bound = bound_same_grid(ra, rb);
      ++res.iterations;
      if (bound.value < res.upper) {
        res.upper = bound.value;
        res.witness = bound.witness;
        res.upper_exact_rectangles = bound.exact;
      }
    }
  }
  res.lower = std::min(witness_relaxation_lower(a, b), res.upper);
  return res;
}

// Equal-weight uniform refinement of one axis, or nullopt when the axis
// boundaries are not multiples of 1/m for any m <= cap.
std::optional<int> equal_weight_cells(const std::vector<double>& wa, const std::vector<double>& wb, int cap) {
  std::vector<double> bounds;
  for (const auto* w : {&wa, &wb}) {
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < w->size(); ++i) {
      acc += (*w)[i];
      bounds.push_back(acc);
    }
  }
  for (int m = 1; m <= cap; ++m) {
    bool ok = true;
    for (double bval : bounds) {
      const double scaled = bval * m;
      if (std::abs(scaled - std::round(scaled)) > 1e-9) { ok = false; break; }
    }
    if (ok) return m;
  }
  return std::nullopt;
}

StepKernel refine_uniform(const StepKernel& k, int rows, int cols) {
  StepKernel out;
  out.alphabet = k.alphabet;
  out.row_weights.assign(static_cast<std::size_t>(rows), 1.0 / rows);
  out.col_weights.assign(static_cast<std::size_t>(cols), 1.0 / cols);
  out.blocks.resize(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols) *
                    static_cast<std::size_t>(k.alphabet.size));
  auto locate = [](const std::vector<double>& w, double point) {
    double acc = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
      acc += w[i];
      if (point < acc) return static_cast<int>(i);
    }
    return static_cast<int>(w.size()) - 1;
  };
  for (int i = 0; i < rows; ++i) {
    const int si = locate(k.row_weights, (i + 0.5) / rows);
    for (int j = 0; j < cols; ++j) {
      const int sj = locate(k.col_weights, (j + 0.5) / cols);
      auto p = k.block(si, sj);
      for (int w = 0; w < k.alphabet.size; ++w) out.at(i, j, w) = p[static_cast<std::size_t>(w)];
    }
  }
  return out;
}

KernelDistanceResult exact_tiny_distance(const StepKernel& a, const StepKernel& b,
                                         const KernelDistanceOptions& opts) {
  auto m_rows = equal_weight_cells(a.row_weights, b.row_weights, opts.tiny_cells);
  auto m_cols = equal_weight_cells(a.col_weights, b.col_weights, opts.tiny_cells);
  if (!m_rows || !m_cols) {
    throw SizeLimitError("kernel_distance: exact-tiny needs equal-weight grids with <= " +
                         std::to_string(opts.tiny_cells) + " cells per axis");
  }
  StepKernel ra = refine_uniform(a, *m_rows, *m_cols);
  StepKernel rb = refine_uniform(b, *m_rows, *m_cols);
  const int q = ra.alphabet.size;
  const int mr = *m_rows, mc = *m_cols;

  auto evaluate = [&](const std::vector<int>& rp, const std::vector<int>& cp) {
    DiffBound bound;
    for (int w = 0; w < q; ++w) {
      RealMatrix diff = RealMatrix::zeros(mr, mc);
      for (int i = 0; i < mr; ++i) {
        for (int j = 0; j < mc; ++j) {
          diff.value(i, j) = ra.at(i, j, w) - rb.at(rp[static_cast<std::size_t>(i)], cp[static_cast<std::size_t>(j)], w);
        }
      }
      CutNormResult r = cut_norm_exact(diff);
      if (r.value > bound.value) {
        bound.value = r.value;
        bound.witness = r.witness;
        bound.witness.symbol = w;
      }
    }
    return bound;
  };

  KernelDistanceResult res;
  res.mode = "exact-tiny";
  res.upper = std::numeric_limits<double>::infinity();
  std::vector<int> rp = identity_perm(mr);
  int evals = 0;
  do {
    std::vector<int> cp = identity_perm(mc);
    do {
      DiffBound bound = evaluate(rp, cp);
      ++evals;
      if (bound.value < res.upper) {
        res.upper = bound.value;
        res.witness = bound.witness;
      }
      if (res.upper <= 1e-15) break;
    } while (std::next_permutation(cp.begin(), cp.end()));
    if (res.upper <= 1e-15) break;
  } while (std::next_permutation(rp.begin(), rp.end()));
  res.lower = res.upper;
  res.iterations = evals;
  res.upper_exact_rectangles = true;

  if (mr == mc) {  // graphon-style single permutation, for comparison only
    double best = std::numeric_limits<double>::infinity();
    std::vector<int> p = identity_perm(mr);
    do {
      best = std::min(best, evaluate(p, p).value);
    } while (std::next_permutation(p.begin(), p.end()));
    res.graphon_value = best;
  }
  return res;
}

}  // namespace

double aligned_cut_estimate(const StepKernel& a, const StepKernel& b, int restarts, std::uint64_t seed) {
  auto evaluate = [&](const std::vector<TransportPlanEntry>& rp, const std::vector<TransportPlanEntry>& cp) {
    auto [ra, rb] = realize_alignment(a, b, rp, cp);
    const bool exact_ok = std::min(ra.num_rows(), ra.num_cols()) <= kMaxExactCutAxis;
    double worst = 0.0;
    for (int w = 0; w < ra.alphabet.size; ++w) {
      RealMatrix diff = slice(ra, w);
      const RealMatrix other = slice(rb, w);
      for (std::size_t t = 0; t < diff.values.size(); ++t) diff.values[t] -= other.values[t];
      const CutNormResult r = exact_ok ? cut_norm_exact(diff) : cut_norm_alternating(diff, restarts, seed);
      worst = std::max(worst, r.value);
    }
    return worst;
  };
  const double sorted = evaluate(sorted_monotone_plan(a, b, true), sorted_monotone_plan(a, b, false));
  const double plain = evaluate(monotone_coupling(a.row_weights, b.row_weights),
                                monotone_coupling(a.col_weights, b.col_weights));
  return std::min(sorted, plain);
}

KernelDistanceResult kernel_distance_noperm(const StepKernel& a, const StepKernel& b) {
  auto [ra, rb] = common_refinement(a, b);
  if (std::min(ra.num_rows(), ra.num_cols()) > kMaxExactCutAxis) {
    throw SizeLimitError("kernel_distance_noperm: refined grid exceeds the exact cut norm bound");
  }
  DiffBound bound = bound_same_grid(ra, rb);
  KernelDistanceResult res;
  res.mode = "noperm";
  res.lower = res.upper = bound.value;
  res.witness = bound.witness;
  res.upper_exact_rectangles = true;

  // Cross-check against the bipartite embedding identity when cheap.
  if (ra.num_rows() + ra.num_cols() <= 20) {
    double embedded = 0.0;
    for (int w = 0; w < ra.alphabet.size; ++w) {
      RealMatrix ea = bipartite_embed(ra, w);
      const RealMatrix eb = bipartite_embed(rb, w);
      for (std::size_t t = 0; t < ea.values.size(); ++t) ea.values[t] -= eb.values[t];
      embedded = std::max(embedded, cut_norm_exact(ea).value);
    }
    res.bipartite_value = 2.0 * embedded;
    if (std::abs(*res.bipartite_value - res.upper) > 1e-12) {
      throw NumericError("kernel_distance_noperm: bipartite identity violated");
    }
  }
  return res;
}

KernelDistanceResult kernel_distance(const StepKernel& a, const StepKernel& b,
                                     const KernelDistanceOptions& opts) {
  if (!(a.alphabet == b.alphabet)) throw std::invalid_argument("kernel_distance: alphabet mismatch");
  switch (opts.mode) {
    case KernelDistanceMode::kExactTiny:
      return exact_tiny_distance(a, b, opts);
    case KernelDistanceMode::kTransport:
      return transport_distance(a, b, opts);
    case KernelDistanceMode::kSampled: {
      KernelDistanceResult res = transport_distance(a, b, opts);
      res.mode = "sampled";
      if (opts.sample_n > kMaxAdversaryDim) {
        throw SizeLimitError("kernel_distance: sampled mode requires sample_n <= 24");
      }
      CounterRng rng(opts.seed);
      double sum = 0.0, sum_sq = 0.0;
      for (int t = 0; t < opts.sample_trials; ++t) {
        SampleBatch ba = sample_matrix(a, opts.sample_n, rng.derive(2 * static_cast<std::uint64_t>(t)).next_u64());
        SampleBatch bb = sample_matrix(b, opts.sample_n, rng.derive(2 * static_cast<std::uint64_t>(t) + 1).next_u64());
        DiscreteDistanceOptions dopts;
        dopts.mode = DiscreteMode::kUpper;
        dopts.variant = opts.family == TransformFamily::kRowsOnly ? DiscreteVariant::kStrong
                                                                  : DiscreteVariant::kWeak;
        const double v = discrete_cut_distance(empirical_law(ba), empirical_law(bb), dopts).value;
        sum += v;
        sum_sq += v * v;
      }
      const double m = sum / opts.sample_trials;
      res.estimate = m;
      res.std_error = opts.sample_trials > 1
                          ? std::sqrt(std::max(0.0, sum_sq / opts.sample_trials - m * m) /
                                      (opts.sample_trials - 1))
                          : 0.0;
      return res;
    }
  }
  throw std::logic_error("kernel_distance: unknown mode");
}

EmbeddingReport embedding_comparison(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  EmbeddingReport report;
  report.dimension = mu.dimension();
  const int n = mu.dimension();

  DiscreteDistanceResult exact = discrete_cut_distance(mu, nu, {});
  report.discrete_value = exact.value;

  // Transfer the optimal coupling and permutation to the embedded step
  // functions: coupled atoms stack as rows, coordinates as columns.
  double aligned = 0.0;
  const int q = mu.alphabet().size;
  const auto& g = exact.coupling;
  if (!g.entries.empty()) {
    for (int w = 0; w < q; ++w) {
      RealMatrix m = RealMatrix::zeros(static_cast<int>(g.entries.size()), n);
      m.row_weights.clear();
      double total = 0.0;
      for (const auto& e : g.entries) total += e.mass;
      for (const auto& e : g.entries) m.row_weights.push_back(e.mass / total);
      for (std::size_t e = 0; e < g.entries.size(); ++e) {
        const Config& sl = mu.support()[static_cast<std::size_t>(g.entries[e].left_index)].first;
        const Config& sr = nu.support()[static_cast<std::size_t>(g.entries[e].right_index)].first;
        for (int x = 0; x < n; ++x) {
          const int y = exact.permutation.empty() ? x : exact.permutation[static_cast<std::size_t>(x)];
          m.value(static_cast<int>(e), x) =
              (sl[static_cast<std::size_t>(x)] == w ? 1.0 : 0.0) - (sr[static_cast<std::size_t>(y)] == w ? 1.0 : 0.0);
        }
      }
      aligned = std::max(aligned, cut_norm_exact(m).value);
    }
  }

  KernelDistanceOptions kopts;
  kopts.mode = KernelDistanceMode::kTransport;
  KernelDistanceResult kd = kernel_distance(to_kernel(embed(mu)), to_kernel(embed(nu)), kopts);
  report.kernel_upper = std::min(aligned, kd.upper);
  report.kernel_lower = std::min(kd.lower, report.kernel_upper);

  const double tol = 1e-9;
  report.upper_below_discrete = report.kernel_upper <= report.discrete_value + tol;
  const double n3 = static_cast<double>(n) * n * n;
  report.cube_bound_holds = report.discrete_value <= n3 * report.kernel_upper + tol;
  return report;
}

}  // namespace cutlim
