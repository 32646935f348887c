#include "cutlim/pinning.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>

#include "cutlim/distance.hpp"
#include "cutlim/parallel.hpp"
#include "cutlim/rng.hpp"

namespace cutlim {

namespace {

std::vector<int> draw_subset(int n, int theta, CounterRng& rng) {
  // Partial Fisher-Yates over 0..n-1; result sorted.
  std::vector<int> pool(static_cast<std::size_t>(n));
  std::iota(pool.begin(), pool.end(), 0);
  for (int i = 0; i < theta; ++i) {
    const std::size_t j = static_cast<std::size_t>(i) + rng.next_below(static_cast<std::uint64_t>(n - i));
    std::swap(pool[static_cast<std::size_t>(i)], pool[j]);
  }
  std::vector<int> out(pool.begin(), pool.begin() + theta);
  std::sort(out.begin(), out.end());
  return out;
}

template <class Fn>
void for_each_subset(int n, int k, Fn&& fn) {
  std::vector<int> idx(static_cast<std::size_t>(k));
  std::iota(idx.begin(), idx.end(), 0);
  if (k == 0) {
    fn(static_cast<const std::vector<int>&>(idx));
    return;
  }
  while (true) {
    fn(static_cast<const std::vector<int>&>(idx));
    int pos = k - 1;
    while (pos >= 0 && idx[static_cast<std::size_t>(pos)] == n - k + pos) --pos;
    if (pos < 0) return;
    ++idx[static_cast<std::size_t>(pos)];
    for (int t = pos + 1; t < k; ++t) idx[static_cast<std::size_t>(t)] = idx[static_cast<std::size_t>(t - 1)] + 1;
  }
}

double binomial(int n, int k) {
  double v = 1.0;
  for (int i = 0; i < k; ++i) v = v * (n - i) / (i + 1);
  return v;
}

Config draw_from(const DiscreteMeasure& mu, CounterRng& rng) {
  std::vector<double> w;
  w.reserve(mu.support_size());
  for (const auto& [c, m] : mu.support()) w.push_back(m);
  return mu.support()[rng.next_weighted(w)].first;
}

}  // namespace

DiscretePinResult pin_discrete(const DiscreteMeasure& mu, int theta, std::uint64_t seed) {
  const int n = mu.dimension();
  if (theta < 0 || theta > n) throw std::invalid_argument("pin_discrete: theta out of range");
  CounterRng rng(seed);
  PinSpec spec;
  spec.theta = theta;
  spec.seed = seed;
  if (theta == 0) return {spec, mu};
  spec.coordinates = draw_subset(n, theta, rng);
  const Config sample = draw_from(mu, rng);
  spec.reference.reserve(static_cast<std::size_t>(theta));
  for (int i : spec.coordinates) spec.reference.push_back(sample[static_cast<std::size_t>(i)]);
  return {spec, mu.condition(spec.coordinates, spec.reference)};
}

PinnedDefectResult expected_pinned_defect(const DiscreteMeasure& mu, int T,
                                          const PinnedDefectOptions& opts) {
  if (T < 0) throw std::invalid_argument("expected_pinned_defect: T must be >= 0");
  const int n = mu.dimension();
  const bool exact_ok = !opts.force_monte_carlo && n <= kMaxExactPinDim &&
                        mu.support_size() <= kMaxExactPinSupport;
  PinnedDefectResult res;
  if (exact_ok) {
    double total = 0.0;
    const double theta_weight = 1.0 / (T + 1);
    for (int theta = 0; theta <= std::min(T, n); ++theta) {
      if (theta == 0) {
        total += theta_weight * symmetry_defect(mu);
        continue;
      }
      const double subset_weight = 1.0 / binomial(n, theta);
      for_each_subset(n, theta, [&](const std::vector<int>& subset) {
        const Marginal marg = mu.marginal(subset);
        for (const auto& [tau, p] : marg.measure.support()) {
          total += theta_weight * subset_weight * p * symmetry_defect(mu.condition(subset, tau));
        }
      });
    }
    // Theta values above n pin everything pinnable; conditioning on a full
    // reference still leaves the conditional defect of the point mass, 0.
    for (int theta = n + 1; theta <= T; ++theta) {
      const double v = 0.0;  // all coordinates pinned: conditioned measure is a point mass
      total += theta_weight * v;
    }
    res.value = total;
    res.exact = true;
    return res;
  }

  CounterRng base(opts.seed);
  double sum = 0.0, sum_sq = 0.0;
  for (int t = 0; t < opts.mc_trials; ++t) {
    CounterRng rng = base.derive(static_cast<std::uint64_t>(t));
    const int theta = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(T) + 1));
    const double v = symmetry_defect(pin_discrete(mu, std::min(theta, n), rng.next_u64()).measure);
    sum += v;
    sum_sq += v * v;
  }
  res.value = sum / opts.mc_trials;
  res.std_error = opts.mc_trials > 1
                      ? std::sqrt(std::max(0.0, (sum_sq - opts.mc_trials * res.value * res.value) /
                                                    (opts.mc_trials - 1)) /
                                  opts.mc_trials)
                      : 0.0;
  res.exact = false;
  return res;
}

InformationBudget information_budget(const DiscreteMeasure& mu, int T) {
  if (T < 1) throw std::invalid_argument("information_budget: T must be >= 1");
  const int n = mu.dimension();
  const int q = mu.alphabet().size;
  if (n > kMaxExactPinDim || mu.support_size() > kMaxExactPinSupport) {
    throw SizeLimitError("information_budget: exact enumeration bounds exceeded");
  }

  // For every pin set J: m(J) = mean_{i,i'} I(sigma_i; sigma_i' | sigma_J)
  // and h(J) = mean_i H(sigma_i | sigma_J). Conditioning only depends on
  // the set of pinned coordinates, so the i.i.d. index draws reduce to
  // surjection-count weights over sets.
  std::vector<double> m_by_size(static_cast<std::size_t>(n) + 1, 0.0);
  std::vector<double> h_by_size(static_cast<std::size_t>(n) + 1, 0.0);

  const std::size_t qq = static_cast<std::size_t>(q) * static_cast<std::size_t>(q);
  for (int k = 0; k <= n; ++k) {
    for_each_subset(n, k, [&](const std::vector<int>& subset) {
      // Partition the support by the values on the subset.
      std::map<Config, std::vector<std::size_t>> groups;
      Config key(subset.size());
      auto support = mu.support();
      for (std::size_t e = 0; e < support.size(); ++e) {
        for (std::size_t t = 0; t < subset.size(); ++t) {
          key[t] = support[e].first[static_cast<std::size_t>(subset[t])];
        }
        groups[key].push_back(e);
      }
      double m_sum = 0.0;  // sum over ordered (i, i') of I(...|sigma_J)
      double h_sum = 0.0;  // sum over i of H(...|sigma_J)
      std::vector<double> pair_table(qq);
      std::vector<double> left(static_cast<std::size_t>(q)), right(static_cast<std::size_t>(q));
      for (const auto& [tau, members] : groups) {
        double p_tau = 0.0;
        for (std::size_t e : members) p_tau += support[e].second;
        for (int i = 0; i < n; ++i) {
          // H(sigma_i | this group)
          std::fill(left.begin(), left.end(), 0.0);
          for (std::size_t e : members) left[support[e].first[static_cast<std::size_t>(i)]] += support[e].second;
          double h = 0.0;
          for (int a = 0; a < q; ++a) {
            const double pa = left[static_cast<std::size_t>(a)] / p_tau;
            if (pa > 0.0) h -= pa * std::log(pa);
          }
          h_sum += p_tau * h;
          for (int j = 0; j < n; ++j) {
            if (j == i) {
              m_sum += p_tau * h;  // I(X;X|.) = H(X|.)
              continue;
            }
            std::fill(pair_table.begin(), pair_table.end(), 0.0);
            std::fill(right.begin(), right.end(), 0.0);
            for (std::size_t e : members) {
              const int a = support[e].first[static_cast<std::size_t>(i)];
              const int b = support[e].first[static_cast<std::size_t>(j)];
              pair_table[static_cast<std::size_t>(a) * q + b] += support[e].second;
              right[static_cast<std::size_t>(b)] += support[e].second;
            }
            double info = 0.0;
            for (int a = 0; a < q; ++a) {
              for (int b = 0; b < q; ++b) {
                const double pab = pair_table[static_cast<std::size_t>(a) * q + b];
                if (pab <= 0.0) continue;
                info += pab / p_tau *
                        std::log(pab * p_tau / (left[static_cast<std::size_t>(a)] * right[static_cast<std::size_t>(b)]));
              }
            }
            m_sum += p_tau * info;
          }
        }
      }
      m_by_size[static_cast<std::size_t>(k)] += m_sum / (static_cast<double>(n) * n);
      h_by_size[static_cast<std::size_t>(k)] += h_sum / n;
    });
  }

  // P[{i_1..i_theta} = J] = onto(theta, |J|) / n^theta, computed stably as
  // an inclusion-exclusion sum of ((k - j)/n)^theta terms.
  auto set_weight = [&](int theta, int k) {
    if (k > theta) return 0.0;
    double v = 0.0;
    double sign = 1.0;
    for (int j = 0; j <= k; ++j, sign = -sign) {
      v += sign * binomial(k, j) * std::pow(static_cast<double>(k - j) / n, theta);
    }
    return std::max(v, 0.0);
  };

  InformationBudget out;
  out.entropy_terms.resize(static_cast<std::size_t>(T) + 2, 0.0);
  out.mutual_information.resize(static_cast<std::size_t>(T) + 1, 0.0);
  for (int theta = 0; theta <= T + 1; ++theta) {
    double h = 0.0;
    for (int k = 0; k <= std::min(theta, n); ++k) h += set_weight(theta, k) * h_by_size[static_cast<std::size_t>(k)];
    out.entropy_terms[static_cast<std::size_t>(theta)] = h;
  }
  for (int theta = 0; theta <= T; ++theta) {
    double m = 0.0;
    for (int k = 0; k <= std::min(theta, n); ++k) m += set_weight(theta, k) * m_by_size[static_cast<std::size_t>(k)];
    out.mutual_information[static_cast<std::size_t>(theta)] = m;
    out.total += m;
  }
  out.expected_kl = out.total / (T + 1);

  if (out.total > std::log(static_cast<double>(q)) + 1e-9) {
    throw NumericError("information_budget: telescoping sum exceeded log q");
  }
  return out;
}

double z_weight(const Law& mu, const Config& tau, std::span<const int> cells) {
  if (tau.size() != cells.size()) throw std::invalid_argument("z_weight: length mismatch");
  for (int c : cells) {
    if (c < 0 || c >= mu.num_cols()) throw std::out_of_range("z_weight: cell out of range");
  }
  for (auto s : tau) {
    if (s >= mu.alphabet.size) throw std::out_of_range("z_weight: symbol out of range");
  }
  double z = 0.0;
  for (const auto& atom : mu.atoms) {
    double prod = atom.weight;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      prod *= atom.values[static_cast<std::size_t>(cells[i]) * mu.alphabet.size + tau[i]];
    }
    z += prod;
  }
  return z;
}

LawPinResult pin_law(const Law& mu, const Config& tau, std::span<const int> cells) {
  LawPinResult res;
  res.spec.theta = static_cast<int>(cells.size());
  res.spec.coordinates.assign(cells.begin(), cells.end());
  res.spec.reference = tau;
  res.z = z_weight(mu, tau, cells);
  if (res.z <= 0.0) {
    res.z = 0.0;
    res.law = mu;  // reference has no mass: leave the law untouched
    return res;
  }
  Law out;
  out.alphabet = mu.alphabet;
  out.col_weights = mu.col_weights;
  for (const auto& atom : mu.atoms) {
    double prod = atom.weight;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      prod *= atom.values[static_cast<std::size_t>(cells[i]) * mu.alphabet.size + tau[i]];
    }
    if (prod > 0.0) out.atoms.push_back(LawAtom{prod / res.z, atom.values});
  }
  out.canonicalize();
  out.validate();
  res.law = std::move(out);
  return res;
}

LawPinResult pin_law_random(const Law& mu, int theta, std::uint64_t seed) {
  if (theta < 0) throw std::invalid_argument("pin_law_random: theta must be >= 0");
  CounterRng rng(seed);
  std::vector<int> cells;
  cells.reserve(static_cast<std::size_t>(theta));
  for (int i = 0; i < theta; ++i) {
    cells.push_back(static_cast<int>(rng.next_weighted(mu.col_weights)));
  }
  // Reference from the z-distribution: atom by weight, then per-cell draws.
  std::vector<double> atom_weights;
  atom_weights.reserve(mu.atoms.size());
  for (const auto& a : mu.atoms) atom_weights.push_back(a.weight);
  const std::size_t atom = rng.next_weighted(atom_weights);
  Config tau;
  tau.reserve(static_cast<std::size_t>(theta));
  for (int c : cells) {
    tau.push_back(static_cast<std::uint8_t>(rng.next_weighted(mu.cell(static_cast<int>(atom), c))));
  }
  LawPinResult res = pin_law(mu, tau, cells);
  res.spec.seed = seed;
  return res;
}

Law pinned_mixture(const Law& mu, std::span<const int> cells) {
  const int theta = static_cast<int>(cells.size());
  const int q = mu.alphabet.size;
  if (std::pow(static_cast<double>(q), theta) > 1e6) {
    throw SizeLimitError("pinned_mixture: q^theta exceeds 10^6");
  }
  if (theta == 0) return extremal(mu);
  const std::size_t profile_len = mu.col_weights.size() * static_cast<std::size_t>(q);

  Law out;
  out.alphabet = mu.alphabet;
  out.col_weights = mu.col_weights;
  for_each_config(q, theta, [&](const Config& tau) {
    // Weighted mean profile of the pinned law, assembled in one pass.
    double z = 0.0;
    std::vector<double> profile(profile_len, 0.0);
    for (const auto& atom : mu.atoms) {
      double prod = atom.weight;
      for (int i = 0; i < theta; ++i) {
        prod *= atom.values[static_cast<std::size_t>(cells[static_cast<std::size_t>(i)]) * q + tau[static_cast<std::size_t>(i)]];
      }
      if (prod <= 0.0) continue;
      z += prod;
      for (std::size_t t = 0; t < profile_len; ++t) profile[t] += prod * atom.values[t];
    }
    if (z <= 0.0) return;
    for (double& v : profile) v /= z;
    out.atoms.push_back(LawAtom{z, std::move(profile)});
  });
  out.canonicalize();
  out.validate();
  return out;
}

PinningExperimentReport pinning_theorem_experiment(const Law& mu, double eps, int trials,
                                                   std::uint64_t seed,
                                                   const PinningExperimentOptions& opts) {
  if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("pinning_theorem_experiment: eps in (0,1)");
  if (trials < 1) throw std::invalid_argument("pinning_theorem_experiment: trials must be >= 1");
  PinningExperimentReport report;
  report.epsilon = eps;
  report.trials = trials;
  report.seed = seed;
  report.theta_cap_theorem =
      static_cast<long long>(std::ceil(64.0 * std::pow(eps, -8.0) * std::log(static_cast<double>(mu.alphabet.size))));
  report.theta_cap_used = static_cast<int>(std::min<long long>(opts.theta_cap, report.theta_cap_theorem));

  const StepKernel reference_kernel = to_kernel(mu);
  std::vector<int> extremal_hits(static_cast<std::size_t>(trials), 0);
  std::vector<double> dist_upper(static_cast<std::size_t>(trials), 0.0);
  CounterRng base(seed);

  parallel_for(static_cast<std::size_t>(trials), opts.threads, [&](std::size_t t) {
    CounterRng rng = base.derive(t);
    const int theta = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(report.theta_cap_used) + 1));
    LawPinResult pinned = pin_law_random(mu, theta, rng.next_u64());
    extremal_hits[t] = extremality_defect(pinned.law).upper < eps ? 1 : 0;

    const Law mixture = pinned_mixture(mu, pinned.spec.coordinates);
    KernelDistanceOptions kopts;
    kopts.mode = KernelDistanceMode::kTransport;
    dist_upper[t] = kernel_distance(reference_kernel, to_kernel(mixture), kopts).upper;
  });

  int hits = 0;
  double dsum = 0.0;
  for (int t = 0; t < trials; ++t) {
    hits += extremal_hits[static_cast<std::size_t>(t)];
    dsum += dist_upper[static_cast<std::size_t>(t)];
  }
  report.p_extremal_lower = static_cast<double>(hits) / trials;
  report.e_dist_upper = dsum / trials;
  return report;
}

}  // namespace cutlim
