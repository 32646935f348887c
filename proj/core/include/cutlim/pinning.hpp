#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "cutlim/law.hpp"
#include "cutlim/measure.hpp"

namespace cutlim {

// What was pinned: how many coordinates, which ones (discrete coordinate
// indices, or column cell indices for laws), and the drawn reference
// configuration.
struct PinSpec {
  int theta = 0;
  std::vector<int> coordinates;
  Config reference;
  std::uint64_t seed = 0;
};

struct DiscretePinResult {
  PinSpec spec;
  DiscreteMeasure measure;
};

struct LawPinResult {
  PinSpec spec;
  Law law;
  double z = 1.0;  // weight of the reference; the input is returned unchanged when 0
};

// Draws a uniform theta-subset of coordinates and a reference from mu,
// then conditions mu on agreeing with the reference there. theta = 0
// returns mu unchanged. The conditioning event has positive mass by
// construction.
DiscretePinResult pin_discrete(const DiscreteMeasure& mu, int theta, std::uint64_t seed);

struct PinnedDefectOptions {
  bool force_monte_carlo = false;
  int mc_trials = 2000;
  std::uint64_t seed = 7;
};

struct PinnedDefectResult {
  double value = 0.0;
  double std_error = 0.0;  // zero in exact mode
  bool exact = true;
};

inline constexpr int kMaxExactPinDim = 12;
inline constexpr std::size_t kMaxExactPinSupport = 4096;

// E over uniform Theta in {0..T}, a uniform Theta-subset and a reference
// drawn from mu of the pairwise symmetry defect of the pinned measure.
// Exact enumeration when dimension <= 12 and support <= 4096, Monte Carlo
// with a standard error otherwise.
PinnedDefectResult expected_pinned_defect(const DiscreteMeasure& mu, int T,
                                          const PinnedDefectOptions& opts = {});

// The per-level conditional mutual informations of pinning and their
// telescoping entropy form. All logs are natural.
struct InformationBudget {
  std::vector<double> mutual_information;  // I_theta for theta = 0..T
  std::vector<double> entropy_terms;       // H_theta for theta = 0..T+1
  double total = 0.0;                      // sum of the I_theta; at most log q
  double expected_kl = 0.0;                // mean over uniform Theta; at most log q / T
};

InformationBudget information_budget(const DiscreteMeasure& mu, int T);

// z_mu(tau, x_1..x_theta): the mass the law assigns to the reference tau
// evaluated at the given column cells. Cells may repeat.
double z_weight(const Law& mu, const Config& tau, std::span<const int> cells);

// Reweights atom a by prod_i sigma_a(x_i)(tau_i) / z. When z = 0 the law
// is returned unchanged (z reported as 0).
LawPinResult pin_law(const Law& mu, const Config& tau, std::span<const int> cells);

// Draws cells by column weight and the reference from the z-distribution
// (atom first, then a product draw), then pins.
LawPinResult pin_law_random(const Law& mu, int theta, std::uint64_t seed);

// The mixture over references tau with z(tau) > 0 of the extremal law of
// each pinned law, weighted by z(tau). At most q^theta atoms; refuses
// q^theta > 10^6.
Law pinned_mixture(const Law& mu, std::span<const int> cells);

struct PinningExperimentReport {
  double epsilon = 0.0;
  long long theta_cap_theorem = 0;  // ceil(64 eps^-8 log q)
  int theta_cap_used = 0;           // practical cap actually sampled
  double p_extremal_lower = 0.0;    // fraction of trials certified eps-extremal
  double e_dist_upper = 0.0;        // mean upper bound on the distance to the pinned mixture
  int trials = 0;
  std::uint64_t seed = 0;
};

struct PinningExperimentOptions {
  int theta_cap = 12;  // practical cap; the theorem's range is reported alongside
  int threads = 1;
};

// Estimates how often pinning lands on an eps-extremal law and how close
// the pinned mixture stays to mu. Extremality is certified through upper
// bounds, so the reported probability is conservative.
PinningExperimentReport pinning_theorem_experiment(const Law& mu, double eps, int trials,
                                                   std::uint64_t seed,
                                                   const PinningExperimentOptions& opts = {});

}  // namespace cutlim
