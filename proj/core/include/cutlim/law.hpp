#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "cutlim/kernel.hpp"
#include "cutlim/measure.hpp"

namespace cutlim {

// One atom of a finite-support law: a step function [0,1] -> P(Omega) on
// the law's common column grid, together with its mixture weight.
struct LawAtom {
  double weight = 0.0;
  std::vector<double> values;  // cols * q, probability vector per cell
};

// Finite mixture of step functions with a shared column grid. Atoms are
// kept sorted by value profile; exactly equal profiles are merged, so two
// laws representing the same mixture compare equal.
struct Law {
  Alphabet alphabet;
  std::vector<double> col_weights;
  std::vector<LawAtom> atoms;

  int num_cols() const { return static_cast<int>(col_weights.size()); }
  int num_atoms() const { return static_cast<int>(atoms.size()); }
  std::span<const double> cell(int atom, int col) const {
    const std::size_t q = static_cast<std::size_t>(alphabet.size);
    return {atoms[static_cast<std::size_t>(atom)].values.data() + static_cast<std::size_t>(col) * q, q};
  }

  void canonicalize();  // sort atoms, merge equal profiles
  void validate() const;

  friend bool operator==(const Law& a, const Law& b);
};

// The law of a discrete measure: every support configuration becomes an
// atom whose step function takes the point mass delta_{sigma_i} on the
// i-th of n equal cells.
Law embed(const DiscreteMeasure& mu);

// Rows of the kernel are the atoms (row weight = atom weight) and back.
StepKernel to_kernel(const Law& mu);
Law from_kernel(const StepKernel& kappa);

// Mixture mean: the single-atom law x -> sum_a w_a sigma_a(x).
Law extremal(const Law& mu);

// Weighted mean profile over atoms, as a cols*q buffer.
std::vector<double> mean_profile(const Law& mu);

// max_omega integral |mean_a - mean_b| over the common column refinement.
// For single-atom laws this brackets the cut distance within a factor 2.
double extremal_l1_bracket(const Law& a, const Law& b);

struct ExtremalityOptions {
  bool allow_l1_fallback = true;  // use the L1/2 bound when exact cut norms are out of reach
};

struct ExtremalityBound {
  double upper = 0.0;     // certified upper bound on the cut distance to the extremal law
  bool exact_cut = true;  // bound came from exact block cut norms
};

// Upper bound on the distance between mu and extremal(mu); mu is reported
// eps-extremal when the bound is below eps.
ExtremalityBound extremality_defect(const Law& mu, const ExtremalityOptions& opts = {});

struct OverlapResult {
  double value = 0.0;
  double std_error = 0.0;  // zero for exact enumeration
  bool exact = true;
};

struct OverlapOptions {
  long long max_enumeration = 1'000'000;  // atom tuples enumerated exactly up to this count
  int mc_samples = 200'000;
  std::uint64_t seed = 1;
};

// Multi-overlap R_{ell, omega_1..omega_m}: the ell-th moment of the
// product integral over m independent atom replicas. The inner integral
// is a finite sum; the outer expectation is enumerated when the tuple
// count is small and Monte Carlo estimated (with standard error) otherwise.
OverlapResult multi_overlap(const Law& mu, int ell, std::span<const int> symbols,
                            const OverlapOptions& opts = {});

}  // namespace cutlim
