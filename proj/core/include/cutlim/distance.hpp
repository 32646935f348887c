#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cutlim/cutnorm.hpp"
#include "cutlim/kernel.hpp"
#include "cutlim/measure.hpp"

namespace cutlim {

// Joint distribution over pairs of support configurations with prescribed
// marginals. Holds an explicit sparse part plus an optional product part
// (left_residual x right_residual / product_scale); the independent
// coupling is pure product form, which keeps the adversary evaluation
// cheap even for large supports.
struct Coupling {
  struct Entry {
    int left_index = 0;
    int right_index = 0;
    double mass = 0.0;
  };

  DiscreteMeasure left;
  DiscreteMeasure right;
  std::vector<Entry> entries;
  double product_scale = 0.0;          // total mass of the product part
  std::vector<double> left_residual;   // per left support index, sums to product_scale
  std::vector<double> right_residual;  // per right support index, sums to product_scale

  std::size_t nnz() const { return entries.size() + (product_scale > 0.0 ? left_residual.size() : 0); }
  // Both marginals must reproduce the parents within tol.
  void validate(double tol = 1e-10) const;
};

Coupling diagonal_coupling(const DiscreteMeasure& mu);
Coupling independent_coupling(const DiscreteMeasure& mu, const DiscreteMeasure& nu);
// Maximal coupling: shared mass sits on the diagonal, leftovers pair independently.
Coupling greedy_tv_coupling(const DiscreteMeasure& mu, const DiscreteMeasure& nu);

struct AdversaryResult {
  double value = 0.0;   // sup over events/coordinate sets/symbols, with 1/n normalisation
  CutWitness witness;   // col_set = coordinate set X, symbol = omega, value signed;
                        // row_set lists explicit entry indices of the event S
};

// Exact adversary: enumerates coordinate subsets (dimension <= 24), folds
// the event S greedily per sign. perm permutes the right measure's
// coordinates; identity when empty.
AdversaryResult adversary_value(const Coupling& coupling, std::span<const int> perm = {});

enum class BoundKind { kExact, kUpper, kLower, kEstimate };

enum class DiscreteVariant {
  kWeak,    // couplings and coordinate permutations
  kStrong,  // couplings only
};

enum class DiscreteMode { kExact, kUpper };

struct DiscreteDistanceOptions {
  DiscreteVariant variant = DiscreteVariant::kWeak;
  DiscreteMode mode = DiscreteMode::kExact;
  double tolerance = 1e-9;          // cutting-plane convergence: no witness above t by more
  bool full_witness_enumeration = false;  // oracle mode: load all (X, omega, sign) rows upfront
  std::vector<Coupling> extra_couplings;  // additional upper-mode candidates
};

struct DiscreteDistanceResult {
  BoundKind kind = BoundKind::kExact;
  double value = 0.0;
  std::vector<int> permutation;  // applied to the right measure
  Coupling coupling;             // the minimising (or best candidate) coupling
  CutWitness witness;
  int iterations = 0;  // separation rounds summed over permutations
  std::size_t coupling_nnz = 0;
};

inline constexpr int kMaxExactDiscreteDim = 8;
inline constexpr std::size_t kMaxExactDiscreteSupport = 64;

// Weak/strong discrete cut distance. Exact mode minimises over the
// coupling polytope by cutting planes with the adversary as separation
// oracle, enumerating coordinate permutations for the weak variant (the
// permutation loop collapses to the identity when both measures are
// exchangeable). Upper mode evaluates a portfolio of couplings and
// permutations and returns the best certified value.
DiscreteDistanceResult discrete_cut_distance(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                             const DiscreteDistanceOptions& opts = {});

// True when the measure is invariant under all coordinate permutations
// (checked on a generating set of the symmetric group).
bool is_exchangeable(const DiscreteMeasure& mu);

DiscreteMeasure permute_coordinates(const DiscreteMeasure& mu, std::span<const int> perm);

// -- kernel distances --------------------------------------------------------

struct KernelDistanceResult {
  double lower = 0.0;
  double upper = 0.0;
  std::optional<double> estimate;  // sampled mode point estimate
  double std_error = 0.0;
  CutWitness witness;              // witness of the reported upper bound, on the aligned grid
  std::optional<double> bipartite_value;  // 2 * max_omega embedded value, when cross-checked
  std::optional<double> graphon_value;    // single-permutation variant, exact-tiny mode only
  std::string mode;
  int iterations = 0;
  bool upper_exact_rectangles = true;  // upper came from exact cut norms (vs the L1 envelope)
};

// No transformations at all: the cut norm of the difference on the common
// refinement, exact, cross-checked against the bipartite embedding
// identity when the embedded grid is small enough.
KernelDistanceResult kernel_distance_noperm(const StepKernel& a, const StepKernel& b);

enum class KernelDistanceMode { kExactTiny, kTransport, kSampled };

enum class TransformFamily {
  kRowsOnly,     // measure-preserving maps on the row axis only (strong distance)
  kRowsAndCols,  // maps on both axes (weak distance)
};

struct KernelDistanceOptions {
  KernelDistanceMode mode = KernelDistanceMode::kTransport;
  TransformFamily family = TransformFamily::kRowsAndCols;
  int tiny_cells = 6;      // exact-tiny equal-weight grid cap (joint permutation enumeration)
  int sample_n = 16;       // sampled mode: empirical law size (adversary bound caps it at 24)
  int sample_trials = 10;  // sampled mode: averaging trials
  std::uint64_t seed = 1;
  int threads = 1;
};

// Bound pair for the transformed kernel distances. exact-tiny enumerates
// cell permutations on equal-weight refinements; transport mode realises
// transport plans as measure-preserving maps for the upper bound and
// solves small witness-relaxation LPs for the lower bound; sampled mode
// adds an empirical-law estimate on top of the transport bounds.
KernelDistanceResult kernel_distance(const StepKernel& a, const StepKernel& b,
                                     const KernelDistanceOptions& opts = {});

// Heuristic point estimate of the transformed kernel distance: aligns the
// kernels by monotone profile transports and evaluates the cut value of
// the aligned difference (exact cut norms when the grid allows, an
// alternating rectangle search otherwise). The alignment certifies an
// upper bound; the rectangle search estimates it from below, so treat the
// result as an estimate rather than a bound.
double aligned_cut_estimate(const StepKernel& a, const StepKernel& b, int restarts, std::uint64_t seed);

// -- discrete vs embedded comparison ----------------------------------------

struct EmbeddingReport {
  int dimension = 0;
  double discrete_value = 0.0;  // exact weak discrete distance
  double kernel_upper = 0.0;    // upper bound on the embedded kernel distance
  double kernel_lower = 0.0;
  bool upper_below_discrete = false;  // kernel_upper <= discrete_value + tol
  bool cube_bound_holds = false;      // discrete_value <= n^3 * kernel_upper + tol
};

// Computes the exact discrete distance, transfers its optimal coupling and
// permutation to the embedded kernels for a matching upper bound, and
// checks the two sound comparison directions at tolerance 1e-9.
EmbeddingReport embedding_comparison(const DiscreteMeasure& mu, const DiscreteMeasure& nu);

}  // namespace cutlim
