#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "cutlim/rational.hpp"

namespace cutlim {

// Finite alphabet with symbols 0 .. size-1.
struct Alphabet {
  int size = 2;

  void validate() const {
    if (size < 1) throw std::invalid_argument("Alphabet: size must be >= 1");
    if (size > 256) throw std::invalid_argument("Alphabet: size must be <= 256 (symbols are bytes)");
  }
  friend bool operator==(const Alphabet& a, const Alphabet& b) { return a.size == b.size; }
};

// One point of the discrete cube: a length-n vector of symbols.
using Config = std::vector<std::uint8_t>;

// True when every configuration index q^n fits into 63 bits, i.e. dense
// enumeration can run on packed integers.
bool config_fits_u64(int q, int n);

// Big-endian base-q packing: the first coordinate is most significant, so
// numeric order of packed keys equals lexicographic order of configs.
std::uint64_t pack_config(const Config& c, int q);
Config unpack_config(std::uint64_t index, int q, int n);

// Calls fn once per configuration of Omega^n in lexicographic order.
template <class Fn>
void for_each_config(int q, int n, Fn&& fn) {
  Config c(static_cast<std::size_t>(n), 0);
  while (true) {
    fn(static_cast<const Config&>(c));
    int pos = n - 1;
    while (pos >= 0 && c[pos] == q - 1) c[pos--] = 0;
    if (pos < 0) return;
    ++c[pos];
  }
}

namespace detail {

template <class W>
struct WeightOps;

template <>
struct WeightOps<double> {
  static constexpr double kMassTolerance = 1e-12;
  static double zero() { return 0.0; }
  static double one() { return 1.0; }
  static bool is_zero(double w) { return w == 0.0; }
  static bool is_negative(double w) { return w < 0.0; }
  static bool total_is_unit(double t) { return std::abs(t - 1.0) <= kMassTolerance; }
};

template <>
struct WeightOps<Rational> {
  static Rational zero() { return Rational(0); }
  static Rational one() { return Rational(1); }
  static bool is_zero(const Rational& w) { return w == Rational(0); }
  static bool is_negative(const Rational& w) { return w < Rational(0); }
  static bool total_is_unit(const Rational& t) { return t == Rational(1); }
};

}  // namespace detail

template <class W>
struct BasicMarginal;

// Sparse probability distribution on Omega^n. Immutable after
// construction; the support is kept sorted lexicographically with no
// zero-weight entries, which makes serialisation canonical.
//
// Weight type W is double for everything user-facing and Rational for the
// exact mode used by oracle tests.
template <class W>
class BasicMeasure {
 public:
  using Entry = std::pair<Config, W>;
  using Ops = detail::WeightOps<W>;

  // Trivial point mass on the one-symbol cube; a benign placeholder value.
  BasicMeasure() : alphabet_{1}, dimension_(1) { support_.emplace_back(Config{0}, Ops::one()); }

  BasicMeasure(Alphabet alphabet, int dimension, std::vector<Entry> entries)
      : alphabet_(alphabet), dimension_(dimension), support_(std::move(entries)) {
    alphabet_.validate();
    if (dimension_ < 1) throw std::invalid_argument("BasicMeasure: dimension must be >= 1");
    canonicalize();
    W total = Ops::zero();
    for (const auto& [c, w] : support_) total += w;
    if (!Ops::total_is_unit(total)) {
      throw std::invalid_argument("BasicMeasure: weights must sum to 1");
    }
  }

  // Builds a measure from nonnegative unnormalised weights.
  static BasicMeasure from_unnormalized(Alphabet alphabet, int dimension, std::vector<Entry> entries) {
    W total = Ops::zero();
    for (const auto& [c, w] : entries) {
      if (Ops::is_negative(w)) throw std::invalid_argument("BasicMeasure: negative weight");
      total += w;
    }
    if (Ops::is_zero(total)) throw std::invalid_argument("BasicMeasure: zero total mass");
    for (auto& [c, w] : entries) w = w / total;
    return BasicMeasure(alphabet, dimension, std::move(entries));
  }

  static BasicMeasure point_mass(Alphabet alphabet, Config c) {
    const int n = static_cast<int>(c.size());
    std::vector<Entry> e;
    e.emplace_back(std::move(c), Ops::one());
    return BasicMeasure(alphabet, n, std::move(e));
  }

  const Alphabet& alphabet() const { return alphabet_; }
  int dimension() const { return dimension_; }
  std::span<const Entry> support() const { return support_; }
  std::size_t support_size() const { return support_.size(); }

  // Mass of a single configuration (zero when absent).
  W mass(const Config& c) const {
    auto it = std::lower_bound(support_.begin(), support_.end(), c,
                               [](const Entry& e, const Config& key) { return e.first < key; });
    if (it != support_.end() && it->first == c) return it->second;
    return Ops::zero();
  }

  // Joint distribution of the coordinates in `indices` (0-based).
  BasicMarginal<W> marginal(std::vector<int> indices) const;

  // Product of the n single-coordinate marginals: the closest product
  // measure, matching every one-dimensional marginal of *this.
  BasicMeasure product_of_marginals() const;

  // Normalised restriction to {sigma : sigma_i = given_i for i in indices}.
  // Conditioning on a zero-probability event throws std::domain_error.
  BasicMeasure condition(const std::vector<int>& indices, const Config& given) const;

  // Per-coordinate marginal as a dense probability vector over Omega.
  std::vector<W> coordinate_marginal(int index) const {
    check_indices({index});
    std::vector<W> probs(static_cast<std::size_t>(alphabet_.size), Ops::zero());
    for (const auto& [c, w] : support_) probs[c[static_cast<std::size_t>(index)]] += w;
    return probs;
  }

  friend bool operator==(const BasicMeasure& a, const BasicMeasure& b) {
    return a.alphabet_ == b.alphabet_ && a.dimension_ == b.dimension_ && a.support_ == b.support_;
  }

 private:
  void canonicalize() {
    for (auto& [c, w] : support_) {
      if (static_cast<int>(c.size()) != dimension_) {
        throw std::invalid_argument("BasicMeasure: configuration length != dimension");
      }
      for (auto s : c) {
        if (s >= alphabet_.size) throw std::invalid_argument("BasicMeasure: symbol out of range");
      }
      if (Ops::is_negative(w)) throw std::invalid_argument("BasicMeasure: negative weight");
    }
    std::sort(support_.begin(), support_.end(),
              [](const Entry& a, const Entry& b) { return a.first < b.first; });
    // Merge duplicate configurations, drop zero weights.
    std::vector<Entry> merged;
    merged.reserve(support_.size());
    for (auto& e : support_) {
      if (!merged.empty() && merged.back().first == e.first) {
        merged.back().second += e.second;
      } else {
        merged.push_back(std::move(e));
      }
    }
    std::erase_if(merged, [](const Entry& e) { return Ops::is_zero(e.second); });
    support_ = std::move(merged);
    if (support_.empty()) throw std::invalid_argument("BasicMeasure: empty support");
  }

  void check_indices(const std::vector<int>& indices) const {
    for (int i : indices) {
      if (i < 0 || i >= dimension_) throw std::out_of_range("BasicMeasure: index out of range");
    }
  }

  template <class W2>
  friend struct BasicMarginal;
  template <class W2>
  friend class BasicMeasure;

  Alphabet alphabet_;
  int dimension_;
  std::vector<Entry> support_;
};

// A marginal together with the index set it was taken over.
template <class W>
struct BasicMarginal {
  std::vector<int> indices;  // sorted, 0-based coordinates of the parent
  BasicMeasure<W> measure;   // distribution on Omega^|indices|
};

using DiscreteMeasure = BasicMeasure<double>;
using ExactMeasure = BasicMeasure<Rational>;
using Marginal = BasicMarginal<double>;
using ExactMarginal = BasicMarginal<Rational>;

// -- template method definitions --------------------------------------------

template <class W>
void push_subtree(std::vector<typename BasicMeasure<W>::Entry>& entries,
                  const std::vector<std::vector<W>>& singles, Config& c, int depth, W w);

template <class W>
BasicMarginal<W> BasicMeasure<W>::marginal(std::vector<int> indices) const {
  if (indices.empty()) throw std::invalid_argument("marginal: empty index set");
  std::sort(indices.begin(), indices.end());
  if (std::adjacent_find(indices.begin(), indices.end()) != indices.end()) {
    throw std::invalid_argument("marginal: duplicate index");
  }
  check_indices(indices);
  std::vector<Entry> entries;
  entries.reserve(support_.size());
  Config key(indices.size());
  for (const auto& [c, w] : support_) {
    for (std::size_t k = 0; k < indices.size(); ++k) key[k] = c[static_cast<std::size_t>(indices[k])];
    entries.emplace_back(key, w);
  }
  return BasicMarginal<W>{std::move(indices),
                          BasicMeasure<W>(alphabet_, static_cast<int>(key.size()), std::move(entries))};
}

template <class W>
BasicMeasure<W> BasicMeasure<W>::product_of_marginals() const {
  std::vector<std::vector<W>> singles;
  singles.reserve(static_cast<std::size_t>(dimension_));
  for (int i = 0; i < dimension_; ++i) singles.push_back(coordinate_marginal(i));

  std::vector<Entry> entries;
  Config c(static_cast<std::size_t>(dimension_), 0);
  push_subtree<W>(entries, singles, c, 0, Ops::one());
  return BasicMeasure<W>(alphabet_, dimension_, std::move(entries));
}

template <class W>
BasicMeasure<W> BasicMeasure<W>::condition(const std::vector<int>& indices, const Config& given) const {
  if (indices.size() != given.size()) {
    throw std::invalid_argument("condition: index/value length mismatch");
  }
  check_indices(indices);
  std::vector<Entry> entries;
  W total = Ops::zero();
  for (const auto& [c, w] : support_) {
    bool match = true;
    for (std::size_t k = 0; k < indices.size(); ++k) {
      if (c[static_cast<std::size_t>(indices[k])] != given[k]) { match = false; break; }
    }
    if (match) {
      entries.emplace_back(c, w);
      total += w;
    }
  }
  if (entries.empty() || Ops::is_zero(total)) {
    throw std::domain_error("condition: zero-probability event");
  }
  for (auto& [c, w] : entries) w = w / total;
  return BasicMeasure<W>(alphabet_, dimension_, std::move(entries));
}

// Helper for product_of_marginals: expands coordinates depth..n-1.
template <class W>
void push_subtree(std::vector<typename BasicMeasure<W>::Entry>& entries,
                  const std::vector<std::vector<W>>& singles, Config& c, int depth, W w) {
  using Ops = detail::WeightOps<W>;
  const int q = static_cast<int>(singles[0].size());
  const int n = static_cast<int>(singles.size());
  for (int s = 0; s < q; ++s) {
    const W& p = singles[static_cast<std::size_t>(depth)][static_cast<std::size_t>(s)];
    if (Ops::is_zero(p)) continue;
    c[static_cast<std::size_t>(depth)] = static_cast<std::uint8_t>(s);
    if (depth + 1 == n) {
      entries.emplace_back(c, w * p);
    } else {
      push_subtree<W>(entries, singles, c, depth + 1, w * p);
    }
  }
}

// -- information-theoretic functionals (double weights, natural log) --------

// Total variation distance, 1/2 * sum |mu - nu|. Requires equal shape.
double tv_distance(const DiscreteMeasure& mu, const DiscreteMeasure& nu);

// Kullback-Leibler divergence in nats; +infinity when mu is not absolutely
// continuous w.r.t. nu; 0 log 0 = 0.
double kl_divergence(const DiscreteMeasure& mu, const DiscreteMeasure& nu);

// Shannon entropy in nats.
double entropy(const DiscreteMeasure& mu);

// H(A | B) for disjoint coordinate blocks of a joint measure. B may be empty.
double conditional_entropy(const DiscreteMeasure& joint, const std::vector<int>& block_a,
                           const std::vector<int>& block_b);

// I(X ; Y | Z) for three disjoint coordinate blocks; Z may be empty.
// Computed from the defining sum; equals H(X|Z) - H(X|Y,Z).
double conditional_mutual_information(const DiscreteMeasure& joint, const std::vector<int>& block_x,
                                      const std::vector<int>& block_y, const std::vector<int>& block_z);

// Sum over coordinate pairs i<j of dTV(mu_{i,j}, mu_i x mu_j). A measure is
// eps-symmetric when this is below eps * n^2. Requires dimension >= 2.
double symmetry_defect(const DiscreteMeasure& mu);

// Coordinate-wise pairing of two measures on the same dimension n: the
// distribution of ((sigma_1,tau_1),...,(sigma_n,tau_n)) for independent
// sigma ~ a, tau ~ b. Pair symbol encoding: s * b.q + t.
DiscreteMeasure tensor_product(const DiscreteMeasure& a, const DiscreteMeasure& b);

// Rank-one pairing: distribution on (Omega^2)^(n_a * n_b) of the array
// (sigma_i, tau_j), flattened row-major over (i, j).
DiscreteMeasure oplus_product(const DiscreteMeasure& a, const DiscreteMeasure& b);

}  // namespace cutlim
