#include "cutlim/models.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cutlim {

namespace {

constexpr int kMaxEnumDim = 20;

int popcount_parity(const Config& c) {
  int ones = 0;
  for (auto s : c) ones += s;
  return ones & 1;
}

}  // namespace

DiscreteMeasure parity_measure(int n, ParityClass parity) {
  if (n < 1) throw std::invalid_argument("parity_measure: n must be >= 1");
  if (n > kMaxEnumDim) throw SizeLimitError("parity_measure: n exceeds enumeration bound");
  const int want = parity == ParityClass::kEven ? 0 : 1;
  std::vector<DiscreteMeasure::Entry> entries;
  entries.reserve(1ULL << std::max(0, n - 1));
  const double w = n == 1 ? 1.0 : std::ldexp(1.0, 1 - n);  // 2^{1-n}
  for_each_config(2, n, [&](const Config& c) {
    if (popcount_parity(c) == want) entries.emplace_back(c, w);
  });
  return DiscreteMeasure(Alphabet{2}, n, std::move(entries));
}

Coupling parity_flip_coupling(int n) {
  Coupling g;
  g.left = parity_measure(n, ParityClass::kEven);
  g.right = parity_measure(n, ParityClass::kOdd);
  auto rsup = g.right.support();
  auto right_index = [&](const Config& c) {
    auto it = std::lower_bound(rsup.begin(), rsup.end(), c,
                               [](const DiscreteMeasure::Entry& e, const Config& key) { return e.first < key; });
    return static_cast<int>(it - rsup.begin());
  };
  auto lsup = g.left.support();
  for (int i = 0; i < static_cast<int>(lsup.size()); ++i) {
    Config flipped = lsup[static_cast<std::size_t>(i)].first;
    flipped.back() ^= 1u;
    g.entries.push_back({i, right_index(flipped), lsup[static_cast<std::size_t>(i)].second});
  }
  g.validate();
  return g;
}

DiscreteMeasure iscaled_measure(int n) {
  if (n < 1 || n > 16) throw std::invalid_argument("iscaled_measure: n must be in [1, 16]");
  std::vector<DiscreteMeasure::Entry> entries;
  entries.reserve(1ULL << n);
  std::vector<double> poly, next;
  for_each_config(2, n, [&](const Config& c) {
    // Expand prod_i (a_i s + b_i), a_i = +-i/n, then integrate monomials.
    poly.assign(1, 1.0);
    for (int i = 1; i <= n; ++i) {
      const bool one = c[static_cast<std::size_t>(i - 1)] == 1;
      const double a = one ? static_cast<double>(i) / n : -static_cast<double>(i) / n;
      const double b = one ? 0.0 : 1.0;
      next.assign(poly.size() + 1, 0.0);
      for (std::size_t d = 0; d < poly.size(); ++d) {
        next[d] += b * poly[d];
        next[d + 1] += a * poly[d];
      }
      poly.swap(next);
    }
    double integral = 0.0;
    for (std::size_t d = 0; d < poly.size(); ++d) integral += poly[d] / static_cast<double>(d + 1);
    if (integral > 0.0) entries.emplace_back(c, integral);
  });
  return DiscreteMeasure(Alphabet{2}, n, std::move(entries));
}

StepKernel iscaled_limit_kernel(int grid) {
  return discretize(Alphabet{2}, grid,
                    [](double s, double x) { return std::vector<double>{1.0 - s * x, s * x}; });
}

DiscreteMeasure curie_weiss_measure(const CurieWeissSpec& spec) {
  if (spec.n < 1) throw std::invalid_argument("curie_weiss_measure: n must be >= 1");
  if (spec.n > kMaxEnumDim) throw SizeLimitError("curie_weiss_measure: n exceeds enumeration bound");
  if (!(spec.temperature > 0.0)) throw std::invalid_argument("curie_weiss_measure: T must be positive");
  const int n = spec.n;
  // sum_{i<j} s_i s_j = (M^2 - n) / 2 with M the total spin; the weight
  // depends on the configuration only through its number of ones.
  std::vector<double> log_weight(static_cast<std::size_t>(n) + 1);
  double max_log = -1e300;
  for (int ones = 0; ones <= n; ++ones) {
    const double m = 2.0 * ones - n;
    log_weight[static_cast<std::size_t>(ones)] = spec.temperature / n * (m * m - n) / 2.0;
    max_log = std::max(max_log, log_weight[static_cast<std::size_t>(ones)]);
  }
  std::vector<DiscreteMeasure::Entry> entries;
  entries.reserve(1ULL << n);
  for_each_config(2, n, [&](const Config& c) {
    int ones = 0;
    for (auto s : c) ones += s;
    entries.emplace_back(c, std::exp(log_weight[static_cast<std::size_t>(ones)] - max_log));
  });
  return DiscreteMeasure::from_unnormalized(Alphabet{2}, n, std::move(entries));
}

double curie_weiss_magnetization(double temperature) {
  if (!(temperature > 1.0)) {
    throw std::domain_error("curie_weiss_magnetization: no positive root for T <= 1");
  }
  auto f = [&](double m) { return std::tanh(temperature * m) - m; };
  double lo = 0.0, hi = 1.0;  // f > 0 just above 0, f(1) < 0
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (f(mid) > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
    if (hi - lo < 1e-13) break;
  }
  return 0.5 * (lo + hi);
}

double curie_weiss_magnetization_newton(double temperature) {
  if (!(temperature > 1.0)) {
    throw std::domain_error("curie_weiss_magnetization_newton: no positive root for T <= 1");
  }
  auto f = [&](double m) { return std::tanh(temperature * m) - m; };
  auto df = [&](double m) {
    const double t = std::tanh(temperature * m);
    return temperature * (1.0 - t * t) - 1.0;
  };
  // Newton steps inside a maintained bracket; bisect when a step escapes.
  double lo = 1e-12, hi = 1.0 - 1e-15;
  double m = 0.5;
  for (int it = 0; it < 200; ++it) {
    const double fm = f(m);
    if (fm > 0.0) {
      lo = m;
    } else {
      hi = m;
    }
    const double d = df(m);
    double next = d != 0.0 ? m - fm / d : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - m) < 1e-15) return next;
    m = next;
  }
  return m;
}

StepKernel curie_weiss_limit_kernel(double temperature) {
  if (!(temperature > 0.0)) throw std::invalid_argument("curie_weiss_limit_kernel: T must be positive");
  if (temperature <= 1.0) return StepKernel::constant(Alphabet{2}, {0.5, 0.5});
  const double m = curie_weiss_magnetization(temperature);
  StepKernel k;
  k.alphabet = Alphabet{2};
  k.row_weights = {0.5, 0.5};
  k.col_weights = {1.0};
  // Symbol 1 is spin +1: the first row phase magnetises up.
  k.blocks = {(1.0 - m) / 2.0, (1.0 + m) / 2.0, (1.0 + m) / 2.0, (1.0 - m) / 2.0};
  return k;
}

}  // namespace cutlim
