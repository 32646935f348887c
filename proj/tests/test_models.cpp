#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "cutlim/measure.hpp"
#include "cutlim/models.hpp"

using namespace cutlim;

TEST_CASE("parity measures") {
  auto even2 = parity_measure(2, ParityClass::kEven);
  CHECK(even2.support_size() == 2);
  CHECK(even2.mass(Config{0, 0}) == doctest::Approx(0.5));
  CHECK(even2.mass(Config{1, 1}) == doctest::Approx(0.5));

  auto even3 = parity_measure(3, ParityClass::kEven);
  CHECK(even3.support_size() == 4);
  for (const auto& [c, w] : even3.support()) CHECK(w == doctest::Approx(0.25));

  // Disjoint supports: total variation one.
  CHECK(tv_distance(even3, parity_measure(3, ParityClass::kOdd)) == doctest::Approx(1.0));

  CHECK_THROWS_AS(parity_measure(0, ParityClass::kEven), std::invalid_argument);
}

TEST_CASE("flip coupling is a valid coupling") {
  for (int n : {2, 5, 10}) {
    auto g = parity_flip_coupling(n);
    CHECK_NOTHROW(g.validate(1e-12));
    CHECK(g.entries.size() == (1ULL << (n - 1)));
  }
}

TEST_CASE("iscaled measure") {
  auto m1 = iscaled_measure(1);
  CHECK(m1.mass(Config{1}) == doctest::Approx(0.5));  // integral of s

  auto m2 = iscaled_measure(2);
  CHECK(m2.mass(Config{1, 1}) == doctest::Approx(1.0 / 6));  // integral of s^2/2

  // Exact coordinate marginals: mu_i(1) = i / (2n).
  for (int n : {3, 5, 8}) {
    auto m = iscaled_measure(n);
    for (int i = 0; i < n; ++i) {
      CHECK(m.coordinate_marginal(i)[1] ==
            doctest::Approx(static_cast<double>(i + 1) / (2.0 * n)).epsilon(1e-12));
    }
  }

  CHECK_THROWS_AS(iscaled_measure(17), std::invalid_argument);
}

TEST_CASE("iscaled limit kernel") {
  auto k = iscaled_limit_kernel(3);
  CHECK(k.num_rows() == 3);
  CHECK(k.at(2, 2, 1) == doctest::Approx((5.0 / 6) * (5.0 / 6)));
  CHECK_NOTHROW(k.validate());
}

TEST_CASE("curie-weiss measure") {
  // Vanishing temperature: the uniform distribution.
  auto cold = curie_weiss_measure({3, 1e-9});
  for (const auto& [c, w] : cold.support()) CHECK(w == doctest::Approx(0.125).epsilon(1e-6));

  // n = 2, T = 2: aligned to anti-aligned weight ratio e : e^{-1}.
  auto cw = curie_weiss_measure({2, 2.0});
  const double aligned = cw.mass(Config{1, 1});
  const double anti = cw.mass(Config{0, 1});
  CHECK(aligned / anti == doctest::Approx(std::exp(2.0)).epsilon(1e-12));

  // Spin-flip symmetry.
  auto cw5 = curie_weiss_measure({5, 1.7});
  for (const auto& [c, w] : cw5.support()) {
    Config flipped = c;
    for (auto& s : flipped) s ^= 1u;
    CHECK(cw5.mass(flipped) == doctest::Approx(w).epsilon(1e-12));
  }
}

TEST_CASE("curie-weiss magnetisation") {
  // Continuity at the phase transition.
  CHECK(curie_weiss_magnetization(1.0 + 1e-4) < 0.02);

  // Reference value at T = 2 from the fixed-point iteration.
  CHECK(std::abs(curie_weiss_magnetization(2.0) - 0.95750) <= 1e-4);

  // Two independent root-finders agree.
  for (double t : {1.2, 1.5, 2.0, 3.0, 4.5}) {
    CHECK(std::abs(curie_weiss_magnetization(t) - curie_weiss_magnetization_newton(t)) <= 1e-10);
  }

  CHECK_THROWS_AS(curie_weiss_magnetization(1.0), std::domain_error);
  CHECK_THROWS_AS(curie_weiss_magnetization(0.5), std::domain_error);

  // Strictly increasing in T beyond the transition.
  double prev = 0.0;
  for (double t = 1.1; t <= 5.05; t += 0.1) {
    const double m = curie_weiss_magnetization(t);
    CHECK(m > prev);
    prev = m;
  }
}

TEST_CASE("curie-weiss limit kernel") {
  auto low = curie_weiss_limit_kernel(1.0);
  CHECK(low.num_rows() == 1);
  CHECK(low.at(0, 0, 0) == doctest::Approx(0.5));
  CHECK(low.at(0, 0, 1) == doctest::Approx(0.5));

  const double m = curie_weiss_magnetization(2.0);
  auto high = curie_weiss_limit_kernel(2.0);
  CHECK(high.num_rows() == 2);
  CHECK(high.row_weights[0] == doctest::Approx(0.5));
  CHECK(high.at(0, 0, 1) == doctest::Approx((1.0 + m) / 2.0));
  CHECK(high.at(1, 0, 1) == doctest::Approx((1.0 - m) / 2.0));
  CHECK_NOTHROW(high.validate());
}
