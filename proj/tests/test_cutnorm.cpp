#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "cutlim/cutnorm.hpp"
#include "cutlim/rng.hpp"
#include "test_util.hpp"

using namespace cutlim;

namespace {

RealMatrix from_rows(std::vector<std::vector<double>> rows) {
  RealMatrix a;
  a.rows = static_cast<int>(rows.size());
  a.cols = static_cast<int>(rows[0].size());
  for (const auto& r : rows) a.values.insert(a.values.end(), r.begin(), r.end());
  return a;
}

RealMatrix random_matrix(CounterRng& rng, int m, int n, double scale = 1.0) {
  RealMatrix a = RealMatrix::zeros(m, n);
  for (double& v : a.values) v = scale * (2.0 * rng.next_unit() - 1.0);
  return a;
}

}  // namespace

TEST_CASE("exact cut norm on anchor matrices") {
  CHECK(cut_norm_exact(RealMatrix::zeros(3, 3)).value == doctest::Approx(0.0));
  CHECK(cut_norm_exact(RealMatrix::zeros(3, 3)).witness.col_set.empty());

  auto diag = from_rows({{1.0, -1.0}, {-1.0, 1.0}});
  auto r = cut_norm_exact(diag);
  CHECK(r.value == doctest::Approx(0.25));
  CHECK(r.witness.row_set.size() == 1);
  CHECK(r.witness.col_set.size() == 1);

  auto ones = from_rows({{1, 1, 1}, {1, 1, 1}, {1, 1, 1}});
  auto full = cut_norm_exact(ones);
  CHECK(full.value == doctest::Approx(1.0));
  CHECK(full.witness.row_set.size() == 3);
  CHECK(full.witness.col_set.size() == 3);
}

TEST_CASE("exact cut norm brute-force cross-check") {
  // Independent oracle: direct enumeration over all rectangle pairs.
  CounterRng rng(3);
  for (int trial = 0; trial < 40; ++trial) {
    auto a = random_matrix(rng, 4, 5);
    double best = 0.0;
    for (unsigned sm = 0; sm < (1u << 4); ++sm) {
      for (unsigned xm = 0; xm < (1u << 5); ++xm) {
        double sum = 0.0;
        for (int i = 0; i < 4; ++i) {
          if (!(sm >> i & 1u)) continue;
          for (int j = 0; j < 5; ++j) {
            if (xm >> j & 1u) sum += a.value(i, j);
          }
        }
        best = std::max(best, std::abs(sum) / 20.0);
      }
    }
    CHECK(cut_norm_exact(a).value == doctest::Approx(best).epsilon(1e-12));
  }
}

TEST_CASE("witness re-evaluation matches the reported value") {
  CounterRng rng(17);
  for (int trial = 0; trial < 60; ++trial) {
    auto a = random_matrix(rng, 7, 6);
    auto r = cut_norm_exact(a);
    CHECK(std::abs(rectangle_mass(a, r.witness.row_set, r.witness.col_set) - r.witness.value) <= 1e-12);
    CHECK(std::abs(std::abs(r.witness.value) - r.value) <= 1e-12);
  }
}

TEST_CASE("alternating heuristic anchors") {
  CHECK(cut_norm_alternating(RealMatrix::zeros(4, 4), 4, 1).value == doctest::Approx(0.0));

  auto diag = from_rows({{1.0, -1.0}, {-1.0, 1.0}});
  CHECK(cut_norm_alternating(diag, 4, 1).value == doctest::Approx(0.25));

  // Rank-one positive: the full rectangle is optimal and monotone reachable.
  CounterRng rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    RealMatrix a = RealMatrix::zeros(6, 6);
    std::vector<double> u(6), v(6);
    for (auto& x : u) x = rng.next_unit() + 0.1;
    for (auto& x : v) x = rng.next_unit() + 0.1;
    for (int i = 0; i < 6; ++i) {
      for (int j = 0; j < 6; ++j) a.value(i, j) = u[static_cast<std::size_t>(i)] * v[static_cast<std::size_t>(j)];
    }
    CHECK(cut_norm_alternating(a, 2, 9).value == doctest::Approx(cut_norm_exact(a).value));
  }
}

TEST_CASE("alternating never exceeds exact") {
  CounterRng rng(23);
  for (int trial = 0; trial < 100; ++trial) {
    auto a = random_matrix(rng, 8, 8);
    const double exact = cut_norm_exact(a).value;
    const double heur = cut_norm_alternating(a, 8, rng.next_u64()).value;
    CHECK(heur <= exact + 1e-12);
  }
}

TEST_CASE("norm axioms on random matrices") {
  CounterRng rng(31);
  for (int trial = 0; trial < 30; ++trial) {
    auto a = random_matrix(rng, 6, 7);
    auto b = random_matrix(rng, 6, 7);
    const double na = cut_norm_exact(a).value;
    CHECK(cut_norm_exact(a.transposed()).value == doctest::Approx(na).epsilon(1e-12));

    RealMatrix scaled = a;
    for (double& v : scaled.values) v *= -2.5;
    CHECK(cut_norm_exact(scaled).value == doctest::Approx(2.5 * na).epsilon(1e-12));

    RealMatrix sum = a;
    for (std::size_t t = 0; t < sum.values.size(); ++t) sum.values[t] += b.values[t];
    CHECK(cut_norm_exact(sum).value <= na + cut_norm_exact(b).value + 1e-12);
  }
}

TEST_CASE("weighted norm matches uniform weights") {
  CounterRng rng(41);
  auto a = random_matrix(rng, 5, 5);
  RealMatrix weighted = a;
  weighted.row_weights.assign(5, 0.2);
  weighted.col_weights.assign(5, 0.2);
  CHECK(cut_norm_exact(weighted).value == doctest::Approx(cut_norm_exact(a).value).epsilon(1e-12));
}

TEST_CASE("size guard") {
  CHECK_THROWS_AS(cut_norm_exact(RealMatrix::zeros(30, 30)), SizeLimitError);
  CHECK_NOTHROW(cut_norm_exact(RealMatrix::zeros(30, 4)));
}

TEST_CASE("sampled cut norm") {
  // Constant-zero kernel difference: every minor is zero.
  RealMatrix zero = RealMatrix::zeros(40, 40);
  CHECK(sampled_cut_norm(zero, 16, 5).value == doctest::Approx(0.0));

  // Constant c: all minors have cut norm exactly c.
  RealMatrix constant = RealMatrix::zeros(40, 40);
  for (double& v : constant.values) v = 0.37;
  const auto sampled = sampled_cut_norm(constant, 16, 5);
  CHECK(sampled.value == doctest::Approx(0.37));
  CHECK(sampled.exact);

  // Random block matrix: the sampled value honours the +8/k^{1/4} margin
  // (a weak bound; checked across seeds).
  CounterRng rng(77);
  RealMatrix blocks = RealMatrix::zeros(32, 32);
  for (int i = 0; i < 32; ++i) {
    for (int j = 0; j < 32; ++j) blocks.value(i, j) = ((i / 8 + j / 8) % 2 == 0) ? 1.0 : -1.0;
  }
  const double exact = cut_norm_alternating(blocks, 32, 3).value;  // near-exact for this structure
  int ok = 0;
  for (int seed = 0; seed < 20; ++seed) {
    const double est = sampled_cut_norm(blocks, 16, static_cast<std::uint64_t>(seed)).value;
    if (est <= exact + 8.0 / std::pow(16.0, 0.25)) ++ok;
  }
  CHECK(ok >= 19);
}
