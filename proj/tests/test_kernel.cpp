#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "cutlim/distance.hpp"
#include "cutlim/kernel.hpp"
#include "cutlim/law.hpp"
#include "cutlim/measure.hpp"
#include "cutlim/models.hpp"
#include "test_util.hpp"

using namespace cutlim;

namespace {

double noperm_value(const StepKernel& a, const StepKernel& b) {
  return kernel_distance_noperm(a, b).upper;
}

}  // namespace

TEST_CASE("discretize") {
  auto constant = discretize(Alphabet{2}, 4, [](double, double) {
    return std::vector<double>{0.5, 0.5};
  });
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) CHECK(constant.at(i, j, 1) == doctest::Approx(0.5));
  }

  // Midpoint evaluation of the product kernel on a 2-grid.
  auto sx = iscaled_limit_kernel(2);
  CHECK(sx.at(0, 0, 1) == doctest::Approx(1.0 / 16));
  CHECK(sx.at(0, 1, 1) == doctest::Approx(3.0 / 16));
  CHECK(sx.at(1, 0, 1) == doctest::Approx(3.0 / 16));
  CHECK(sx.at(1, 1, 1) == doctest::Approx(9.0 / 16));

  auto cw = curie_weiss_limit_kernel(0.7);
  CHECK(cw.num_rows() == 1);
  CHECK(cw.at(0, 0, 0) == doctest::Approx(0.5));

  CHECK_THROWS_AS(discretize(Alphabet{2}, 2, [](double, double) {
    return std::vector<double>{0.9, 0.9};
  }),
                  std::invalid_argument);
}

TEST_CASE("average") {
  CounterRng rng(1);
  auto k = testing::random_kernel(rng, 2, 4, 4);

  // Averaging over the kernel's own grid changes nothing.
  auto rows_id = Partition::identity(k.row_weights);
  auto cols_id = Partition::identity(k.col_weights);
  auto same = average(k, rows_id, cols_id);
  for (std::size_t t = 0; t < k.blocks.size(); ++t) CHECK(same.blocks[t] == doctest::Approx(k.blocks[t]));

  // One-cell partitions give the global mean.
  auto trivial_r = Partition::trivial(k.row_weights);
  auto trivial_c = Partition::trivial(k.col_weights);
  auto flat = average(k, trivial_r, trivial_c);
  double mean1 = 0.0;
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) mean1 += k.row_weights[static_cast<std::size_t>(i)] * k.col_weights[static_cast<std::size_t>(j)] * k.at(i, j, 1);
  }
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) CHECK(flat.at(i, j, 1) == doctest::Approx(mean1));
  }

  // Hand-averaged 2x2 block pattern.
  StepKernel hand;
  hand.alphabet = Alphabet{2};
  hand.row_weights = {0.5, 0.5};
  hand.col_weights = {0.5, 0.5};
  hand.blocks = {1, 0, 0, 1, 0, 1, 1, 0};
  auto averaged = average(hand, Partition::trivial(hand.row_weights), Partition::trivial(hand.col_weights));
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      CHECK(averaged.at(i, j, 0) == doctest::Approx(0.5));
      CHECK(averaged.at(i, j, 1) == doctest::Approx(0.5));
    }
  }

  // Idempotence for fixed partitions.
  std::vector<int> assign{0, 0, 1, 1};
  auto rp = Partition::from_assignment(assign, k.row_weights);
  auto cp = Partition::from_assignment(assign, k.col_weights);
  auto once = average(k, rp, cp);
  auto twice = average(once, rp, cp);
  for (std::size_t t = 0; t < once.blocks.size(); ++t) CHECK(twice.blocks[t] == doctest::Approx(once.blocks[t]));
}

TEST_CASE("bipartite embedding structure") {
  // A symbol of constant probability zero embeds to the zero function.
  StepKernel point = StepKernel::constant(Alphabet{2}, {1.0, 0.0});
  auto zero_side = bipartite_embed(point, 1);
  for (double v : zero_side.values) CHECK(v == 0.0);

  // Constant c sits in the off-diagonal quadrants.
  StepKernel c = StepKernel::constant(Alphabet{2}, {0.3, 0.7});
  auto e = bipartite_embed(c, 1);
  CHECK(e.rows == 2);
  CHECK(e.value(0, 0) == 0.0);
  CHECK(e.value(0, 1) == doctest::Approx(0.7));
  CHECK(e.value(1, 0) == doctest::Approx(0.7));
  CHECK(e.value(1, 1) == 0.0);
  CHECK(e.row_weight(0) == doctest::Approx(0.5));

  // Symmetry on a rectangular kernel.
  CounterRng rng(4);
  auto k = testing::random_kernel(rng, 2, 3, 5, /*uniform_weights=*/false);
  auto m = bipartite_embed(k, 0);
  for (int i = 0; i < m.rows; ++i) {
    for (int j = 0; j < m.cols; ++j) CHECK(m.value(i, j) == doctest::Approx(m.value(j, i)));
  }
}

TEST_CASE("bipartite identity") {
  CounterRng rng(6);
  for (int trial = 0; trial < 25; ++trial) {
    const int rows = 2 + static_cast<int>(rng.next_below(5));
    const int cols = 2 + static_cast<int>(rng.next_below(5));
    auto a = testing::random_kernel(rng, 2, rows, cols);
    auto b = testing::random_kernel(rng, 2, rows, cols);
    double direct = 0.0, embedded = 0.0;
    for (int w = 0; w < 2; ++w) {
      RealMatrix d = slice(a, w);
      const RealMatrix o = slice(b, w);
      for (std::size_t t = 0; t < d.values.size(); ++t) d.values[t] -= o.values[t];
      direct = std::max(direct, cut_norm_exact(d).value);

      RealMatrix ea = bipartite_embed(a, w);
      const RealMatrix eb = bipartite_embed(b, w);
      for (std::size_t t = 0; t < ea.values.size(); ++t) ea.values[t] -= eb.values[t];
      embedded = std::max(embedded, cut_norm_exact(ea).value);
    }
    CHECK(direct == doctest::Approx(2.0 * embedded).epsilon(1e-12));
  }
}

TEST_CASE("tensor and oplus on point-mass kernels") {
  StepKernel d0 = StepKernel::constant(Alphabet{2}, {1.0, 0.0});
  StepKernel d1 = StepKernel::constant(Alphabet{2}, {0.0, 1.0});
  auto t = tensor(d0, d1);
  CHECK(t.alphabet.size == 4);
  CHECK(t.at(0, 0, 1) == doctest::Approx(1.0));  // pair (0, 1)

  StepKernel fair = StepKernel::constant(Alphabet{2}, {0.5, 0.5});
  auto u = tensor(fair, fair);
  for (int w = 0; w < 4; ++w) CHECK(u.at(0, 0, w) == doctest::Approx(0.25));

  auto o = oplus(d0, d1);
  CHECK(o.at(0, 0, 1) == doctest::Approx(1.0));
}

TEST_CASE("discrete product measures commute with kernel products") {
  // tensor: the law of mu (x) nu equals the (x)-product of the laws. The
  // kernels differ only by row order, so compare as canonical laws.
  CounterRng rng(12);
  auto mu = testing::random_measure(rng, 2, 2, 3);
  auto nu = testing::random_measure(rng, 2, 2, 3);
  auto lhs = embed(tensor_product(mu, nu));
  auto rhs = from_kernel(tensor(to_kernel(embed(mu)), to_kernel(embed(nu))));
  CHECK(lhs == rhs);

  // oplus shares the row variable, so the embeddings must first be put on
  // the product row grid (the step-function realisation of the row
  // interleaving); then the pair-array law matches exactly.
  auto a = testing::random_measure(rng, 2, 2, 2);
  auto b = testing::random_measure(rng, 2, 2, 2);
  auto ka = to_kernel(embed(a));
  auto kb = to_kernel(embed(b));
  auto expand = [](const StepKernel& self, const StepKernel& other, bool self_first) {
    StepKernel out;
    out.alphabet = self.alphabet;
    out.col_weights = self.col_weights;
    const int ks = self.num_rows(), ko = other.num_rows();
    const int q = self.alphabet.size;
    for (int u = 0; u < (self_first ? ks : ko); ++u) {
      for (int v = 0; v < (self_first ? ko : ks); ++v) {
        const int si = self_first ? u : v;
        const int oi = self_first ? v : u;
        out.row_weights.push_back(self.row_weights[static_cast<std::size_t>(si)] *
                                  other.row_weights[static_cast<std::size_t>(oi)]);
        for (int c = 0; c < self.num_cols(); ++c) {
          auto p = self.block(si, c);
          for (int w = 0; w < q; ++w) out.blocks.push_back(p[static_cast<std::size_t>(w)]);
        }
      }
    }
    return out;
  };
  auto lhs2 = embed(oplus_product(a, b));
  auto rhs2 = from_kernel(oplus(expand(ka, kb, true), expand(kb, ka, false)));
  CHECK(lhs2 == rhs2);
}

TEST_CASE("weak regularity") {
  // Constant kernels are already regular.
  auto constant = StepKernel::constant(Alphabet{2}, {0.4, 0.6});
  auto r = weak_regularity(constant, 0.1, 8);
  CHECK(r.residual == doctest::Approx(0.0));
  CHECK(r.iterations == 0);
  CHECK(r.reached_target);

  // A kernel that is itself a step function on a coarse grid is recovered
  // at residual ~0 once the partitions refine to its grid.
  StepKernel blocky;
  blocky.alphabet = Alphabet{2};
  blocky.row_weights.assign(8, 0.125);
  blocky.col_weights.assign(8, 0.125);
  blocky.blocks.resize(8 * 8 * 2);
  for (int i = 0; i < 8; ++i) {
    for (int j = 0; j < 8; ++j) {
      const double p = (i < 4) == (j < 4) ? 0.9 : 0.1;
      blocky.at(i, j, 1) = p;
      blocky.at(i, j, 0) = 1.0 - p;
    }
  }
  auto rb = weak_regularity(blocky, 0.01, 10);
  CHECK(rb.reached_target);
  CHECK(rb.residual < 0.01);
  CHECK(rb.rows.classes <= 4);

  // Random 16x16 kernels meet eps = 0.2 within ceil(q / eps^2) rounds.
  CounterRng rng(31);
  for (int trial = 0; trial < 5; ++trial) {
    auto k = testing::random_kernel(rng, 2, 16, 16);
    auto rr = weak_regularity(k, 0.2, 50);
    CHECK(rr.reached_target);
    CHECK(rr.residual < 0.2);
    CHECK(rr.iterations <= 50);
    CHECK(rr.certified);
  }
}

TEST_CASE("averaging is a cut-distance contraction") {
  CounterRng rng(44);
  for (int trial = 0; trial < 15; ++trial) {
    auto a = testing::random_kernel(rng, 2, 6, 6);
    auto b = testing::random_kernel(rng, 2, 6, 6);
    std::vector<int> assign(6);
    for (auto& v : assign) v = static_cast<int>(rng.next_below(3));
    auto rp = Partition::from_assignment(assign, a.row_weights);
    for (auto& v : assign) v = static_cast<int>(rng.next_below(3));
    auto cp = Partition::from_assignment(assign, a.col_weights);
    const double base = noperm_value(a, b);
    const double averaged = noperm_value(average(a, rp, cp), average(b, rp, cp));
    CHECK(averaged <= base + 1e-12);
  }
}

TEST_CASE("refinement monotonicity") {
  CounterRng rng(45);
  for (int trial = 0; trial < 15; ++trial) {
    auto k = testing::random_kernel(rng, 2, 8, 8);
    std::vector<int> coarse(8), fine(8);
    for (int i = 0; i < 8; ++i) {
      coarse[static_cast<std::size_t>(i)] = i / 4;
      fine[static_cast<std::size_t>(i)] = i / 2;  // refines coarse
    }
    auto coarse_r = Partition::from_assignment(coarse, k.row_weights);
    auto coarse_c = Partition::from_assignment(coarse, k.col_weights);
    auto fine_r = Partition::from_assignment(fine, k.row_weights);
    auto fine_c = Partition::from_assignment(fine, k.col_weights);
    const double d_coarse = noperm_value(k, average(k, coarse_r, coarse_c));
    const double d_fine = noperm_value(k, average(k, fine_r, fine_c));
    CHECK(d_fine <= 2.0 * d_coarse + 1e-12);
  }
}

TEST_CASE("outputs stay probability kernels") {
  CounterRng rng(50);
  auto a = testing::random_kernel(rng, 2, 5, 4, false);
  auto b = testing::random_kernel(rng, 3, 3, 6, false);
  CHECK_NOTHROW(tensor(a, b).validate());
  CHECK_NOTHROW(oplus(a, b).validate());
  auto [ra, rb] = common_refinement(a, testing::random_kernel(rng, 2, 7, 3, false));
  CHECK_NOTHROW(ra.validate());
  CHECK_NOTHROW(rb.validate());
  CHECK(ra.row_weights == rb.row_weights);
  CHECK(ra.col_weights == rb.col_weights);
}
