#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "cutlim/distance.hpp"
#include "cutlim/law.hpp"
#include "cutlim/lp.hpp"
#include "cutlim/models.hpp"
#include "test_util.hpp"

using namespace cutlim;

namespace {

DiscreteMeasure two_points(int n, int a, int b, double pa) {
  std::vector<DiscreteMeasure::Entry> entries;
  Config ca(static_cast<std::size_t>(n), static_cast<std::uint8_t>(a));
  Config cb(static_cast<std::size_t>(n), static_cast<std::uint8_t>(b));
  if (pa > 0.0) entries.emplace_back(ca, pa);
  if (pa < 1.0) entries.emplace_back(cb, 1.0 - pa);
  return DiscreteMeasure(Alphabet{2}, n, std::move(entries));
}

}  // namespace

TEST_CASE("simplex solves, detects infeasibility and unboundedness") {
  // min -x - 2y  s.t.  x + y <= 3,  y <= 2,  x,y >= 0  ->  x=1, y=2.
  LpProblem p;
  p.num_vars = 2;
  p.objective = {-1.0, -2.0};
  p.le_rows = {{1.0, 1.0}, {0.0, 1.0}};
  p.le_rhs = {3.0, 2.0};
  auto sol = solve_lp(p);
  REQUIRE(sol.status == LpSolution::Status::kOptimal);
  CHECK(sol.objective == doctest::Approx(-5.0));
  CHECK(sol.x[0] == doctest::Approx(1.0));
  CHECK(sol.x[1] == doctest::Approx(2.0));

  // Conflicting equalities are infeasible.
  LpProblem bad;
  bad.num_vars = 1;
  bad.objective = {0.0};
  bad.eq_rows = {{1.0}, {1.0}};
  bad.eq_rhs = {1.0, 2.0};
  CHECK(solve_lp(bad).status == LpSolution::Status::kInfeasible);

  // Unbounded direction.
  LpProblem open;
  open.num_vars = 1;
  open.objective = {-1.0};
  CHECK(solve_lp(open).status == LpSolution::Status::kUnbounded);

  // Negative right-hand sides route through artificials.
  LpProblem neg;
  neg.num_vars = 2;
  neg.objective = {1.0, 1.0};
  neg.le_rows = {{-1.0, -1.0}};  // x + y >= 2 in disguise
  neg.le_rhs = {-2.0};
  auto ns = solve_lp(neg);
  REQUIRE(ns.status == LpSolution::Status::kOptimal);
  CHECK(ns.objective == doctest::Approx(2.0));
}

TEST_CASE("transport solver finds the monotone optimum on ordered costs") {
  // Convex (squared-distance) costs make the monotone plan optimal, which
  // gives an independent oracle for the LP.
  std::vector<double> supply{0.2, 0.3, 0.5};
  std::vector<double> demand{0.4, 0.6};
  auto cost = [](int i, int j) { return (i - 2.0 * j) * (i - 2.0 * j); };
  auto sol = solve_transport(supply, demand, cost);
  double monotone_cost = 0.0;
  for (const auto& e : monotone_coupling(supply, demand)) monotone_cost += e.mass * cost(e.from, e.to);
  CHECK(sol.cost == doctest::Approx(monotone_cost).epsilon(1e-9));

  std::vector<double> unbalanced{0.9, 0.2};
  CHECK_THROWS_AS(solve_transport(unbalanced, demand, cost), std::invalid_argument);
}

TEST_CASE("coupling constructors and validation") {
  CounterRng rng(1);
  auto mu = testing::random_measure(rng, 2, 3, 5);
  auto nu = testing::random_measure(rng, 2, 3, 5);
  CHECK_NOTHROW(diagonal_coupling(mu).validate());
  CHECK_NOTHROW(independent_coupling(mu, nu).validate());
  CHECK_NOTHROW(greedy_tv_coupling(mu, nu).validate());
  CHECK_NOTHROW(greedy_tv_coupling(mu, mu).validate());

  // The maximal coupling of a measure with itself is the diagonal.
  auto self = greedy_tv_coupling(mu, mu);
  CHECK(self.product_scale == 0.0);
  CHECK(self.entries.size() == mu.support_size());
}

TEST_CASE("adversary value anchors") {
  CounterRng rng(2);
  auto mu = testing::random_measure(rng, 2, 4, 6);
  CHECK(adversary_value(diagonal_coupling(mu)).value == doctest::Approx(0.0));

  // Independent coupling of opposite point masses at n = 1: value 1.
  auto d0 = two_points(1, 0, 1, 1.0);
  auto d1 = two_points(1, 0, 1, 0.0);
  CHECK(adversary_value(independent_coupling(d0, d1)).value == doctest::Approx(1.0));

  // The single-bit-flip coupling of the parity pair: only the flipped
  // coordinate can register, and the event that keeps one sign holds half
  // the mass, so the sup is exactly 1/(2n) for n >= 2 (and 1 at n = 1).
  for (int n = 2; n <= 10; ++n) {
    auto flip = parity_flip_coupling(n);
    CHECK(adversary_value(flip).value == doctest::Approx(1.0 / (2.0 * n)).epsilon(1e-12));
  }
  CHECK(adversary_value(parity_flip_coupling(1)).value == doctest::Approx(1.0));
}

TEST_CASE("adversary is invariant under entry relabelling") {
  CounterRng rng(3);
  auto mu = testing::random_measure(rng, 2, 4, 5);
  auto nu = testing::random_measure(rng, 2, 4, 5);
  auto g = greedy_tv_coupling(mu, nu);
  const double base = adversary_value(g).value;
  std::reverse(g.entries.begin(), g.entries.end());
  CHECK(adversary_value(g).value == doctest::Approx(base));
}

TEST_CASE("product fast path matches explicit materialisation") {
  CounterRng rng(4);
  for (int trial = 0; trial < 10; ++trial) {
    auto mu = testing::random_measure(rng, 2, 4, 4);
    auto nu = testing::random_measure(rng, 2, 4, 4);
    auto product = independent_coupling(mu, nu);
    Coupling dense;
    dense.left = mu;
    dense.right = nu;
    for (int i = 0; i < static_cast<int>(mu.support_size()); ++i) {
      for (int j = 0; j < static_cast<int>(nu.support_size()); ++j) {
        dense.entries.push_back({i, j, mu.support()[static_cast<std::size_t>(i)].second *
                                           nu.support()[static_cast<std::size_t>(j)].second});
      }
    }
    CHECK(adversary_value(product).value == doctest::Approx(adversary_value(dense).value).epsilon(1e-12));
  }
}

TEST_CASE("exchangeability detection") {
  CHECK(is_exchangeable(parity_measure(4, ParityClass::kEven)));
  CHECK(is_exchangeable(curie_weiss_measure({4, 1.5})));
  auto point = DiscreteMeasure::point_mass(Alphabet{2}, Config{0, 1, 1});
  CHECK(!is_exchangeable(point));
}

TEST_CASE("discrete distance basics") {
  CounterRng rng(5);
  auto mu = testing::random_measure(rng, 2, 3, 6);
  auto same = discrete_cut_distance(mu, mu, {});
  CHECK(same.value == doctest::Approx(0.0).epsilon(1e-9));

  // All-zero vs all-one point masses, strong variant at n = 2.
  DiscreteDistanceOptions strong;
  strong.variant = DiscreteVariant::kStrong;
  auto r = discrete_cut_distance(two_points(2, 0, 1, 1.0), two_points(2, 0, 1, 0.0), strong);
  CHECK(r.value == doctest::Approx(1.0).epsilon(1e-9));

  // n = 1: both variants equal the total variation distance.
  auto a = two_points(1, 0, 1, 0.8);
  auto b = two_points(1, 0, 1, 0.1);
  CHECK(discrete_cut_distance(a, b, {}).value == doctest::Approx(0.7).epsilon(1e-9));
  CHECK(discrete_cut_distance(a, b, strong).value == doctest::Approx(0.7).epsilon(1e-9));
}

TEST_CASE("cutting planes match the full witness enumeration") {
  CounterRng rng(6);
  for (int trial = 0; trial < 8; ++trial) {
    const int n = 2 + static_cast<int>(rng.next_below(3));
    auto mu = testing::random_measure(rng, 2, n, 5);
    auto nu = testing::random_measure(rng, 2, n, 5);
    DiscreteDistanceOptions lazy;
    lazy.variant = DiscreteVariant::kStrong;
    DiscreteDistanceOptions oracle = lazy;
    oracle.full_witness_enumeration = true;
    const double a = discrete_cut_distance(mu, nu, lazy).value;
    const double b = discrete_cut_distance(mu, nu, oracle).value;
    CHECK(a == doctest::Approx(b).epsilon(2e-9));
  }
}

TEST_CASE("weak distance never exceeds strong, and premetric axioms hold") {
  CounterRng rng(7);
  for (int trial = 0; trial < 6; ++trial) {
    auto a = testing::random_measure(rng, 2, 3, 4);
    auto b = testing::random_measure(rng, 2, 3, 4);
    auto c = testing::random_measure(rng, 2, 3, 4);
    DiscreteDistanceOptions strong;
    strong.variant = DiscreteVariant::kStrong;
    const double weak_ab = discrete_cut_distance(a, b, {}).value;
    const double strong_ab = discrete_cut_distance(a, b, strong).value;
    CHECK(weak_ab <= strong_ab + 1e-9);

    const double strong_ba = discrete_cut_distance(b, a, strong).value;
    CHECK(strong_ab == doctest::Approx(strong_ba).epsilon(1e-7));

    const double strong_ac = discrete_cut_distance(a, c, strong).value;
    const double strong_bc = discrete_cut_distance(b, c, strong).value;
    CHECK(strong_ab <= strong_ac + strong_bc + 2e-9);
  }
}

TEST_CASE("upper mode portfolio is certified") {
  CounterRng rng(8);
  for (int trial = 0; trial < 6; ++trial) {
    auto a = testing::random_measure(rng, 2, 3, 6);
    auto b = testing::random_measure(rng, 2, 3, 6);
    DiscreteDistanceOptions upper;
    upper.mode = DiscreteMode::kUpper;
    auto up = discrete_cut_distance(a, b, upper);
    auto exact = discrete_cut_distance(a, b, {});
    CHECK(up.kind == BoundKind::kUpper);
    CHECK(exact.value <= up.value + 1e-9);
  }
}

TEST_CASE("exact mode size guard") {
  CounterRng rng(9);
  auto big = testing::random_measure(rng, 2, 9, 8);
  CHECK_THROWS_AS(discrete_cut_distance(big, big, {}), SizeLimitError);
}

TEST_CASE("kernel noperm distance") {
  CounterRng rng(10);
  auto a = testing::random_kernel(rng, 2, 5, 5);
  CHECK(kernel_distance_noperm(a, a).upper == doctest::Approx(0.0));

  auto zero = StepKernel::constant(Alphabet{2}, {1.0, 0.0});
  auto one = StepKernel::constant(Alphabet{2}, {0.0, 1.0});
  CHECK(kernel_distance_noperm(zero, one).upper == doctest::Approx(1.0));

  // The bipartite cross-check runs automatically on small grids.
  auto b = testing::random_kernel(rng, 2, 5, 5);
  auto r = kernel_distance_noperm(a, b);
  REQUIRE(r.bipartite_value.has_value());
  CHECK(*r.bipartite_value == doctest::Approx(r.upper).epsilon(1e-12));
}

TEST_CASE("exact tiny mode recognises row permutations") {
  CounterRng rng(11);
  auto a = testing::random_kernel(rng, 2, 4, 4);
  StepKernel permuted = a;
  const std::size_t stride = a.col_weights.size() * 2;
  for (int i = 0; i < 4; ++i) {
    const int src = (i + 1) % 4;
    std::copy(a.blocks.begin() + static_cast<std::ptrdiff_t>(stride * static_cast<std::size_t>(src)),
              a.blocks.begin() + static_cast<std::ptrdiff_t>(stride * (static_cast<std::size_t>(src) + 1)),
              permuted.blocks.begin() + static_cast<std::ptrdiff_t>(stride * static_cast<std::size_t>(i)));
  }
  KernelDistanceOptions opts;
  opts.mode = KernelDistanceMode::kExactTiny;
  auto r = kernel_distance(a, permuted, opts);
  CHECK(r.upper == doctest::Approx(0.0));
  CHECK(r.graphon_value.has_value());

  KernelDistanceOptions guard = opts;
  guard.tiny_cells = 3;
  CHECK_THROWS_AS(kernel_distance(a, permuted, guard), SizeLimitError);
}

TEST_CASE("transport bounds bracket the exact tiny value") {
  CounterRng rng(12);
  for (int trial = 0; trial < 8; ++trial) {
    auto a = testing::random_kernel(rng, 2, 4, 4);
    auto b = testing::random_kernel(rng, 2, 4, 4);
    KernelDistanceOptions tiny;
    tiny.mode = KernelDistanceMode::kExactTiny;
    const double exact = kernel_distance(a, b, tiny).upper;
    KernelDistanceOptions transport;
    auto bounds = kernel_distance(a, b, transport);
    CHECK(bounds.lower <= exact + 1e-9);
    CHECK(exact <= bounds.upper + 1e-9);
  }
}

TEST_CASE("finite product-model kernels approach the limit kernel") {
  // Embedded n-dimensional models against the limit discretised on the
  // same grid: the upper bound shrinks as n grows.
  std::vector<double> uppers;
  for (int n : {4, 8, 12}) {
    auto finite = to_kernel(embed(iscaled_measure(n)));
    auto limit = iscaled_limit_kernel(n);
    KernelDistanceOptions opts;
    uppers.push_back(kernel_distance(finite, limit, opts).upper);
  }
  CHECK(uppers[1] < uppers[0]);
  CHECK(uppers[2] < uppers[1]);
}

TEST_CASE("sampled mode returns bounds plus an estimate") {
  auto a = iscaled_limit_kernel(8);
  auto b = iscaled_limit_kernel(8);
  KernelDistanceOptions opts;
  opts.mode = KernelDistanceMode::kSampled;
  opts.sample_n = 16;
  opts.sample_trials = 4;
  opts.seed = 3;
  auto r = kernel_distance(a, b, opts);
  REQUIRE(r.estimate.has_value());
  CHECK(r.lower <= r.upper + 1e-12);
  CHECK(*r.estimate >= 0.0);
  // Identical kernels: the empirical estimate stays small.
  CHECK(*r.estimate <= 0.5);
}

TEST_CASE("embedding comparison") {
  CounterRng rng(13);
  auto mu = testing::random_measure(rng, 2, 3, 5);
  auto same = embedding_comparison(mu, mu);
  CHECK(same.discrete_value == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(same.kernel_upper <= 1e-9);
  CHECK(same.upper_below_discrete);
  CHECK(same.cube_bound_holds);

  auto even = parity_measure(4, ParityClass::kEven);
  auto odd = parity_measure(4, ParityClass::kOdd);
  auto rep = embedding_comparison(even, odd);
  CHECK(rep.discrete_value <= 0.25 + 1e-9);
  CHECK(rep.upper_below_discrete);
  CHECK(rep.cube_bound_holds);

  // n = 1: the discrete distance is the TV distance and the kernel upper
  // bound cannot exceed it.
  auto a = two_points(1, 0, 1, 0.9);
  auto b = two_points(1, 0, 1, 0.4);
  auto line = embedding_comparison(a, b);
  CHECK(line.discrete_value == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(line.kernel_upper <= 0.5 + 1e-9);
  CHECK(line.upper_below_discrete);
}
