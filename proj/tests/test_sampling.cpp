#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "cutlim/models.hpp"
#include "cutlim/sampling.hpp"
#include "test_util.hpp"

using namespace cutlim;

TEST_CASE("batches are bit-reproducible") {
  auto kernel = iscaled_limit_kernel(8);
  auto a = sample_matrix(kernel, 12, 99);
  auto b = sample_matrix(kernel, 12, 99);
  CHECK(a.symbols == b.symbols);
  CHECK(a.row_coords == b.row_coords);
  CHECK(a.col_coords == b.col_coords);
  auto c = sample_matrix(kernel, 12, 100);
  CHECK(a.symbols != c.symbols);
}

TEST_CASE("point-mass kernel yields a constant array") {
  auto point = StepKernel::constant(Alphabet{2}, {0.0, 1.0});
  auto batch = sample_matrix(point, 6, 4);
  for (auto s : batch.symbols) CHECK(s == 1);
  CHECK(empirical_law(batch).support_size() == 1);
}

TEST_CASE("fair-coin kernel obeys the law of large numbers") {
  auto fair = StepKernel::constant(Alphabet{2}, {0.5, 0.5});
  auto batch = sample_matrix(fair, 1000, 21);
  double ones = 0.0;
  for (auto s : batch.symbols) ones += s;
  CHECK(ones / (1000.0 * 1000.0) == doctest::Approx(0.5).epsilon(0.05));
}

TEST_CASE("product kernel sample mean near one quarter") {
  auto kernel = iscaled_limit_kernel(64);
  auto batch = sample_matrix(kernel, 64, 17);
  double ones = 0.0;
  for (auto s : batch.symbols) ones += s;
  // Mean of s*x is 1/4; coordinate fluctuations dominate the error.
  CHECK(std::abs(ones / (64.0 * 64.0) - 0.25) <= 0.08);
}

TEST_CASE("empirical law") {
  auto fair = StepKernel::constant(Alphabet{2}, {0.5, 0.5});
  auto batch = sample_matrix(fair, 2, 11);
  batch.symbols = {0, 1, 1, 0};
  auto law = empirical_law(batch);
  CHECK(law.support_size() == 2);
  CHECK(law.mass(Config{0, 1}) == doctest::Approx(0.5));
  CHECK(law.mass(Config{1, 0}) == doctest::Approx(0.5));

  auto batch9 = sample_matrix(iscaled_limit_kernel(16), 9, 5);
  auto law9 = empirical_law(batch9);
  double total = 0.0;
  for (const auto& [c, w] : law9.support()) total += w;
  CHECK(total == doctest::Approx(1.0));
}

TEST_CASE("empirical marginals track the minor expectations") {
  // Column frequencies are sums of independent Bernoulli draws with the
  // minor probabilities; check a 3-sigma binomial band at n = 100.
  auto batch = sample_matrix(iscaled_limit_kernel(32), 100, 31);
  const int n = batch.n;
  for (int j = 0; j < n; j += 7) {
    double expected = 0.0, variance = 0.0, observed = 0.0;
    for (int i = 0; i < n; ++i) {
      const double p = batch.minor.at(i, j, 1);
      expected += p;
      variance += p * (1.0 - p);
      observed += batch.symbol(i, j);
    }
    CHECK(std::abs(observed - expected) <= 3.0 * std::sqrt(variance) + 1e-9);
  }
}

TEST_CASE("symbol kernel is the point-mass version of the minor") {
  auto batch = sample_matrix(iscaled_limit_kernel(8), 5, 3);
  auto sk = symbol_kernel(batch);
  sk.validate();
  for (int i = 0; i < 5; ++i) {
    for (int j = 0; j < 5; ++j) CHECK(sk.at(i, j, batch.symbol(i, j)) == doctest::Approx(1.0));
  }
}

TEST_CASE("exchangeable stream determinism and prefix consistency") {
  std::vector<std::pair<double, StepKernel>> mixture;
  mixture.emplace_back(0.5, StepKernel::constant(Alphabet{2}, {0.8, 0.2}));
  mixture.emplace_back(0.5, iscaled_limit_kernel(4));
  ExchangeableStream stream(mixture, 42);

  // Scattered access order must agree with a fresh prefix scan.
  const auto direct_32 = stream.at(3, 2);
  const auto direct_00 = stream.at(0, 0);
  ExchangeableStream replay(mixture, 42);
  auto grid = replay.prefix(4, 4);
  CHECK(grid[0] == direct_00);
  CHECK(grid[3 * 4 + 2] == direct_32);

  // A point-mass component makes the array deterministic.
  std::vector<std::pair<double, StepKernel>> point;
  point.emplace_back(1.0, StepKernel::constant(Alphabet{2}, {0.0, 1.0}));
  ExchangeableStream det(point, 7);
  for (auto s : det.prefix(5, 5)) CHECK(s == 1);
}

TEST_CASE("one-by-one pattern frequency matches the kernel") {
  std::vector<std::pair<double, StepKernel>> mixture;
  mixture.emplace_back(1.0, StepKernel::constant(Alphabet{2}, {0.3, 0.7}));
  int ones = 0;
  const int trials = 20000;
  for (int t = 0; t < trials; ++t) {
    ExchangeableStream stream(mixture, 1000 + static_cast<std::uint64_t>(t));
    ones += stream.at(0, 0);
  }
  const double freq = static_cast<double>(ones) / trials;
  const double sigma = std::sqrt(0.3 * 0.7 / trials);
  CHECK(std::abs(freq - 0.7) <= 3.0 * sigma);
}

TEST_CASE("row swap leaves small pattern frequencies unchanged") {
  std::vector<std::pair<double, StepKernel>> mixture;
  mixture.emplace_back(0.6, iscaled_limit_kernel(4));
  mixture.emplace_back(0.4, StepKernel::constant(Alphabet{2}, {0.5, 0.5}));
  const int trials = 20000;
  int direct = 0, swapped = 0;
  for (int t = 0; t < trials; ++t) {
    ExchangeableStream a(mixture, 5000 + static_cast<std::uint64_t>(t));
    direct += a.at(0, 0) == 1 && a.at(1, 1) == 1;
    ExchangeableStream b(mixture, 9000000 + static_cast<std::uint64_t>(t));
    swapped += b.at(1, 0) == 1 && b.at(0, 1) == 1;  // rows exchanged
  }
  const double pa = static_cast<double>(direct) / trials;
  const double pb = static_cast<double>(swapped) / trials;
  const double sigma = std::sqrt((pa * (1 - pa) + pb * (1 - pb)) / trials);
  CHECK(std::abs(pa - pb) <= 3.0 * sigma + 1e-9);
}

TEST_CASE("convergence experiment") {
  // Point-mass kernel: the empirical law is the kernel's law exactly.
  auto point = StepKernel::constant(Alphabet{2}, {0.0, 1.0});
  std::vector<int> sizes{4, 8};
  auto rows = sampling_convergence_experiment(point, sizes, 3, 2, 1);
  for (const auto& row : rows) CHECK(row.mean == doctest::Approx(0.0));

  // Fair-coin kernel: the estimate decays at the CLT scale.
  auto fair = StepKernel::constant(Alphabet{2}, {0.5, 0.5});
  std::vector<int> sizes2{8, 32};
  auto rows2 = sampling_convergence_experiment(fair, sizes2, 12, 3, 2);
  CHECK(rows2[1].mean <= rows2[0].mean + rows2[0].std_error + rows2[1].std_error);

  // Thread count cannot change the numbers.
  auto serial = sampling_convergence_experiment(fair, sizes2, 4, 9, 1);
  auto threaded = sampling_convergence_experiment(fair, sizes2, 4, 9, 4);
  for (std::size_t i = 0; i < serial.size(); ++i) {
    CHECK(serial[i].mean == doctest::Approx(threaded[i].mean).epsilon(1e-15));
  }
}
