#include "cutlim/sampling.hpp"

#include <cmath>
#include <stdexcept>

#include "cutlim/distance.hpp"
#include "cutlim/law.hpp"
#include "cutlim/parallel.hpp"

namespace cutlim {

namespace {

constexpr std::uint64_t kRowStream = 0x01;
constexpr std::uint64_t kColStream = 0x02;
constexpr std::uint64_t kEntryStream = 0x03;
constexpr std::uint64_t kComponentStream = 0x04;

// Weighted cell choice plus a uniform position inside the cell. Only the
// cell matters for a step kernel; the coordinate is kept for traceability.
std::pair<int, double> draw_coordinate(std::span<const double> weights, CounterRng& rng) {
  const std::size_t cell = rng.next_weighted(weights);
  double start = 0.0;
  for (std::size_t c = 0; c < cell; ++c) start += weights[c];
  return {static_cast<int>(cell), start + rng.next_unit() * weights[cell]};
}

int draw_symbol(std::span<const double> probs, CounterRng& rng) {
  return static_cast<int>(rng.next_weighted(probs));
}

}  // namespace

SampleBatch sample_matrix(const StepKernel& kappa, int n, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("sample_matrix: n must be >= 1");
  kappa.validate();
  SampleBatch batch;
  batch.n = n;
  batch.seed = seed;
  CounterRng base(seed);

  std::vector<int> row_cells(static_cast<std::size_t>(n)), col_cells(static_cast<std::size_t>(n));
  CounterRng row_rng = base.derive(kRowStream);
  CounterRng col_rng = base.derive(kColStream);
  for (int i = 0; i < n; ++i) {
    auto [cell, coord] = draw_coordinate(kappa.row_weights, row_rng);
    row_cells[static_cast<std::size_t>(i)] = cell;
    batch.row_coords.push_back(coord);
  }
  for (int j = 0; j < n; ++j) {
    auto [cell, coord] = draw_coordinate(kappa.col_weights, col_rng);
    col_cells[static_cast<std::size_t>(j)] = cell;
    batch.col_coords.push_back(coord);
  }

  const int q = kappa.alphabet.size;
  batch.minor.alphabet = kappa.alphabet;
  batch.minor.row_weights.assign(static_cast<std::size_t>(n), 1.0 / n);
  batch.minor.col_weights.assign(static_cast<std::size_t>(n), 1.0 / n);
  batch.minor.blocks.resize(static_cast<std::size_t>(n) * static_cast<std::size_t>(n) *
                            static_cast<std::size_t>(q));
  batch.symbols.resize(static_cast<std::size_t>(n) * static_cast<std::size_t>(n));

  CounterRng entry_base = base.derive(kEntryStream);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      auto p = kappa.block(row_cells[static_cast<std::size_t>(i)], col_cells[static_cast<std::size_t>(j)]);
      for (int w = 0; w < q; ++w) batch.minor.at(i, j, w) = p[static_cast<std::size_t>(w)];
      CounterRng entry_rng = entry_base.derive(static_cast<std::uint64_t>(i) * static_cast<std::uint64_t>(n) + static_cast<std::uint64_t>(j));
      batch.symbols[static_cast<std::size_t>(i) * n + j] = static_cast<std::uint8_t>(draw_symbol(p, entry_rng));
    }
  }
  return batch;
}

DiscreteMeasure empirical_law(const SampleBatch& batch) {
  const int n = batch.n;
  std::vector<DiscreteMeasure::Entry> entries;
  entries.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    Config row(batch.symbols.begin() + static_cast<std::ptrdiff_t>(i) * n,
               batch.symbols.begin() + static_cast<std::ptrdiff_t>(i + 1) * n);
    entries.emplace_back(std::move(row), 1.0 / n);
  }
  return DiscreteMeasure(batch.minor.alphabet, n, std::move(entries));
}

StepKernel symbol_kernel(const SampleBatch& batch) {
  StepKernel k;
  k.alphabet = batch.minor.alphabet;
  k.row_weights = batch.minor.row_weights;
  k.col_weights = batch.minor.col_weights;
  k.blocks.assign(batch.minor.blocks.size(), 0.0);
  for (int i = 0; i < batch.n; ++i) {
    for (int j = 0; j < batch.n; ++j) k.at(i, j, batch.symbol(i, j)) = 1.0;
  }
  return k;
}

ExchangeableStream::ExchangeableStream(std::vector<std::pair<double, StepKernel>> mixture,
                                       std::uint64_t seed)
    : mixture_(std::move(mixture)), base_(seed) {
  if (mixture_.empty()) throw std::invalid_argument("ExchangeableStream: empty mixture");
  double total = 0.0;
  std::vector<double> weights;
  for (const auto& [w, k] : mixture_) {
    if (!(w > 0.0)) throw std::invalid_argument("ExchangeableStream: weights must be positive");
    k.validate();
    total += w;
    weights.push_back(w);
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw std::invalid_argument("ExchangeableStream: weights must sum to 1");
  }
  CounterRng comp_rng = base_.derive(kComponentStream);
  component_index_ = comp_rng.next_weighted(weights);
}

int ExchangeableStream::row_cell(std::int64_t i) const {
  if (auto it = row_cache_.find(i); it != row_cache_.end()) return it->second;
  CounterRng rng = base_.derive(kRowStream).derive(static_cast<std::uint64_t>(i));
  const int cell = static_cast<int>(rng.next_weighted(component().row_weights));
  row_cache_.emplace(i, cell);
  return cell;
}

int ExchangeableStream::col_cell(std::int64_t j) const {
  if (auto it = col_cache_.find(j); it != col_cache_.end()) return it->second;
  CounterRng rng = base_.derive(kColStream).derive(static_cast<std::uint64_t>(j));
  const int cell = static_cast<int>(rng.next_weighted(component().col_weights));
  col_cache_.emplace(j, cell);
  return cell;
}

std::uint8_t ExchangeableStream::at(std::int64_t i, std::int64_t j) const {
  if (i < 0 || j < 0) throw std::out_of_range("ExchangeableStream: negative index");
  CounterRng rng = base_.derive(kEntryStream).derive(static_cast<std::uint64_t>(i)).derive(static_cast<std::uint64_t>(j));
  const auto p = component().block(row_cell(i), col_cell(j));
  return static_cast<std::uint8_t>(draw_symbol(p, rng));
}

std::vector<std::uint8_t> ExchangeableStream::prefix(int rows, int cols) const {
  std::vector<std::uint8_t> out(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols));
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) out[static_cast<std::size_t>(i) * cols + j] = at(i, j);
  }
  return out;
}

std::vector<ConvergenceRow> sampling_convergence_experiment(const StepKernel& kappa,
                                                            std::span<const int> n_list, int trials,
                                                            std::uint64_t seed, int threads) {
  if (trials < 1) throw std::invalid_argument("sampling_convergence_experiment: trials must be >= 1");
  for (std::size_t i = 1; i < n_list.size(); ++i) {
    if (n_list[i] < n_list[i - 1]) {
      throw std::invalid_argument("sampling_convergence_experiment: n_list must be ascending");
    }
  }
  std::vector<ConvergenceRow> rows;
  CounterRng base(seed);
  for (std::size_t ni = 0; ni < n_list.size(); ++ni) {
    const int n = n_list[ni];
    std::vector<double> values(static_cast<std::size_t>(trials), 0.0);
    CounterRng level = base.derive(ni);
    parallel_for(static_cast<std::size_t>(trials), threads, [&](std::size_t t) {
      const std::uint64_t trial_seed = level.derive(t).next_u64();
      SampleBatch batch = sample_matrix(kappa, n, trial_seed);
      const StepKernel empirical = to_kernel(embed(empirical_law(batch)));
      values[t] = aligned_cut_estimate(kappa, empirical, 24, trial_seed ^ 0xabcd);
    });
    double sum = 0.0, sum_sq = 0.0;
    for (double v : values) {
      sum += v;
      sum_sq += v * v;
    }
    const double mean = sum / trials;
    const double var = trials > 1 ? std::max(0.0, (sum_sq - trials * mean * mean) / (trials - 1)) : 0.0;
    rows.push_back({n, mean, std::sqrt(var / trials)});
  }
  return rows;
}

}  // namespace cutlim
