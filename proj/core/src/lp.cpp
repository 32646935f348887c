#include "cutlim/lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "cutlim/errors.hpp"

namespace cutlim {

namespace {

constexpr double kPivotTol = 1e-9;
constexpr double kCostTol = 1e-9;
constexpr double kFeasTol = 1e-7;

class Tableau {
 public:
  Tableau(const LpProblem& p) {
    const int m_eq = static_cast<int>(p.eq_rows.size());
    const int m_le = static_cast<int>(p.le_rows.size());
    m_ = m_eq + m_le;
    n_ = p.num_vars;

    // Column layout: structural vars, one slack per <= row, artificials.
    slack_base_ = n_;
    art_base_ = n_ + m_le;
    int artificials = m_eq;
    for (int r = 0; r < m_le; ++r) {
      if (p.le_rhs[static_cast<std::size_t>(r)] < 0.0) ++artificials;  // slack enters with -1
    }
    width_ = art_base_ + artificials + 1;
    t_.assign(static_cast<std::size_t>(m_ + 1) * static_cast<std::size_t>(width_), 0.0);
    basis_.assign(static_cast<std::size_t>(m_), -1);
    is_artificial_.assign(static_cast<std::size_t>(width_ - 1), false);

    int art = art_base_;
    int row = 0;
    for (int r = 0; r < m_eq; ++r, ++row) {
      const double sign = p.eq_rhs[static_cast<std::size_t>(r)] < 0.0 ? -1.0 : 1.0;
      for (int j = 0; j < n_; ++j) at(row, j) = sign * p.eq_rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(j)];
      rhs(row) = sign * p.eq_rhs[static_cast<std::size_t>(r)];
      at(row, art) = 1.0;
      is_artificial_[static_cast<std::size_t>(art)] = true;
      basis_[static_cast<std::size_t>(row)] = art++;
    }
    for (int r = 0; r < m_le; ++r, ++row) {
      const bool neg = p.le_rhs[static_cast<std::size_t>(r)] < 0.0;
      const double sign = neg ? -1.0 : 1.0;
      for (int j = 0; j < n_; ++j) at(row, j) = sign * p.le_rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(j)];
      rhs(row) = sign * p.le_rhs[static_cast<std::size_t>(r)];
      at(row, slack_base_ + r) = sign;  // slack keeps the row an equality
      if (neg) {
        at(row, art) = 1.0;
        is_artificial_[static_cast<std::size_t>(art)] = true;
        basis_[static_cast<std::size_t>(row)] = art++;
      } else {
        basis_[static_cast<std::size_t>(row)] = slack_base_ + r;
      }
    }
  }

  // Phase 1: minimise the sum of artificials. Returns false if infeasible.
  bool phase1(int& pivots) {
    // Objective row: reduced costs for cost = 1 on artificial columns.
    for (int j = 0; j < width_ - 1; ++j) obj(j) = is_artificial_[static_cast<std::size_t>(j)] ? 1.0 : 0.0;
    obj(width_ - 1) = 0.0;
    for (int r = 0; r < m_; ++r) {
      if (is_artificial_[static_cast<std::size_t>(basis_[static_cast<std::size_t>(r)])]) {
        for (int j = 0; j < width_; ++j) obj_at(j) -= at(r, j);
      }
    }
    if (!iterate(pivots)) return false;  // unbounded phase 1 cannot happen; treat as failure
    if (-obj_at(width_ - 1) > kFeasTol) return false;

    // Pivot surviving artificials out of the basis where possible.
    for (int r = 0; r < m_; ++r) {
      if (!is_artificial_[static_cast<std::size_t>(basis_[static_cast<std::size_t>(r)])]) continue;
      int enter = -1;
      for (int j = 0; j < art_base_; ++j) {
        if (std::abs(at(r, j)) > kPivotTol) { enter = j; break; }
      }
      if (enter >= 0) pivot(r, enter);
    }
    return true;
  }

  // Phase 2 with the real objective. Returns kOptimal/kUnbounded.
  LpSolution::Status phase2(const std::vector<double>& cost, int& pivots) {
    for (int j = 0; j < width_; ++j) obj(j) = 0.0;
    for (int j = 0; j < n_; ++j) obj(j) = cost[static_cast<std::size_t>(j)];
    for (int r = 0; r < m_; ++r) {
      const int b = basis_[static_cast<std::size_t>(r)];
      const double cb = b < n_ ? cost[static_cast<std::size_t>(b)] : 0.0;
      if (cb != 0.0) {
        for (int j = 0; j < width_; ++j) obj_at(j) -= cb * at(r, j);
      }
    }
    forbid_artificials_ = true;
    if (!iterate(pivots)) return LpSolution::Status::kUnbounded;
    return LpSolution::Status::kOptimal;
  }

  std::vector<double> extract(int n) const {
    std::vector<double> x(static_cast<std::size_t>(n), 0.0);
    for (int r = 0; r < m_; ++r) {
      const int b = basis_[static_cast<std::size_t>(r)];
      if (b < n) x[static_cast<std::size_t>(b)] = rhs_at(r);
    }
    return x;
  }

  double objective_value() const { return -obj_at(width_ - 1); }

 private:
  double& at(int r, int j) { return t_[static_cast<std::size_t>(r) * width_ + j]; }
  double at(int r, int j) const { return t_[static_cast<std::size_t>(r) * width_ + j]; }
  double& rhs(int r) { return at(r, width_ - 1); }
  double rhs_at(int r) const { return at(r, width_ - 1); }
  double& obj(int j) { return t_[static_cast<std::size_t>(m_) * width_ + j]; }
  double& obj_at(int j) { return obj(j); }
  double obj_at(int j) const { return t_[static_cast<std::size_t>(m_) * width_ + j]; }

  void pivot(int row, int col) {
    const double p = at(row, col);
    const double inv = 1.0 / p;
    for (int j = 0; j < width_; ++j) at(row, j) *= inv;
    at(row, col) = 1.0;
    for (int r = 0; r <= m_; ++r) {
      if (r == row) continue;
      const double f = at(r, col);
      if (f == 0.0) continue;
      for (int j = 0; j < width_; ++j) at(r, j) -= f * at(row, j);
      at(r, col) = 0.0;
    }
    basis_[static_cast<std::size_t>(row)] = col;
  }

  bool column_allowed(int j) const {
    return !(forbid_artificials_ && is_artificial_[static_cast<std::size_t>(j)]);
  }

  // Returns false on unbounded.
  bool iterate(int& pivots) {
    const long long cap = 2000LL + 60LL * (static_cast<long long>(m_) + width_);
    long long stall = 0;
    double last = objective_value();
    for (long long it = 0; it < cap; ++it) {
      const bool bland = stall > 2LL * (m_ + 8);
      int enter = -1;
      double best = -kCostTol;
      for (int j = 0; j < width_ - 1; ++j) {
        if (!column_allowed(j)) continue;
        const double r = obj_at(j);
        if (bland) {
          if (r < -kCostTol) { enter = j; break; }
        } else if (r < best) {
          best = r;
          enter = j;
        }
      }
      if (enter < 0) return true;  // optimal

      int leave = -1;
      double best_ratio = std::numeric_limits<double>::infinity();
      for (int r = 0; r < m_; ++r) {
        const double a = at(r, enter);
        if (a > kPivotTol) {
          const double ratio = rhs_at(r) / a;
          if (ratio < best_ratio - 1e-12 ||
              (ratio < best_ratio + 1e-12 && leave >= 0 &&
               basis_[static_cast<std::size_t>(r)] < basis_[static_cast<std::size_t>(leave)])) {
            best_ratio = ratio;
            leave = r;
          }
        }
      }
      if (leave < 0) return false;  // unbounded

      pivot(leave, enter);
      ++pivots;
      const double now = objective_value();
      stall = now < last - 1e-12 ? 0 : stall + 1;
      last = now;
    }
    throw NumericError("simplex: iteration cap exceeded");
  }

  int m_ = 0;
  int n_ = 0;
  int width_ = 0;
  int slack_base_ = 0;
  int art_base_ = 0;
  bool forbid_artificials_ = false;
  std::vector<double> t_;
  std::vector<int> basis_;
  std::vector<bool> is_artificial_;
};

}  // namespace

LpSolution solve_lp(const LpProblem& p) {
  if (p.num_vars <= 0) throw std::invalid_argument("solve_lp: no variables");
  if (static_cast<int>(p.objective.size()) != p.num_vars) {
    throw std::invalid_argument("solve_lp: objective size mismatch");
  }
  for (const auto& row : p.eq_rows) {
    if (static_cast<int>(row.size()) != p.num_vars) throw std::invalid_argument("solve_lp: eq row size");
  }
  for (const auto& row : p.le_rows) {
    if (static_cast<int>(row.size()) != p.num_vars) throw std::invalid_argument("solve_lp: le row size");
  }

  Tableau tab(p);
  LpSolution sol;
  if (!tab.phase1(sol.pivots)) {
    sol.status = LpSolution::Status::kInfeasible;
    return sol;
  }
  sol.status = tab.phase2(p.objective, sol.pivots);
  if (sol.status == LpSolution::Status::kOptimal) {
    sol.x = tab.extract(p.num_vars);
    sol.objective = 0.0;
    for (int j = 0; j < p.num_vars; ++j) sol.objective += p.objective[static_cast<std::size_t>(j)] * sol.x[static_cast<std::size_t>(j)];
  }
  return sol;
}

TransportSolution solve_transport(std::span<const double> supply, std::span<const double> demand,
                                  const std::function<double(int, int)>& cost) {
  const int k = static_cast<int>(supply.size());
  const int l = static_cast<int>(demand.size());
  if (k == 0 || l == 0) throw std::invalid_argument("solve_transport: empty side");
  if (static_cast<long long>(k) * l > 20000) {
    throw SizeLimitError("solve_transport: instance too large, use monotone_coupling");
  }
  double st = 0.0, dt = 0.0;
  for (double v : supply) st += v;
  for (double v : demand) dt += v;
  if (std::abs(st - dt) > 1e-9) throw std::invalid_argument("solve_transport: totals differ");

  LpProblem p;
  p.num_vars = k * l;
  p.objective.resize(static_cast<std::size_t>(p.num_vars));
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < l; ++j) p.objective[static_cast<std::size_t>(i) * l + j] = cost(i, j);
  }
  // Row sums; the final column-sum row is implied and dropped.
  for (int i = 0; i < k; ++i) {
    std::vector<double> row(static_cast<std::size_t>(p.num_vars), 0.0);
    for (int j = 0; j < l; ++j) row[static_cast<std::size_t>(i) * l + j] = 1.0;
    p.eq_rows.push_back(std::move(row));
    p.eq_rhs.push_back(supply[static_cast<std::size_t>(i)]);
  }
  for (int j = 0; j + 1 < l; ++j) {
    std::vector<double> row(static_cast<std::size_t>(p.num_vars), 0.0);
    for (int i = 0; i < k; ++i) row[static_cast<std::size_t>(i) * l + j] = 1.0;
    p.eq_rows.push_back(std::move(row));
    p.eq_rhs.push_back(demand[static_cast<std::size_t>(j)]);
  }

  LpSolution sol = solve_lp(p);
  if (sol.status != LpSolution::Status::kOptimal) {
    throw NumericError("solve_transport: LP did not reach optimality");
  }
  TransportSolution out;
  out.cost = sol.objective;
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < l; ++j) {
      const double m = sol.x[static_cast<std::size_t>(i) * l + j];
      if (m > 1e-13) out.plan.push_back({i, j, m});
    }
  }
  return out;
}

std::vector<TransportPlanEntry> monotone_coupling(std::span<const double> supply,
                                                  std::span<const double> demand) {
  std::vector<TransportPlanEntry> plan;
  std::size_t i = 0, j = 0;
  double ri = supply.empty() ? 0.0 : supply[0];
  double rj = demand.empty() ? 0.0 : demand[0];
  while (i < supply.size() && j < demand.size()) {
    const double m = std::min(ri, rj);
    if (m > 1e-15) plan.push_back({static_cast<int>(i), static_cast<int>(j), m});
    ri -= m;
    rj -= m;
    if (ri <= 1e-15) {
      if (++i < supply.size()) ri = supply[i];
    }
    if (rj <= 1e-15) {
      if (++j < demand.size()) rj = demand[j];
    }
  }
  return plan;
}

}  // namespace cutlim
