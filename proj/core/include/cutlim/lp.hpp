#pragma once

#include <functional>
#include <span>
#include <tuple>
#include <vector>

namespace cutlim {

// Minimal dense LP support for the distance solvers:
//   minimize c.x  subject to  Aeq x = beq,  Ale x <= ble,  x >= 0.
// Intended for the small cutting-plane and transport programs that arise
// from desk-scale cut-distance computations; not a general-purpose solver.
struct LpProblem {
  int num_vars = 0;
  std::vector<std::vector<double>> eq_rows;
  std::vector<double> eq_rhs;
  std::vector<std::vector<double>> le_rows;
  std::vector<double> le_rhs;
  std::vector<double> objective;
};

struct LpSolution {
  enum class Status { kOptimal, kInfeasible, kUnbounded };
  Status status = Status::kInfeasible;
  double objective = 0.0;
  std::vector<double> x;
  int pivots = 0;
};

// Two-phase primal simplex (Dantzig pricing, Bland fallback on stall).
LpSolution solve_lp(const LpProblem& problem);

// Optimal transport between two weight vectors with a dense cost matrix:
//   minimize sum_ij cost(i,j) * G_ij,  row sums = supply, col sums = demand.
// Returns the sparse plan. supply and demand must have equal totals.
struct TransportPlanEntry {
  int from = 0;
  int to = 0;
  double mass = 0.0;
};

struct TransportSolution {
  double cost = 0.0;
  std::vector<TransportPlanEntry> plan;
};

TransportSolution solve_transport(std::span<const double> supply, std::span<const double> demand,
                                  const std::function<double(int, int)>& cost);

// Monotone (northwest-corner) coupling of two weight vectors; the cheap
// deterministic fallback when the LP is too large to be worth solving.
std::vector<TransportPlanEntry> monotone_coupling(std::span<const double> supply,
                                                  std::span<const double> demand);

}  // namespace cutlim
