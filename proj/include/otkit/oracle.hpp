#pragma once

#include <vector>

#include "otkit/core.hpp"

namespace otkit {

enum class LpStatus { optimal, infeasible, unbounded };

const char* to_string(LpStatus status);

/// minimize c^T x  subject to  A x = b, x >= 0.
struct LpProblem {
  Matrix A;
  Vector b;
  Vector c;
};

struct LpSolution {
  LpStatus status = LpStatus::infeasible;
  double objective = 0.0;
  Vector primal;
  Vector dual;           // one multiplier per constraint row (0 for rows found redundant)
  Vector reduced_costs;  // c - A^T dual
  long pivots = 0;
};

/// Dense two-phase revised simplex with Bland's rule. Redundant equality rows
/// are detected at the end of phase one and dropped.
LpSolution solve_lp(const LpProblem& problem);

struct OtLpResult {
  double objective = 0.0;
  Matrix plan;
  LpSolution lp;
};

/// min over U(p, q) of <C, plan>, solved exactly. Refuses n > 32.
OtLpResult exact_ot_lp(const CostMatrix& cost, const DiscreteMeasure& p, const DiscreteMeasure& q);

struct BarycenterLpResult {
  double objective = 0.0;  // (1/m) sum_l W(p_l, q)
  Vector q;
  std::vector<Matrix> plans;
  LpSolution lp;
};

/// Joint LP over (plan_1, ..., plan_m, q). Refuses more than 400 variables.
BarycenterLpResult exact_barycenter_lp(const std::vector<DiscreteMeasure>& measures,
                                       const CostMatrix& cost);

struct GridResult {
  Vector q;
  double objective = 0.0;
  long evaluated = 0;
};

/// Minimizes (1/m) sum_l W_gamma(p_l, q) over the interior simplex grid with
/// spacing grid_step (every coordinate a positive multiple of the step).
/// Only n <= 3 is accepted.
GridResult regularized_wb_grid(const std::vector<DiscreteMeasure>& measures, const CostMatrix& cost,
                               double gamma, double grid_step);

}  // namespace otkit
