#pragma once

#include <optional>

#include "otkit/core.hpp"
#include "otkit/report.hpp"

namespace otkit {

struct SinkhornState {
  DualPotentials pot;
  long iteration = 0;           // number of half-steps applied; even -> next step updates u
  double last_violation = 0.0;  // l1 marginal violation at the last check
};

/// R = ||C||_inf / gamma - ln(min(min p, min q)).
double radius_bound(const CostMatrix& cost, double gamma, const DiscreteMeasure& p,
                    const DiscreteMeasure& q);

/// f(u, v) = gamma (1^T B(u,v) 1 - <u, p> - <v, q>).
double sinkhorn_dual_objective(const DualPotentials& pot, const CostMatrix& cost, double gamma,
                               const DiscreteMeasure& p, const DiscreteMeasure& q);

/// One exact block minimization of f. Even iterations update u, odd ones v.
SinkhornState sinkhorn_step(const SinkhornState& state, const CostMatrix& cost, double gamma,
                            const DiscreteMeasure& p, const DiscreteMeasure& q);

struct SinkhornOptions {
  std::optional<long> max_iter;  // default ceil(2 + 8R / eps')
  bool kernel_scaling = false;   // explicit K = exp(-C/gamma); only safe for large gamma
  bool record_trace = true;
};

struct SinkhornResult {
  SinkhornState state;
  TransportPlan plan;  // coupled plan B(u, v)
  Trace trace;         // iteration, violation, dual_objective, certificate
};

/// Iterates sinkhorn_step until the coupled plan violates the marginals by at
/// most eps'. Throws ConvergenceError (with the trace) when max_iter is hit.
SinkhornResult sinkhorn_solve(const CostMatrix& cost, double gamma, const DiscreteMeasure& p,
                              const DiscreteMeasure& q, double eps_prime,
                              const SinkhornOptions& options = {});

enum class Axis { rows, columns };

/// KL projection of a positive plan onto {plan 1 = target} or {plan^T 1 = target}.
Matrix kl_project(const Matrix& plan, const DiscreteMeasure& target, Axis axis);

/// (gamma R / 2) * violation: upper bound on g(pi(u,v)) - g(pi*_gamma).
double reg_gap_certificate(const SinkhornState& state, const CostMatrix& cost, double gamma,
                           const DiscreteMeasure& p, const DiscreteMeasure& q);

/// W_gamma(p, q) to high accuracy, as the dual value gamma - f(u, v) at a
/// tightly converged Sinkhorn point.
double regularized_ot_value(const CostMatrix& cost, double gamma, const DiscreteMeasure& p,
                            const DiscreteMeasure& q, double tol = 1e-12);

struct ApproxOtResult {
  TransportPlan plan;
  SolveReport report;
};

/// eps-approximate OT: smooth the marginals, run Sinkhorn with
/// gamma = eps / (4 ln n) to eps'/2 where eps' = eps / (8 ||C||_inf), round
/// onto U(p, q). `gamma_override` replaces the scheduled gamma.
ApproxOtResult approx_ot_sinkhorn(const CostMatrix& cost, const DiscreteMeasure& p,
                                  const DiscreteMeasure& q, double eps,
                                  std::optional<double> gamma_override = std::nullopt,
                                  const SinkhornOptions& options = {});

}  // namespace otkit
