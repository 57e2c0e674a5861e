#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "otkit/core.hpp"
#include "otkit/report.hpp"

namespace otkit {

enum class Block { u, v };

/// Smooth dual objective whose variable splits into a u-half and a v-half,
/// each of which can be minimized exactly with the other held fixed.
class AamObjective {
 public:
  virtual ~AamObjective() = default;

  virtual Eigen::Index dimension() const = 0;
  virtual double value(const Vector& x) const = 0;
  /// Gradient restricted to the feasible subspace of x.
  virtual Vector gradient(const Vector& x) const = 0;
  /// x with the given half replaced by its exact minimizer.
  virtual Vector minimize_block(const Vector& x, Block block) const = 0;
  /// Primal plans coupled to x (one per transport problem, unit mass each).
  virtual std::vector<Matrix> coupled_plans(const Vector& x) const = 0;
  /// Per-subvector shift xi -> xi - max(xi). Must leave value, gradient and
  /// coupled plans unchanged.
  virtual void normalize(Vector& x) const = 0;

  Eigen::Index half() const { return dimension() / 2; }
};

struct AamOptions {
  bool normalize_shift = true;
  double line_search_tol = 1e-10;
};

struct AamState {
  Vector eta;
  Vector zeta;
  Vector mu;
  double A_big = 0.0;
  std::vector<Matrix> plan_avg;
  long iteration = 0;
  // Diagnostics of the last step.
  double last_a = 0.0;
  double last_beta = 0.0;
  double last_residual = 0.0;  // residual of the step-size equation
  Block last_block = Block::u;
  double phi_eta = 0.0;
};

/// eta = zeta = mu = 0, A = 0, plan_avg = plans coupled to 0.
AamState aam_init(const AamObjective& objective);

/// One iteration: line search over [eta, zeta], block choice by larger
/// partial-gradient norm (ties -> u), exact block minimization, step size
/// from phi(mu) - a^2/(2(A+a)) ||grad||^2 = phi(eta_new), dual and primal
/// averaging updates.
AamState aam_iterate(const AamState& state, const AamObjective& objective,
                     const AamOptions& options = {});

/// phi(u, v) = gamma (ln(1^T B 1) - <u, p> - <v, q>), the OT dual with the
/// unit-mass constraint on the plan.
class OtDualObjective final : public AamObjective {
 public:
  OtDualObjective(const CostMatrix& cost, double gamma, const DiscreteMeasure& p,
                  const DiscreteMeasure& q);

  Eigen::Index dimension() const override { return 2 * cost_.size(); }
  double value(const Vector& x) const override;
  Vector gradient(const Vector& x) const override;
  Vector minimize_block(const Vector& x, Block block) const override;
  std::vector<Matrix> coupled_plans(const Vector& x) const override;
  void normalize(Vector& x) const override;

  DualPotentials split(const Vector& x) const;
  static Vector stack(const DualPotentials& pot);

 private:
  CostMatrix cost_;
  double gamma_;
  DiscreteMeasure p_;
  DiscreteMeasure q_;
};

double dual_objective_lip(const DualPotentials& pot, const CostMatrix& cost, double gamma,
                          const DiscreteMeasure& p, const DiscreteMeasure& q);

/// (d phi / du, d phi / dv) = gamma (B1/s - p, B^T1/s - q) with s = 1^T B 1.
std::pair<Vector, Vector> dual_partial_gradients(const DualPotentials& pot, const CostMatrix& cost,
                                                 double gamma, const DiscreteMeasure& p,
                                                 const DiscreteMeasure& q);

/// Bound on the distance from 0 to the dual solution, in cost units:
/// sqrt(n/2) (||C||_inf - (gamma/2) ln(min(min p, min q))).
double distance_bound(const CostMatrix& cost, double gamma, const DiscreteMeasure& p,
                      const DiscreteMeasure& q);

/// Convenience overload on the OT dual.
AamState aam_iterate(const AamState& state, const CostMatrix& cost, double gamma,
                     const DiscreteMeasure& p, const DiscreteMeasure& q,
                     const AamOptions& options = {});

struct AamSolveOptions {
  long max_iter = 200'000;
  // Much tighter targets stall once phi(eta) is converged to machine precision:
  // the step-size equation then sees zero decrease and the averaged plan stops moving.
  double gap_tol = 1e-7;        // |g(plan_avg) + phi(eta)|
  double violation_tol = 1e-7;  // ||A plan_avg - b||_2
  AamOptions step;
};

struct AamSolveResult {
  AamState state;
  Trace trace;  // iteration, phi, gap, violation_l2, a, A
};

/// Regularized-mode solve at fixed gamma, stopped on duality gap and
/// feasibility thresholds. Throws ConvergenceError on budget exhaustion.
AamSolveResult aam_solve(const CostMatrix& cost, double gamma, const DiscreteMeasure& p,
                         const DiscreteMeasure& q, const AamSolveOptions& options = {});

struct AcceleratedOtOptions {
  long max_iter = 200'000;
  AamOptions step;
};

struct AcceleratedOtResult {
  TransportPlan plan;
  SolveReport report;
};

/// eps-approximate OT by the accelerated method: gamma = eps / (3 ln n),
/// eps' = eps / (8 ||C||_inf), smoothed marginals, stop when the rounding cost
/// change and the duality gap are both at most eps / 6.
AcceleratedOtResult accelerated_ot(const CostMatrix& cost, const DiscreteMeasure& p,
                                   const DiscreteMeasure& q, double eps,
                                   std::optional<double> gamma_override = std::nullopt,
                                   const AcceleratedOtOptions& options = {});

}  // namespace otkit
