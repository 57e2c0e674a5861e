#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "otkit/aam.hpp"
#include "otkit/core.hpp"
#include "otkit/report.hpp"

namespace otkit {

/// Fixed-support barycenter of m measures under one shared cost, uniform weights.
struct BarycenterProblem {
  std::vector<DiscreteMeasure> measures;
  CostMatrix cost;
  double gamma = 0.0;

  Eigen::Index support() const { return cost.size(); }
  std::size_t count() const { return measures.size(); }
  /// Throws unless there is at least one measure, all sizes match the cost and gamma > 0.
  void validate() const;
};

/// Stacked duals; column l holds (u_l, v_l). The v columns sum to zero.
struct WbDualState {
  Matrix u;
  Matrix v;
  long iteration = 0;  // half-steps applied; even -> next step updates v

  static WbDualState zeros(Eigen::Index n, std::size_t m);
};

/// One IBP half-step. Even iterations set
///   v_l = (1/m) sum_k ln K^T e^{u_k} - ln K^T e^{u_l},
/// odd ones set u_l = ln p_l - ln K e^{v_l}. All sums are taken in the log domain.
WbDualState ibp_step(const WbDualState& state, const BarycenterProblem& problem);

/// f(u, v) = (gamma/m) sum_l (1^T B(u_l, v_l) 1 - <u_l, p_l>), the objective IBP
/// minimizes block-wise.
double ibp_dual_objective(const WbDualState& state, const BarycenterProblem& problem);

/// phi(u, v) = (gamma/m) sum_l (ln(1^T B(u_l, v_l) 1) - <u_l, p_l>).
double wb_dual_objective(const WbDualState& state, const BarycenterProblem& problem);

struct WbGradient {
  Matrix u;  // column l: d phi / d u_l
  Matrix v;  // column l: d phi / d v_l (unconstrained)
};
WbGradient wb_dual_gradient(const WbDualState& state, const BarycenterProblem& problem);
/// Removes the across-measure mean from the v blocks (projection onto sum_l v_l = 0).
WbGradient project_onto_constraint(WbGradient grad);

/// Column marginals B(u_l, v_l)^T 1, one column per measure.
Matrix ibp_column_marginals(const WbDualState& state, const BarycenterProblem& problem);

struct IbpOptions {
  long max_iter = 1'000'000;
  bool record_trace = true;
  /// Called after every half-step with the new state and whether it updated u.
  std::function<void(const WbDualState&, bool)> on_half_step;
};

struct IbpResult {
  WbDualState state;
  std::vector<Matrix> plans;  // B(u_l, v_l)
  Vector q_bar;               // mean column marginal
  Trace trace;                // iteration, spread, dual_objective
};

/// IBP until (1/m) sum_l ||B_l^T 1 - q_bar||_1 <= eps', checked after every
/// full sweep. Throws ConvergenceError (with trace) at max_iter.
IbpResult ibp_solve(const BarycenterProblem& problem, double eps_prime,
                    const IbpOptions& options = {});

struct BarycenterResult {
  Vector q_bar;
  std::vector<TransportPlan> plans;  // plan l lies in U(p_l, q_bar)
  SolveReport report;
};

/// eps-approximate barycenter through IBP: gamma = eps / (4 ln n),
/// eps' = eps / (4 ||C||_inf), smoothed inputs, per-measure rounding.
BarycenterResult barycenter_ibp(const std::vector<DiscreteMeasure>& measures,
                                const CostMatrix& cost, double eps,
                                std::optional<double> gamma_override = std::nullopt,
                                const IbpOptions& options = {});

/// The barycenter dual with unit-mass plans, as an AAM objective over
/// x = (u_1, ..., u_m, v_1, ..., v_m). The v part stays on sum_l v_l = 0.
class WbDualObjective final : public AamObjective {
 public:
  explicit WbDualObjective(BarycenterProblem problem);

  Eigen::Index dimension() const override;
  double value(const Vector& x) const override;
  Vector gradient(const Vector& x) const override;
  Vector minimize_block(const Vector& x, Block block) const override;
  std::vector<Matrix> coupled_plans(const Vector& x) const override;
  void normalize(Vector& x) const override;

  WbDualState split(const Vector& x) const;
  Vector stack(const WbDualState& state) const;
  const BarycenterProblem& problem() const { return problem_; }

 private:
  BarycenterProblem problem_;
};

struct AcceleratedIbpOptions {
  long max_iter = 200'000;
  AamOptions step;
};

/// eps-approximate barycenter through accelerated alternating minimization:
/// gamma = eps / (2 ln n), eps' = eps / (8 ||C||_inf).
BarycenterResult accelerated_ibp(const std::vector<DiscreteMeasure>& measures,
                                 const CostMatrix& cost, double eps,
                                 std::optional<double> gamma_override = std::nullopt,
                                 const AcceleratedIbpOptions& options = {});

/// W*_{gamma,p}(u) = gamma sum_j p_j ln sum_i exp((u_i - C_ij)/gamma) - gamma <p, ln p>.
double fenchel_dual_ot(const Vector& u, const DiscreteMeasure& p, const CostMatrix& cost,
                       double gamma);

/// Gradient of W*_{gamma,p}: the p-mixture of the column softmaxes. Lies on the simplex.
Vector fenchel_dual_gradient(const Vector& u, const DiscreteMeasure& p, const CostMatrix& cost,
                             double gamma);

/// softmax_i((u_i - C_ij) / gamma) for a fixed column j.
Vector softmax_column(const Vector& u, const CostMatrix& cost, double gamma, Eigen::Index column);

}  // namespace otkit
