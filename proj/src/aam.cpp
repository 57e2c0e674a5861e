#include "otkit/aam.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "otkit/rounding.hpp"

namespace otkit {

namespace {

// Minimizer of a convex function on [0, 1] by bisection on the sign of its
// derivative. Comparing slopes instead of values resolves beta far below the
// sqrt(machine eps) floor that value comparisons hit near a flat minimum.
template <typename Slope>
double bisect_slope(Slope&& slope, double tol) {
  if (slope(0.0) >= 0.0) return 0.0;
  if (slope(1.0) <= 0.0) return 1.0;
  double lo = 0.0;
  double hi = 1.0;
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (slope(mid) > 0.0) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return 0.5 * (lo + hi);
}

// Shift so that the largest entry is 0. Subtracting the sup norm instead would
// double a nonpositive vector on every call.
void shift_to_zero_max(Eigen::Ref<Vector> xi) {
  if (xi.size() == 0) return;
  xi.array() -= xi.maxCoeff();
}

double l2_infeasibility(const Matrix& plan, const DiscreteMeasure& p, const DiscreteMeasure& q) {
  const Vector rows = plan.rowwise().sum();
  const Vector cols = plan.colwise().sum().transpose();
  return std::sqrt((rows - p.weights()).squaredNorm() + (cols - q.weights()).squaredNorm());
}

}  // namespace

AamState aam_init(const AamObjective& objective) {
  AamState state;
  state.eta = Vector::Zero(objective.dimension());
  state.zeta = state.eta;
  state.mu = state.eta;
  state.plan_avg = objective.coupled_plans(state.eta);
  state.phi_eta = objective.value(state.eta);
  return state;
}

AamState aam_iterate(const AamState& state, const AamObjective& objective,
                     const AamOptions& options) {
  AamState next = state;
  const Eigen::Index h = objective.half();

  const Vector direction = state.zeta - state.eta;
  auto slope = [&](double beta) {
    return objective.gradient(state.eta + beta * direction).dot(direction);
  };
  const double beta = bisect_slope(slope, options.line_search_tol);
  Vector mu = state.eta + beta * direction;
  if (options.normalize_shift) objective.normalize(mu);

  const Vector grad = objective.gradient(mu);
  if (!grad.allFinite()) throw NumericalError("aam: non-finite gradient at iteration " +
                                              std::to_string(state.iteration));
  const double grad_u = grad.head(h).squaredNorm();
  const double grad_v = grad.tail(h).squaredNorm();
  const Block block = grad_u >= grad_v ? Block::u : Block::v;

  Vector eta_new = objective.minimize_block(mu, block);
  const double phi_mu = objective.value(mu);
  const double phi_new = objective.value(eta_new);
  if (!std::isfinite(phi_mu) || !std::isfinite(phi_new)) {
    throw NumericalError("aam: non-finite objective at iteration " +
                         std::to_string(state.iteration));
  }
  const double decrease = std::max(phi_mu - phi_new, 0.0);
  const double grad_sq = grad.squaredNorm();

  // a^2 |g|^2 - 2 decrease a - 2 decrease A = 0, positive root.
  double a = 1.0;
  if (grad_sq > 0.0) {
    a = (decrease + std::sqrt(decrease * decrease + 2.0 * grad_sq * decrease * state.A_big)) /
        grad_sq;
  }
  if (!(a > 0.0)) a = 1.0;  // zero decrease with A = 0: any positive weight solves it
  const double a_total = state.A_big + a;

  next.zeta = state.zeta - a * grad;
  if (options.normalize_shift) objective.normalize(next.zeta);

  const std::vector<Matrix> plans = objective.coupled_plans(mu);
  for (std::size_t l = 0; l < plans.size(); ++l) {
    next.plan_avg[l] = (a * plans[l] + state.A_big * state.plan_avg[l]) / a_total;
  }

  next.eta = std::move(eta_new);
  next.mu = std::move(mu);
  next.A_big = a_total;
  next.iteration = state.iteration + 1;
  next.last_a = a;
  next.last_beta = beta;
  next.last_block = block;
  next.last_residual = phi_mu - a * a * grad_sq / (2.0 * a_total) - phi_new;
  next.phi_eta = phi_new;
  return next;
}

OtDualObjective::OtDualObjective(const CostMatrix& cost, double gamma, const DiscreteMeasure& p,
                                 const DiscreteMeasure& q)
    : cost_(cost), gamma_(gamma), p_(p), q_(q) {
  require_positive_gamma(gamma);
  require_same_size(p.size(), cost.size(), "source measure");
  require_same_size(q.size(), cost.size(), "target measure");
}

DualPotentials OtDualObjective::split(const Vector& x) const {
  const Eigen::Index n = cost_.size();
  require_same_size(x.size(), 2 * n, "stacked dual");
  return {x.head(n), x.tail(n)};
}

Vector OtDualObjective::stack(const DualPotentials& pot) {
  Vector x(pot.u.size() + pot.v.size());
  x << pot.u, pot.v;
  return x;
}

double OtDualObjective::value(const Vector& x) const {
  return dual_objective_lip(split(x), cost_, gamma_, p_, q_);
}

Vector OtDualObjective::gradient(const Vector& x) const {
  auto [gu, gv] = dual_partial_gradients(split(x), cost_, gamma_, p_, q_);
  return stack({std::move(gu), std::move(gv)});
}

Vector OtDualObjective::minimize_block(const Vector& x, Block block) const {
  if (!p_.strictly_positive() || !q_.strictly_positive()) {
    throw DomainError("marginal must be strictly positive");
  }
  DualPotentials pot = split(x);
  const Eigen::Index n = cost_.size();
  if (block == Block::u) {
    pot.u = p_.weights().array().log().matrix() - log_row_sums(Vector::Zero(n), pot.v, cost_, gamma_);
  } else {
    pot.v = q_.weights().array().log().matrix() - log_col_sums(pot.u, Vector::Zero(n), cost_, gamma_);
  }
  return stack(pot);
}

std::vector<Matrix> OtDualObjective::coupled_plans(const Vector& x) const {
  return {normalized_scaling_matrix(split(x), cost_, gamma_)};
}

void OtDualObjective::normalize(Vector& x) const {
  const Eigen::Index n = cost_.size();
  shift_to_zero_max(x.head(n));
  shift_to_zero_max(x.tail(n));
}

double dual_objective_lip(const DualPotentials& pot, const CostMatrix& cost, double gamma,
                          const DiscreteMeasure& p, const DiscreteMeasure& q) {
  require_same_size(p.size(), cost.size(), "source measure");
  require_same_size(q.size(), cost.size(), "target measure");
  return gamma * (log_total_mass(pot.u, pot.v, cost, gamma) - pot.u.dot(p.weights()) -
                  pot.v.dot(q.weights()));
}

std::pair<Vector, Vector> dual_partial_gradients(const DualPotentials& pot, const CostMatrix& cost,
                                                 double gamma, const DiscreteMeasure& p,
                                                 const DiscreteMeasure& q) {
  const Matrix plan = normalized_scaling_matrix(pot, cost, gamma);
  Vector gu = gamma * (plan.rowwise().sum() - p.weights());
  Vector gv = gamma * (plan.colwise().sum().transpose() - q.weights());
  return {std::move(gu), std::move(gv)};
}

double distance_bound(const CostMatrix& cost, double gamma, const DiscreteMeasure& p,
                      const DiscreteMeasure& q) {
  require_positive_gamma(gamma);
  const double smallest = std::min(p.min(), q.min());
  if (!(smallest > 0.0)) throw DomainError("distance bound requires strictly positive marginals");
  const double n = static_cast<double>(cost.size());
  return std::sqrt(n / 2.0) * (cost.inf_norm() - 0.5 * gamma * std::log(smallest));
}

AamState aam_iterate(const AamState& state, const CostMatrix& cost, double gamma,
                     const DiscreteMeasure& p, const DiscreteMeasure& q,
                     const AamOptions& options) {
  const OtDualObjective objective(cost, gamma, p, q);
  return aam_iterate(state, objective, options);
}

AamSolveResult aam_solve(const CostMatrix& cost, double gamma, const DiscreteMeasure& p,
                         const DiscreteMeasure& q, const AamSolveOptions& options) {
  const OtDualObjective objective(cost, gamma, p, q);
  AamSolveResult result;
  result.trace = Trace({"iteration", "phi", "gap", "violation_l2", "a", "A"});
  result.state = aam_init(objective);
  for (long k = 0; k < options.max_iter; ++k) {
    result.state = aam_iterate(result.state, objective, options.step);
    const Matrix& plan = result.state.plan_avg.front();
    const double gap = regularized_cost(plan, cost, gamma) + result.state.phi_eta;
    const double infeas = l2_infeasibility(plan, p, q);
    result.trace.push({static_cast<double>(result.state.iteration), result.state.phi_eta, gap,
                       infeas, result.state.last_a, result.state.A_big});
    if (std::abs(gap) <= options.gap_tol && infeas <= options.violation_tol) return result;
  }
  throw ConvergenceError("aam: no convergence within " + std::to_string(options.max_iter) +
                             " iterations",
                         result.trace);
}

AcceleratedOtResult accelerated_ot(const CostMatrix& cost, const DiscreteMeasure& p,
                                   const DiscreteMeasure& q, double eps,
                                   std::optional<double> gamma_override,
                                   const AcceleratedOtOptions& options) {
  require_same_size(p.size(), cost.size(), "source measure");
  require_same_size(q.size(), cost.size(), "target measure");
  if (!(eps > 0.0)) throw ParameterError("eps must be positive");
  const Eigen::Index n = cost.size();
  if (n < 2) throw ParameterError("approximate OT needs n >= 2");

  AcceleratedOtResult out;
  SolveReport& report = out.report;
  report.method = "aam";
  report.set_param("eps", eps);
  report.set_param("n", static_cast<double>(n));

  if (eps >= 8.0 * cost.inf_norm()) {
    out.plan.entries = p.weights() * q.weights().transpose();
    out.plan.feasible_for = std::make_pair(p.weights(), q.weights());
    report.objective = transport_cost(out.plan.entries, cost);
    report.regularized_objective = report.objective;
    report.set_param("short_circuit", 1.0);
    return out;
  }

  const double eps_prime = eps / (8.0 * cost.inf_norm());
  const double gamma = gamma_override.value_or(eps / (3.0 * std::log(static_cast<double>(n))));
  report.gamma_overridden = gamma_override.has_value();
  report.set_param("eps_prime", eps_prime);
  report.set_param("gamma", gamma);

  const auto [p_s, q_s] = smooth_marginals(p, q, eps_prime);
  const double bound_d = distance_bound(cost, gamma, p_s, q_s);
  report.set_param("D", bound_d);

  const OtDualObjective objective(cost, gamma, p_s, q_s);
  report.trace = Trace({"iteration", "phi", "gap", "violation_l2", "rounding_gap", "a", "A"});
  AamState state = aam_init(objective);
  for (long k = 0; k < options.max_iter; ++k) {
    state = aam_iterate(state, objective, options.step);
    const Matrix& avg = state.plan_avg.front();
    TransportPlan rounded = round_to_polytope(avg, p, q);
    const double rounding_gap = transport_cost(rounded.entries - avg, cost);
    const double gap = regularized_cost(avg, cost, gamma) + state.phi_eta;
    report.trace.push({static_cast<double>(state.iteration), state.phi_eta, gap,
                       l2_infeasibility(avg, p_s, q_s), rounding_gap, state.last_a, state.A_big});
    if (rounding_gap <= eps / 6.0 && gap <= eps / 6.0) {
      out.plan = std::move(rounded);
      report.objective = transport_cost(out.plan.entries, cost);
      report.regularized_objective = -state.phi_eta;
      report.certificate = gap;
      report.iterations = state.iteration;
      return out;
    }
  }
  throw ConvergenceError("accelerated_ot: no convergence within " +
                             std::to_string(options.max_iter) + " iterations",
                         report.trace);
}

}  // namespace otkit
