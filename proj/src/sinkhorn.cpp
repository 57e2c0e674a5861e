#include "otkit/sinkhorn.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "otkit/rounding.hpp"

namespace otkit {

namespace {

void require_positive_marginals(const DiscreteMeasure& p, const DiscreteMeasure& q) {
  if (!p.strictly_positive() || !q.strictly_positive()) {
    throw DomainError("marginal must be strictly positive");
  }
}

void check_shapes(const CostMatrix& cost, const DiscreteMeasure& p, const DiscreteMeasure& q) {
  require_same_size(p.size(), cost.size(), "source measure");
  require_same_size(q.size(), cost.size(), "target measure");
}

bool updates_u(long iteration) { return iteration % 2 == 0; }

// Log row (u-step) or column (v-step) sums of B(u, v), optionally through an
// explicit kernel.
Vector active_log_sums(const DualPotentials& pot, const CostMatrix& cost, double gamma,
                       bool u_step, const Matrix* kernel) {
  if (kernel == nullptr) {
    return u_step ? log_row_sums(pot.u, pot.v, cost, gamma)
                  : log_col_sums(pot.u, pot.v, cost, gamma);
  }
  if (u_step) {
    const Vector kv = *kernel * pot.v.array().exp().matrix();
    return pot.u + kv.array().log().matrix();
  }
  const Vector ku = kernel->transpose() * pot.u.array().exp().matrix();
  return pot.v + ku.array().log().matrix();
}

void apply_update(DualPotentials& pot, const Vector& log_sums, bool u_step,
                  const DiscreteMeasure& p, const DiscreteMeasure& q) {
  if (!log_sums.allFinite()) {
    throw NumericalError("sinkhorn: non-finite marginal (kernel underflow; use the log domain)");
  }
  if (u_step) {
    pot.u += p.weights().array().log().matrix() - log_sums;
  } else {
    pot.v += q.weights().array().log().matrix() - log_sums;
  }
}

double dual_from_sums(const DualPotentials& pot, const Vector& log_sums, double gamma,
                      const DiscreteMeasure& p, const DiscreteMeasure& q) {
  return gamma * (std::exp(logsumexp(log_sums)) - pot.u.dot(p.weights()) - pot.v.dot(q.weights()));
}

}  // namespace

double radius_bound(const CostMatrix& cost, double gamma, const DiscreteMeasure& p,
                    const DiscreteMeasure& q) {
  require_positive_gamma(gamma);
  const double smallest = std::min(p.min(), q.min());
  if (!(smallest > 0.0)) throw DomainError("radius bound requires strictly positive marginals");
  return cost.inf_norm() / gamma - std::log(smallest);
}

double sinkhorn_dual_objective(const DualPotentials& pot, const CostMatrix& cost, double gamma,
                               const DiscreteMeasure& p, const DiscreteMeasure& q) {
  check_shapes(cost, p, q);
  const Vector rows = log_row_sums(pot.u, pot.v, cost, gamma);
  return dual_from_sums(pot, rows, gamma, p, q);
}

SinkhornState sinkhorn_step(const SinkhornState& state, const CostMatrix& cost, double gamma,
                            const DiscreteMeasure& p, const DiscreteMeasure& q) {
  require_positive_gamma(gamma);
  check_shapes(cost, p, q);
  require_positive_marginals(p, q);
  SinkhornState next = state;
  const bool u_step = updates_u(state.iteration);
  const Vector sums = active_log_sums(state.pot, cost, gamma, u_step, nullptr);
  const Vector& target = u_step ? p.weights() : q.weights();
  // Violation of the incoming state along the axis being balanced.
  next.last_violation = (sums.array().exp().matrix() - target).lpNorm<1>();
  apply_update(next.pot, sums, u_step, p, q);
  ++next.iteration;
  return next;
}

SinkhornResult sinkhorn_solve(const CostMatrix& cost, double gamma, const DiscreteMeasure& p,
                              const DiscreteMeasure& q, double eps_prime,
                              const SinkhornOptions& options) {
  require_positive_gamma(gamma);
  check_shapes(cost, p, q);
  require_positive_marginals(p, q);
  if (!(eps_prime > 0.0)) throw ParameterError("eps' must be positive");

  const double radius = radius_bound(cost, gamma, p, q);
  const long max_iter =
      options.max_iter.value_or(static_cast<long>(std::ceil(2.0 + 8.0 * radius / eps_prime)));

  Matrix kernel;
  if (options.kernel_scaling) kernel = (-cost.entries().array() / gamma).exp().matrix();
  const Matrix* kernel_ptr = options.kernel_scaling ? &kernel : nullptr;

  SinkhornResult result;
  result.trace = Trace({"iteration", "violation", "dual_objective", "certificate"});
  SinkhornState& state = result.state;
  state.pot = DualPotentials::zeros(cost.size());

  // The half-step about to run computes the marginal it balances; the other
  // marginal was balanced exactly by the previous half-step, so the incoming
  // violation comes for free (except at t = 0, where both are measured).
  for (;;) {
    const bool u_step = updates_u(state.iteration);
    const Vector sums = active_log_sums(state.pot, cost, gamma, u_step, kernel_ptr);
    const Vector& target = u_step ? p.weights() : q.weights();
    double violation = (sums.array().exp().matrix() - target).lpNorm<1>();
    if (state.iteration == 0) {
      const Vector other = active_log_sums(state.pot, cost, gamma, !u_step, kernel_ptr);
      violation += (other.array().exp().matrix() - q.weights()).lpNorm<1>();
    }
    state.last_violation = violation;
    if (options.record_trace) {
      const double dual = dual_from_sums(state.pot, sums, gamma, p, q);
      result.trace.push({static_cast<double>(state.iteration), violation, dual,
                         0.5 * gamma * radius * violation});
    }
    if (violation <= eps_prime) break;
    if (state.iteration >= max_iter) {
      throw ConvergenceError("sinkhorn: no convergence within " + std::to_string(max_iter) +
                                 " iterations (violation " + std::to_string(violation) + ")",
                             result.trace);
    }
    apply_update(state.pot, sums, u_step, p, q);
    ++state.iteration;
    if (!state.pot.finite()) throw NumericalError("sinkhorn: non-finite potentials");
  }

  result.plan.entries = scaling_matrix(state.pot, cost, gamma);
  state.last_violation = marginal_violation(result.plan.entries, p, q);
  return result;
}

Matrix kl_project(const Matrix& plan, const DiscreteMeasure& target, Axis axis) {
  if (!target.strictly_positive()) throw DomainError("kl_project: target must be strictly positive");
  if ((plan.array() < 0.0).any()) throw DomainError("kl_project: negative plan entry");
  Matrix out = plan;
  if (axis == Axis::rows) {
    require_same_size(plan.rows(), target.size(), "kl_project rows");
    const Vector sums = plan.rowwise().sum();
    for (Eigen::Index i = 0; i < plan.rows(); ++i) {
      if (!(sums[i] > 0.0)) throw DomainError("kl_project: zero row sum");
      out.row(i) *= target[i] / sums[i];
    }
  } else {
    require_same_size(plan.cols(), target.size(), "kl_project cols");
    const Vector sums = plan.colwise().sum().transpose();
    for (Eigen::Index j = 0; j < plan.cols(); ++j) {
      if (!(sums[j] > 0.0)) throw DomainError("kl_project: zero column sum");
      out.col(j) *= target[j] / sums[j];
    }
  }
  return out;
}

double reg_gap_certificate(const SinkhornState& state, const CostMatrix& cost, double gamma,
                           const DiscreteMeasure& p, const DiscreteMeasure& q) {
  const double radius = radius_bound(cost, gamma, p, q);
  const Matrix plan = scaling_matrix(state.pot, cost, gamma);
  return 0.5 * gamma * radius * marginal_violation(plan, p, q);
}

double regularized_ot_value(const CostMatrix& cost, double gamma, const DiscreteMeasure& p,
                            const DiscreteMeasure& q, double tol) {
  SinkhornOptions options;
  options.record_trace = false;
  options.max_iter = 2'000'000;
  const SinkhornResult res = sinkhorn_solve(cost, gamma, p, q, tol, options);
  return gamma - sinkhorn_dual_objective(res.state.pot, cost, gamma, p, q);
}

ApproxOtResult approx_ot_sinkhorn(const CostMatrix& cost, const DiscreteMeasure& p,
                                  const DiscreteMeasure& q, double eps,
                                  std::optional<double> gamma_override,
                                  const SinkhornOptions& options) {
  check_shapes(cost, p, q);
  if (!(eps > 0.0)) throw ParameterError("eps must be positive");
  const Eigen::Index n = cost.size();
  if (n < 2) throw ParameterError("approximate OT needs n >= 2");

  ApproxOtResult out;
  SolveReport& report = out.report;
  report.method = "sinkhorn";
  report.set_param("eps", eps);
  report.set_param("n", static_cast<double>(n));

  if (eps >= 8.0 * cost.inf_norm()) {
    // Any feasible plan is eps-optimal.
    out.plan.entries = p.weights() * q.weights().transpose();
    out.plan.feasible_for = std::make_pair(p.weights(), q.weights());
    report.objective = transport_cost(out.plan.entries, cost);
    report.regularized_objective = report.objective;
    report.set_param("short_circuit", 1.0);
    return out;
  }

  const double eps_prime = eps / (8.0 * cost.inf_norm());
  const double gamma = gamma_override.value_or(eps / (4.0 * std::log(static_cast<double>(n))));
  report.gamma_overridden = gamma_override.has_value();
  report.set_param("eps_prime", eps_prime);
  report.set_param("gamma", gamma);

  const auto [p_s, q_s] = smooth_marginals(p, q, eps_prime);
  const SinkhornResult solve = sinkhorn_solve(cost, gamma, p_s, q_s, eps_prime / 2.0, options);

  out.plan = round_to_polytope(solve.plan.entries, p, q);
  report.objective = transport_cost(out.plan.entries, cost);
  report.regularized_objective = regularized_cost(solve.plan.entries, cost, gamma);
  report.certificate = 0.5 * gamma * radius_bound(cost, gamma, p_s, q_s) * solve.state.last_violation;
  report.iterations = solve.state.iteration;
  report.trace = solve.trace;
  return out;
}

}  // namespace otkit
