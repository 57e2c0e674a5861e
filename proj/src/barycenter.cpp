#include "otkit/barycenter.hpp"

#include <cmath>
#include <string>

#include "otkit/rounding.hpp"

namespace otkit {

namespace {

Vector log_weights(const DiscreteMeasure& p) { return p.weights().array().log().matrix(); }

void require_positive_measures(const BarycenterProblem& problem) {
  for (const auto& p : problem.measures) {
    if (!p.strictly_positive()) throw DomainError("measure must be strictly positive");
  }
}

// ln K^T e^{u_l} for every l, one column each.
Matrix log_kernel_t_exp(const Matrix& u, const CostMatrix& cost, double gamma) {
  const Eigen::Index n = cost.size();
  const Vector zero = Vector::Zero(n);
  Matrix out(n, u.cols());
  for (Eigen::Index l = 0; l < u.cols(); ++l) out.col(l) = log_col_sums(u.col(l), zero, cost, gamma);
  return out;
}

// v_l = mean_k w_k - w_l for w_l = ln K^T e^{u_l}.
Matrix geometric_mean_v(const Matrix& log_kt) {
  const Vector mean = log_kt.rowwise().mean();
  return (-log_kt).colwise() + mean;
}

Matrix u_from_v(const Matrix& v, const BarycenterProblem& problem) {
  const Eigen::Index n = problem.support();
  const Vector zero = Vector::Zero(n);
  Matrix u(n, v.cols());
  for (Eigen::Index l = 0; l < v.cols(); ++l) {
    u.col(l) = log_weights(problem.measures[static_cast<std::size_t>(l)]) -
               log_row_sums(zero, v.col(l), problem.cost, problem.gamma);
  }
  return u;
}

double spread(const Matrix& marginals, const Vector& mean) {
  double acc = 0.0;
  for (Eigen::Index l = 0; l < marginals.cols(); ++l) acc += (marginals.col(l) - mean).lpNorm<1>();
  return acc / static_cast<double>(marginals.cols());
}

void shift_to_zero_max(Eigen::Ref<Vector> xi) {
  if (xi.size() > 0) xi.array() -= xi.maxCoeff();
}

std::vector<DiscreteMeasure> smooth_all(const std::vector<DiscreteMeasure>& measures,
                                        double eps_prime) {
  std::vector<DiscreteMeasure> out;
  out.reserve(measures.size());
  for (const auto& p : measures) out.push_back(smooth_measure(p, eps_prime, 4.0));
  return out;
}

void check_inputs(const std::vector<DiscreteMeasure>& measures, const CostMatrix& cost, double eps) {
  if (measures.empty()) throw InputError("barycenter needs at least one measure");
  for (const auto& p : measures) require_same_size(p.size(), cost.size(), "barycenter measure");
  if (!(eps > 0.0)) throw ParameterError("eps must be positive");
  if (cost.size() < 2) throw ParameterError("barycenter needs n >= 2");
}

// Any q is eps-optimal once eps >= ||C||_inf; used when the smoothing
// parameter would leave (0, 2).
BarycenterResult trivial_barycenter(const std::vector<DiscreteMeasure>& measures,
                                    const CostMatrix& cost, const std::string& method, double eps) {
  BarycenterResult out;
  Vector mean = Vector::Zero(cost.size());
  for (const auto& p : measures) mean += p.weights();
  mean /= static_cast<double>(measures.size());
  out.q_bar = mean;
  double total = 0.0;
  for (const auto& p : measures) {
    TransportPlan plan;
    plan.entries = p.weights() * mean.transpose();
    plan.feasible_for = std::make_pair(p.weights(), mean);
    total += transport_cost(plan.entries, cost);
    out.plans.push_back(std::move(plan));
  }
  out.report.method = method;
  out.report.objective = total / static_cast<double>(measures.size());
  out.report.set_param("eps", eps);
  out.report.set_param("short_circuit", 1.0);
  return out;
}

}  // namespace

void BarycenterProblem::validate() const {
  if (measures.empty()) throw InputError("barycenter needs at least one measure");
  for (const auto& p : measures) require_same_size(p.size(), cost.size(), "barycenter measure");
  require_positive_gamma(gamma);
}

WbDualState WbDualState::zeros(Eigen::Index n, std::size_t m) {
  const auto cols = static_cast<Eigen::Index>(m);
  return {Matrix::Zero(n, cols), Matrix::Zero(n, cols), 0};
}

WbDualState ibp_step(const WbDualState& state, const BarycenterProblem& problem) {
  problem.validate();
  require_positive_measures(problem);
  WbDualState next = state;
  if (state.iteration % 2 == 0) {
    next.v = geometric_mean_v(log_kernel_t_exp(state.u, problem.cost, problem.gamma));
  } else {
    next.u = u_from_v(state.v, problem);
  }
  ++next.iteration;
  if (!next.u.allFinite() || !next.v.allFinite()) throw NumericalError("ibp: non-finite duals");
  return next;
}

double ibp_dual_objective(const WbDualState& state, const BarycenterProblem& problem) {
  problem.validate();
  double acc = 0.0;
  for (std::size_t l = 0; l < problem.count(); ++l) {
    const auto col = static_cast<Eigen::Index>(l);
    const Vector u = state.u.col(col);
    acc += std::exp(log_total_mass(u, state.v.col(col), problem.cost, problem.gamma)) -
           u.dot(problem.measures[l].weights());
  }
  return problem.gamma * acc / static_cast<double>(problem.count());
}

double wb_dual_objective(const WbDualState& state, const BarycenterProblem& problem) {
  problem.validate();
  double acc = 0.0;
  for (std::size_t l = 0; l < problem.count(); ++l) {
    const auto col = static_cast<Eigen::Index>(l);
    const Vector u = state.u.col(col);
    acc += log_total_mass(u, state.v.col(col), problem.cost, problem.gamma) -
           u.dot(problem.measures[l].weights());
  }
  return problem.gamma * acc / static_cast<double>(problem.count());
}

WbGradient wb_dual_gradient(const WbDualState& state, const BarycenterProblem& problem) {
  problem.validate();
  const Eigen::Index n = problem.support();
  const auto m = static_cast<Eigen::Index>(problem.count());
  const double scale = problem.gamma / static_cast<double>(m);
  WbGradient grad{Matrix(n, m), Matrix(n, m)};
  for (Eigen::Index l = 0; l < m; ++l) {
    const Matrix plan =
        normalized_scaling_matrix({state.u.col(l), state.v.col(l)}, problem.cost, problem.gamma);
    grad.u.col(l) =
        scale * (plan.rowwise().sum() - problem.measures[static_cast<std::size_t>(l)].weights());
    grad.v.col(l) = scale * plan.colwise().sum().transpose();
  }
  return grad;
}

WbGradient project_onto_constraint(WbGradient grad) {
  const Vector mean = grad.v.rowwise().mean();
  grad.v.colwise() -= mean;
  return grad;
}

Matrix ibp_column_marginals(const WbDualState& state, const BarycenterProblem& problem) {
  problem.validate();
  const Eigen::Index n = problem.support();
  const auto m = static_cast<Eigen::Index>(problem.count());
  Matrix out(n, m);
  for (Eigen::Index l = 0; l < m; ++l) {
    out.col(l) = log_col_sums(state.u.col(l), state.v.col(l), problem.cost, problem.gamma)
                     .array()
                     .exp()
                     .matrix();
  }
  return out;
}

IbpResult ibp_solve(const BarycenterProblem& problem, double eps_prime, const IbpOptions& options) {
  problem.validate();
  require_positive_measures(problem);
  if (!(eps_prime > 0.0)) throw ParameterError("eps' must be positive");

  const Eigen::Index n = problem.support();
  IbpResult result;
  result.trace = Trace({"iteration", "spread", "dual_objective"});
  WbDualState& state = result.state;
  state = WbDualState::zeros(n, problem.count());

  for (;;) {
    // v-step; ln K^T e^{u_l} also yields the column marginals of the current state.
    const Matrix log_kt = log_kernel_t_exp(state.u, problem.cost, problem.gamma);
    if (state.iteration > 0) {
      const Matrix marginals = (state.v + log_kt).array().exp().matrix();
      const Vector mean = marginals.rowwise().mean();
      const double current = spread(marginals, mean);
      if (options.record_trace) {
        result.trace.push({static_cast<double>(state.iteration), current,
                           ibp_dual_objective(state, problem)});
      }
      if (current <= eps_prime) break;
    }
    if (state.iteration >= options.max_iter) {
      throw ConvergenceError("ibp: no convergence within " + std::to_string(options.max_iter) +
                                 " iterations",
                             result.trace);
    }
    state.v = geometric_mean_v(log_kt);
    ++state.iteration;
    if (options.on_half_step) options.on_half_step(state, false);

    state.u = u_from_v(state.v, problem);
    ++state.iteration;
    if (!state.u.allFinite() || !state.v.allFinite()) throw NumericalError("ibp: non-finite duals");
    if (options.on_half_step) options.on_half_step(state, true);
  }

  result.q_bar = Vector::Zero(n);
  for (Eigen::Index l = 0; l < state.u.cols(); ++l) {
    result.plans.push_back(scaling_matrix({state.u.col(l), state.v.col(l)}, problem.cost, problem.gamma));
    result.q_bar += result.plans.back().colwise().sum().transpose();
  }
  result.q_bar /= static_cast<double>(state.u.cols());
  return result;
}

BarycenterResult barycenter_ibp(const std::vector<DiscreteMeasure>& measures,
                                const CostMatrix& cost, double eps,
                                std::optional<double> gamma_override, const IbpOptions& options) {
  check_inputs(measures, cost, eps);
  const double n = static_cast<double>(cost.size());
  const double eps_prime = eps / (4.0 * cost.inf_norm());
  if (!(eps_prime < 2.0)) return trivial_barycenter(measures, cost, "ibp", eps);

  const double gamma = gamma_override.value_or(eps / (4.0 * std::log(n)));
  BarycenterProblem problem{smooth_all(measures, eps_prime), cost, gamma};
  const IbpResult solve = ibp_solve(problem, eps_prime, options);

  Vector mass_cols = Vector::Zero(cost.size());
  double mass = 0.0;
  for (const auto& b : solve.plans) {
    mass_cols += b.colwise().sum().transpose();
    mass += b.sum();
  }

  BarycenterResult out;
  out.q_bar = mass_cols / mass;
  const DiscreteMeasure q_bar(out.q_bar);
  out.q_bar = q_bar.weights();
  double total = 0.0;
  for (std::size_t l = 0; l < measures.size(); ++l) {
    out.plans.push_back(round_to_polytope(solve.plans[l], measures[l], q_bar));
    total += transport_cost(out.plans.back().entries, cost);
  }

  SolveReport& report = out.report;
  report.method = "ibp";
  report.objective = total / static_cast<double>(measures.size());
  report.regularized_objective = -ibp_dual_objective(solve.state, problem);
  report.certificate = solve.trace.empty() ? 0.0 : solve.trace.rows.back()[1];
  report.iterations = solve.state.iteration;
  report.gamma_overridden = gamma_override.has_value();
  report.set_param("eps", eps);
  report.set_param("eps_prime", eps_prime);
  report.set_param("gamma", gamma);
  report.set_param("m", static_cast<double>(measures.size()));
  report.set_param("n", n);
  report.trace = solve.trace;
  return out;
}

WbDualObjective::WbDualObjective(BarycenterProblem problem) : problem_(std::move(problem)) {
  problem_.validate();
}

Eigen::Index WbDualObjective::dimension() const {
  return 2 * problem_.support() * static_cast<Eigen::Index>(problem_.count());
}

WbDualState WbDualObjective::split(const Vector& x) const {
  const Eigen::Index n = problem_.support();
  const auto m = static_cast<Eigen::Index>(problem_.count());
  require_same_size(x.size(), 2 * n * m, "stacked barycenter dual");
  WbDualState s;
  s.u = Eigen::Map<const Matrix>(x.data(), n, m);
  s.v = Eigen::Map<const Matrix>(x.data() + n * m, n, m);
  return s;
}

Vector WbDualObjective::stack(const WbDualState& state) const {
  const Eigen::Index nm = state.u.size();
  Vector x(2 * nm);
  x.head(nm) = Eigen::Map<const Vector>(state.u.data(), nm);
  x.tail(nm) = Eigen::Map<const Vector>(state.v.data(), nm);
  return x;
}

double WbDualObjective::value(const Vector& x) const { return wb_dual_objective(split(x), problem_); }

Vector WbDualObjective::gradient(const Vector& x) const {
  const WbGradient g = project_onto_constraint(wb_dual_gradient(split(x), problem_));
  return stack({g.u, g.v, 0});
}

Vector WbDualObjective::minimize_block(const Vector& x, Block block) const {
  require_positive_measures(problem_);
  WbDualState s = split(x);
  if (block == Block::u) {
    s.u = u_from_v(s.v, problem_);
  } else {
    s.v = geometric_mean_v(log_kernel_t_exp(s.u, problem_.cost, problem_.gamma));
  }
  return stack(s);
}

std::vector<Matrix> WbDualObjective::coupled_plans(const Vector& x) const {
  const WbDualState s = split(x);
  std::vector<Matrix> plans;
  for (Eigen::Index l = 0; l < s.u.cols(); ++l) {
    plans.push_back(normalized_scaling_matrix({s.u.col(l), s.v.col(l)}, problem_.cost, problem_.gamma));
  }
  return plans;
}

void WbDualObjective::normalize(Vector& x) const {
  const Eigen::Index n = problem_.support();
  const auto m = static_cast<Eigen::Index>(problem_.count());
  for (Eigen::Index l = 0; l < m; ++l) shift_to_zero_max(x.segment(l * n, n));
  // v shifts must cancel across measures to stay on sum_l v_l = 0.
  Vector shifts(m);
  for (Eigen::Index l = 0; l < m; ++l) shifts[l] = x.segment((m + l) * n, n).maxCoeff();
  shifts.array() -= shifts.mean();
  for (Eigen::Index l = 0; l < m; ++l) x.segment((m + l) * n, n).array() -= shifts[l];
}

BarycenterResult accelerated_ibp(const std::vector<DiscreteMeasure>& measures,
                                 const CostMatrix& cost, double eps,
                                 std::optional<double> gamma_override,
                                 const AcceleratedIbpOptions& options) {
  check_inputs(measures, cost, eps);
  const double n = static_cast<double>(cost.size());
  const double eps_prime = eps / (8.0 * cost.inf_norm());
  if (!(eps_prime < 2.0)) return trivial_barycenter(measures, cost, "aibp", eps);

  const double gamma = gamma_override.value_or(eps / (2.0 * std::log(n)));
  const std::vector<DiscreteMeasure> smoothed = smooth_all(measures, eps_prime);
  const WbDualObjective objective(BarycenterProblem{smoothed, cost, gamma});
  const double m = static_cast<double>(measures.size());

  BarycenterResult out;
  SolveReport& report = out.report;
  report.method = "aibp";
  report.gamma_overridden = gamma_override.has_value();
  report.set_param("eps", eps);
  report.set_param("eps_prime", eps_prime);
  report.set_param("gamma", gamma);
  report.set_param("m", m);
  report.set_param("n", n);
  report.trace = Trace({"iteration", "phi", "gap", "rounding_gap", "a", "A"});

  AamState state = aam_init(objective);
  for (long k = 0; k < options.max_iter; ++k) {
    state = aam_iterate(state, objective, options.step);
    Vector q_vec = Vector::Zero(cost.size());
    for (const auto& plan : state.plan_avg) q_vec += plan.colwise().sum().transpose();
    const DiscreteMeasure q_bar(q_vec / m);

    double rounding_gap = 0.0;
    double primal = 0.0;
    for (std::size_t l = 0; l < measures.size(); ++l) {
      const Matrix& avg = state.plan_avg[l];
      const TransportPlan rounded = round_to_polytope(avg, smoothed[l], q_bar);
      rounding_gap += transport_cost(rounded.entries, cost) - transport_cost(avg, cost);
      primal += regularized_cost(avg, cost, gamma);
    }
    rounding_gap /= m;
    const double gap = primal / m + state.phi_eta;
    report.trace.push({static_cast<double>(state.iteration), state.phi_eta, gap, rounding_gap,
                       state.last_a, state.A_big});

    if (rounding_gap <= eps / 4.0 && gap <= eps / 4.0) {
      out.q_bar = q_bar.weights();
      double total = 0.0;
      for (std::size_t l = 0; l < measures.size(); ++l) {
        out.plans.push_back(round_to_polytope(state.plan_avg[l], measures[l], q_bar));
        total += transport_cost(out.plans.back().entries, cost);
      }
      report.objective = total / m;
      report.regularized_objective = -state.phi_eta;
      report.certificate = gap;
      report.iterations = state.iteration;
      return out;
    }
  }
  throw ConvergenceError("accelerated_ibp: no convergence within " +
                             std::to_string(options.max_iter) + " iterations",
                         report.trace);
}

double fenchel_dual_ot(const Vector& u, const DiscreteMeasure& p, const CostMatrix& cost,
                       double gamma) {
  require_positive_gamma(gamma);
  require_same_size(u.size(), cost.size(), "fenchel_dual_ot u");
  require_same_size(p.size(), cost.size(), "fenchel_dual_ot p");
  if (!p.strictly_positive()) throw DomainError("fenchel_dual_ot: measure must be strictly positive");
  const Eigen::Index n = cost.size();
  Vector buf(n);
  double acc = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) buf[i] = (u[i] - cost(i, j)) / gamma;
    acc += p[j] * (logsumexp(buf) - std::log(p[j]));
  }
  return gamma * acc;
}

Vector softmax_column(const Vector& u, const CostMatrix& cost, double gamma, Eigen::Index column) {
  require_positive_gamma(gamma);
  require_same_size(u.size(), cost.size(), "softmax_column u");
  const Eigen::Index n = cost.size();
  Vector logits(n);
  for (Eigen::Index i = 0; i < n; ++i) logits[i] = (u[i] - cost(i, column)) / gamma;
  const double lse = logsumexp(logits);
  return (logits.array() - lse).exp().matrix();
}

Vector fenchel_dual_gradient(const Vector& u, const DiscreteMeasure& p, const CostMatrix& cost,
                             double gamma) {
  require_same_size(p.size(), cost.size(), "fenchel_dual_gradient p");
  Vector grad = Vector::Zero(cost.size());
  for (Eigen::Index j = 0; j < cost.size(); ++j) {
    if (p[j] > 0.0) grad += p[j] * softmax_column(u, cost, gamma, j);
  }
  return grad;
}

}  // namespace otkit
