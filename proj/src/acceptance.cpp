#include "otkit/acceptance.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>

#include "otkit/aam.hpp"
#include "otkit/barycenter.hpp"
#include "otkit/decentralized.hpp"
#include "otkit/instances.hpp"
#include "otkit/oracle.hpp"
#include "otkit/rounding.hpp"
#include "otkit/sinkhorn.hpp"

namespace otkit::acceptance {

namespace {

using instances::Engine;

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

// Counts checks and keeps the first failure for the report line.
class Tally {
 public:
  void check(bool ok, const std::string& what) {
    ++checks_;
    if (!ok) {
      ++failures_;
      if (first_.empty()) first_ = what;
    }
  }
  bool ok() const { return failures_ == 0; }
  long failures() const { return failures_; }
  std::string summary() const {
    std::string s = std::to_string(checks_) + " checks, " + std::to_string(failures_) + " failed";
    if (!first_.empty()) s += " (first: " + first_ + ")";
    return s;
  }

 private:
  long checks_ = 0;
  long failures_ = 0;
  std::string first_;
};

Outcome make(bool passed, std::string detail) {
  Outcome o;
  o.passed = passed;
  o.detail = std::move(detail);
  return o;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// Shared by the two end-to-end OT criteria.
instances::OtInstance end_to_end_instance(int k) {
  const Eigen::Index n = 4 + 4 * (k % 4);
  return instances::random_ot(n, 2000 + static_cast<std::uint64_t>(k));
}
constexpr int kEndToEndCount = 10;

double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

// Central differences of f at x, step h.
template <typename F>
Vector finite_difference(F&& f, const Vector& x, double h) {
  Vector g(x.size());
  Vector probe = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    probe[i] = x[i] + h;
    const double up = f(probe);
    probe[i] = x[i] - h;
    const double down = f(probe);
    probe[i] = x[i];
    g[i] = (up - down) / (2.0 * h);
  }
  return g;
}

double relative_error(const Vector& approx, const Vector& exact) {
  const double scale = std::max(exact.norm(), 1e-12);
  return (approx - exact).norm() / scale;
}

Vector gaussian(Eigen::Index n, double scale, Engine& rng) {
  std::normal_distribution<double> z(0.0, scale);
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = z(rng);
  return v;
}

Outcome rate_envelope() {
  const auto start = std::chrono::steady_clock::now();
  long violations = 0;
  long checked = 0;
  double worst_ratio = 0.0;
  for (int k = 0; k < 20; ++k) {
    const Eigen::Index n = k < 10 ? 8 : 32;
    const auto inst = instances::random_ot(n, 1000 + static_cast<std::uint64_t>(k));
    const double gamma = 0.1 * inst.cost.inf_norm();
    const double radius = radius_bound(inst.cost, gamma, inst.p, inst.q);
    SinkhornState state;
    state.pot = DualPotentials::zeros(n);
    for (long t = 1; t <= 500; ++t) {
      state = sinkhorn_step(state, inst.cost, gamma, inst.p, inst.q);
      if (t <= 2) continue;
      const double e = marginal_violation(scaling_matrix(state.pot, inst.cost, gamma), inst.p, inst.q);
      const double bound = 4.0 * radius / static_cast<double>(t - 2);
      ++checked;
      worst_ratio = std::max(worst_ratio, e / bound);
      if (e > bound) ++violations;
    }
  }
  const double elapsed = seconds_since(start);
  return make(violations == 0 && elapsed < 60.0,
              "20 instances, " + std::to_string(checked) + " (t, E) pairs, " +
                  std::to_string(violations) + " above 4R/(t-2), max E/bound " + num(worst_ratio) +
                  ", " + num(elapsed) + " s of 60");
}

Outcome sinkhorn_end_to_end() {
  const auto start = std::chrono::steady_clock::now();
  Tally tally;
  double worst_gap = -1e300;
  for (int k = 0; k < kEndToEndCount; ++k) {
    const auto inst = end_to_end_instance(k);
    const double eps = 0.1 * inst.cost.inf_norm();
    const auto approx = approx_ot_sinkhorn(inst.cost, inst.p, inst.q, eps);
    const auto exact = exact_ot_lp(inst.cost, inst.p, inst.q);
    const Matrix& plan = approx.plan.entries;
    const std::string tag = "instance " + std::to_string(k);
    tally.check(marginal_violation(plan, inst.p, inst.q) <= 1e-9, tag + " infeasible");
    tally.check(plan.minCoeff() >= 0.0, tag + " negative entry");
    const double gap = transport_cost(plan, inst.cost) - exact.objective;
    worst_gap = std::max(worst_gap, gap / eps);
    tally.check(gap <= eps, tag + " gap " + num(gap) + " > eps " + num(eps));
  }
  const double elapsed = seconds_since(start);
  tally.check(elapsed < 120.0, "runtime " + num(elapsed) + " s");
  return make(tally.ok(), tally.summary() + ", max gap/eps " + num(worst_gap) + ", " +
                              num(elapsed) + " s of 120");
}

Outcome rounding_contract() {
  Engine rng(3000);
  Tally tally;
  double worst_slack = 0.0;
  for (int k = 0; k < 100; ++k) {
    const Matrix plan = instances::random_plan(8, rng);
    const DiscreteMeasure p = instances::random_measure(8, rng);
    const DiscreteMeasure q = instances::random_measure(8, rng);
    const TransportPlan out = round_to_polytope(plan, p, q);
    const std::string tag = "matrix " + std::to_string(k);
    tally.check(marginal_violation(out.entries, p, q) <= 1e-12, tag + " infeasible");
    tally.check(out.entries.minCoeff() >= 0.0, tag + " negative entry");
    const double moved = (out.entries - plan).cwiseAbs().sum();
    const double budget = marginal_violation(plan, p, q);
    worst_slack = std::max(worst_slack, moved - budget);
    // Floating-point equality cases need a roundoff allowance.
    tally.check(moved <= budget + 1e-12, tag + " moved " + num(moved) + " > " + num(budget));
    const TransportPlan again = round_to_polytope(out.entries, p, q);
    tally.check((again.entries - out.entries).cwiseAbs().sum() <= 1e-12, tag + " not idempotent");
  }
  return make(tally.ok(), tally.summary() + ", max (moved - E) " + num(worst_slack));
}

Outcome accelerated_end_to_end() {
  const auto start = std::chrono::steady_clock::now();
  Tally tally;
  double worst_gap = -1e300;
  double worst_agreement = 0.0;
  double worst_envelope = 0.0;

  auto check_envelopes = [&](const Trace& trace, double bound_d, double gamma,
                             const std::string& tag) {
    for (std::size_t r = 0; r < trace.size(); ++r) {
      const double t = trace.at(r, "iteration");
      const double gap_bound = 32.0 * bound_d * bound_d / (gamma * t * t);
      const double feas_bound = 32.0 * bound_d / (gamma * t * t);
      const double gap = std::abs(trace.at(r, "gap"));
      const double feas = trace.at(r, "violation_l2");
      worst_envelope = std::max({worst_envelope, gap / gap_bound, feas / feas_bound});
      tally.check(gap <= gap_bound, tag + " gap envelope at t=" + num(t));
      tally.check(feas <= feas_bound, tag + " feasibility envelope at t=" + num(t));
    }
  };

  for (int k = 0; k < kEndToEndCount; ++k) {
    const auto inst = end_to_end_instance(k);
    const std::string tag = "instance " + std::to_string(k);
    const double eps = 0.1 * inst.cost.inf_norm();
    const auto result = accelerated_ot(inst.cost, inst.p, inst.q, eps);
    const auto exact = exact_ot_lp(inst.cost, inst.p, inst.q);
    const Matrix& plan = result.plan.entries;
    tally.check(marginal_violation(plan, inst.p, inst.q) <= 1e-9, tag + " infeasible");
    const double gap = transport_cost(plan, inst.cost) - exact.objective;
    worst_gap = std::max(worst_gap, gap / eps);
    tally.check(gap <= eps, tag + " gap " + num(gap) + " > eps " + num(eps));
    check_envelopes(result.report.trace, result.report.param("D"), result.report.param("gamma"),
                    tag + " eps-mode");

    const double gamma = 0.05 * inst.cost.inf_norm();
    const auto solved = aam_solve(inst.cost, gamma, inst.p, inst.q);
    const double aam_value = -solved.state.phi_eta;
    const double sinkhorn_value = regularized_ot_value(inst.cost, gamma, inst.p, inst.q);
    const double diff = std::abs(aam_value - sinkhorn_value);
    worst_agreement = std::max(worst_agreement, diff);
    tally.check(diff <= 1e-6, tag + " AAM/Sinkhorn differ by " + num(diff));
    check_envelopes(solved.trace, distance_bound(inst.cost, gamma, inst.p, inst.q), gamma,
                    tag + " fixed-gamma");
  }
  return make(tally.ok(), tally.summary() + ", max gap/eps " + num(worst_gap) +
                              ", max |AAM - Sinkhorn| " + num(worst_agreement) +
                              ", max trace/envelope " + num(worst_envelope) + ", " +
                              num(seconds_since(start)) + " s");
}

Outcome gradient_checks() {
  Engine rng(5000);
  Tally tally;
  double worst = 0.0;
  constexpr double kStep = 1e-5;
  for (int k = 0; k < 50; ++k) {
    const std::string tag = "point " + std::to_string(k);

    {
      const Eigen::Index n = 5;
      const CostMatrix cost = instances::random_cost(n, rng);
      const DiscreteMeasure p = instances::random_measure(n, rng);
      const DiscreteMeasure q = instances::random_measure(n, rng);
      const double gamma = 0.2 + 0.3 * std::uniform_real_distribution<double>(0, 1)(rng);
      const Vector x = gaussian(2 * n, 1.0, rng);
      auto f = [&](const Vector& y) {
        return dual_objective_lip({y.head(n), y.tail(n)}, cost, gamma, p, q);
      };
      const auto [gu, gv] = dual_partial_gradients({x.head(n), x.tail(n)}, cost, gamma, p, q);
      Vector g(2 * n);
      g << gu, gv;
      const double err = relative_error(finite_difference(f, x, kStep), g);
      worst = std::max(worst, err);
      tally.check(err <= 1e-5, tag + " OT dual " + num(err));
    }

    {
      const Eigen::Index n = 4;
      const std::size_t m = 3;
      BarycenterProblem problem;
      problem.cost = instances::random_cost(n, rng);
      for (std::size_t l = 0; l < m; ++l) problem.measures.push_back(instances::random_measure(n, rng));
      problem.gamma = 0.3;
      const Eigen::Index block = n * static_cast<Eigen::Index>(m);
      const Vector x = gaussian(2 * block, 1.0, rng);
      auto unpack = [&](const Vector& y) {
        WbDualState s;
        s.u = Eigen::Map<const Matrix>(y.data(), n, static_cast<Eigen::Index>(m));
        s.v = Eigen::Map<const Matrix>(y.data() + block, n, static_cast<Eigen::Index>(m));
        return s;
      };
      auto f = [&](const Vector& y) { return wb_dual_objective(unpack(y), problem); };
      const WbGradient grad = wb_dual_gradient(unpack(x), problem);
      Vector g(2 * block);
      g << Eigen::Map<const Vector>(grad.u.data(), block), Eigen::Map<const Vector>(grad.v.data(), block);
      const Vector fd = finite_difference(f, x, kStep);
      const double err_u = relative_error(fd.head(block), g.head(block));
      const double err_v = relative_error(fd.tail(block), g.tail(block));
      worst = std::max({worst, err_u, err_v});
      tally.check(err_u <= 1e-5, tag + " WB u-block " + num(err_u));
      tally.check(err_v <= 1e-5, tag + " WB v-block " + num(err_v));
    }

    {
      const Eigen::Index n = 6;
      const CostMatrix cost = instances::random_cost(n, rng);
      const DiscreteMeasure p = instances::random_measure(n, rng);
      const double gamma = 0.25;
      const Vector u = gaussian(n, 1.0, rng);
      auto f = [&](const Vector& y) { return fenchel_dual_ot(y, p, cost, gamma); };
      const double err = relative_error(finite_difference(f, u, kStep),
                                        fenchel_dual_gradient(u, p, cost, gamma));
      worst = std::max(worst, err);
      tally.check(err <= 1e-5, tag + " Fenchel " + num(err));
    }
  }
  return make(tally.ok(), tally.summary() + ", max relative error " + num(worst));
}

Outcome barycenter_correctness() {
  Tally tally;
  double worst_ibp = -1e300;
  double worst_aibp = -1e300;
  double worst_half_step = 0.0;
  for (int k = 0; k < 5; ++k) {
    const auto inst = instances::random_barycenter(3, 2, 6000 + static_cast<std::uint64_t>(k));
    const std::string tag = "instance " + std::to_string(k);
    const double eps = 0.25 * inst.cost.inf_norm();
    const double exact = exact_barycenter_lp(inst.measures, inst.cost).objective;

    auto value_at = [&](const Vector& q_bar) {
      const DiscreteMeasure q(q_bar);
      double acc = 0.0;
      for (const auto& p : inst.measures) acc += exact_ot_lp(inst.cost, p, q).objective;
      return acc / static_cast<double>(inst.measures.size());
    };
    auto plans_feasible = [&](const BarycenterResult& r) {
      bool ok = true;
      for (std::size_t l = 0; l < r.plans.size(); ++l) {
        ok = ok && marginal_violation(r.plans[l].entries, inst.measures[l].weights(), r.q_bar) <= 1e-9;
      }
      return ok;
    };

    const auto ibp = barycenter_ibp(inst.measures, inst.cost, eps);
    const double gap_ibp = value_at(ibp.q_bar) - exact;
    worst_ibp = std::max(worst_ibp, gap_ibp / eps);
    tally.check(gap_ibp <= eps, tag + " IBP gap " + num(gap_ibp));
    tally.check(plans_feasible(ibp), tag + " IBP plans infeasible");

    const auto aibp = accelerated_ibp(inst.measures, inst.cost, eps);
    const double gap_aibp = value_at(aibp.q_bar) - exact;
    worst_aibp = std::max(worst_aibp, gap_aibp / eps);
    tally.check(gap_aibp <= eps, tag + " accelerated IBP gap " + num(gap_aibp));
    tally.check(plans_feasible(aibp), tag + " accelerated IBP plans infeasible");

    // Closed-form exactness of each half-step.
    BarycenterProblem problem{inst.measures, inst.cost, eps / (4.0 * std::log(3.0))};
    IbpOptions opts;
    opts.record_trace = false;
    opts.on_half_step = [&](const WbDualState& state, bool updated_u) {
      const std::size_t m = problem.count();
      if (updated_u) {
        for (std::size_t l = 0; l < m; ++l) {
          const auto li = static_cast<Eigen::Index>(l);
          const Vector rows = log_row_sums(state.u.col(li), state.v.col(li), problem.cost, problem.gamma)
                                  .array().exp().matrix();
          const double err = (rows - problem.measures[l].weights()).lpNorm<1>();
          worst_half_step = std::max(worst_half_step, err);
          tally.check(err <= 1e-9, tag + " row marginal after u-update " + num(err));
        }
      } else {
        const Matrix cols = ibp_column_marginals(state, problem);
        for (Eigen::Index l = 1; l < cols.cols(); ++l) {
          const double err = (cols.col(l) - cols.col(0)).lpNorm<1>();
          worst_half_step = std::max(worst_half_step, err);
          tally.check(err <= 1e-9, tag + " column marginals differ after v-update " + num(err));
        }
        const double drift = state.v.rowwise().sum().cwiseAbs().maxCoeff();
        worst_half_step = std::max(worst_half_step, drift);
        tally.check(drift <= 1e-9, tag + " sum of v drifted " + num(drift));
      }
    };
    ibp_solve(problem, 1e-8, opts);
  }
  return make(tally.ok(), tally.summary() + ", max gap/eps IBP " + num(worst_ibp) +
                              " accelerated " + num(worst_aibp) + ", max half-step marginal residual " +
                              num(worst_half_step));
}

Outcome decentralized_consensus() {
  const auto start = std::chrono::steady_clock::now();
  Tally tally;
  const auto inst = instances::random_barycenter(8, 4, 7000);
  const double gamma = 0.1 * inst.cost.inf_norm();
  const BarycenterProblem central{inst.measures, inst.cost, gamma};
  IbpOptions ibp_opts;
  ibp_opts.record_trace = false;
  const Vector q_ref = ibp_solve(central, 1e-11, ibp_opts).q_bar;

  struct Named {
    std::string name;
    std::vector<std::pair<int, int>> edges;
  };
  const std::vector<Named> graphs = {
      {"K4", {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}}},
      {"P4", {{0, 1}, {1, 2}, {2, 3}}},
  };
  constexpr long kMaxRounds = 200'000;
  std::ostringstream detail;
  for (const auto& g : graphs) {
    const CommunicationGraph graph = graph_laplacian(4, g.edges);
    SimConfig config;
    config.gamma = gamma;
    config.rounds = kMaxRounds;
    double worst_drift = 0.0;
    long reached = -1;
    const DecentralizedResult result = simulate_decentralized_barycenter(
          inst.measures, inst.cost, graph, config, [&](long round, const std::vector<NodeState>& nodes) {
            Vector total = Vector::Zero(inst.cost.size());
            for (const auto& node : nodes) total += node.u_local;
            const double drift = total.cwiseAbs().maxCoeff();
            worst_drift = std::max(worst_drift, drift);
            tally.check(drift <= 1e-12, g.name + " sum of u drifted at round " + std::to_string(round));
            if (round % 50 == 0 && consensus_error(nodes) <= 1e-3) {
              double accuracy = 0.0;
              for (const auto& node : nodes) accuracy = std::max(accuracy, (node.q_local - q_ref).lpNorm<1>());
              if (accuracy <= 5e-3) {
                reached = round;
                return false;
              }
            }
            return true;
          });
    const std::vector<NodeState>& final_nodes = result.nodes;
    tally.check(reached >= 0, g.name + " no consensus within " + std::to_string(kMaxRounds) + " rounds");
    double accuracy = 0.0;
    for (const auto& node : final_nodes) accuracy = std::max(accuracy, (node.q_local - q_ref).lpNorm<1>());
    const double consensus = final_nodes.empty() ? 1e300 : consensus_error(final_nodes);

    // Locality: replay one round with logging and probe a forbidden read.
    AccessLog log;
    const auto nodes0 = init_nodes(inst.measures, inst.cost, gamma, {});
    decentralized_dual_step(nodes0, graph, inst.cost, gamma, 4.0 * max_eigenvalue(graph) / gamma, {}, &log);
    bool local = true;
    for (auto [reader, target] : log.pairs) local = local && graph.can_read(reader, target);
    tally.check(local, g.name + " non-neighbour read recorded");
    bool refused = true;
    for (int i = 0; i < 4; ++i) {
      for (int j = 0; j < 4; ++j) {
        if (graph.can_read(i, j)) continue;
        const NeighborView view(graph, nodes0, i, nullptr);
        bool threw = false;
        try {
          view.q(j);
        } catch (const ProtocolError&) {
          threw = true;
        }
        refused = refused && threw;
      }
    }
    tally.check(refused, g.name + " forbidden read was not refused");

    detail << g.name << ": rounds " << reached << ", consensus " << num(consensus) << ", max |q_i - q_ibp|_1 "
           << num(accuracy) << ", max |sum u| " << num(worst_drift) << ", chi "
           << num(condition_number(graph)) << "; ";
  }
  return make(tally.ok(), detail.str() + tally.summary() + ", " + num(seconds_since(start)) + " s");
}

Outcome stochastic_unbiased() {
  Engine rng(8000);
  Tally tally;
  double worst = 0.0;
  for (int k = 0; k < 20; ++k) {
    const Eigen::Index n = 3 + k % 6;
    const CostMatrix cost = instances::random_cost(n, rng);
    const DiscreteMeasure p = instances::random_measure(n, rng);
    const double gamma = 0.05 + 0.5 * std::uniform_real_distribution<double>(0, 1)(rng);
    const Vector u = gaussian(n, 1.0, rng);
    Vector expectation = Vector::Zero(n);
    for (Eigen::Index xi = 0; xi < n; ++xi) expectation += p[xi] * softmax_column(u, cost, gamma, xi);
    const double err = (expectation - fenchel_dual_gradient(u, p, cost, gamma)).cwiseAbs().maxCoeff();
    worst = std::max(worst, err);
    tally.check(err <= 1e-12, "point " + std::to_string(k) + " error " + num(err));
  }
  return make(tally.ok(), tally.summary() + ", max |E[g] - grad| " + num(worst));
}

Outcome scaling_equivalence() {
  Tally tally;
  double worst_plan = 0.0;
  double worst_shift = 0.0;
  Engine rng(9000);
  for (int k = 0; k < 5; ++k) {
    const auto inst = instances::random_ot(6 + k, 9100 + static_cast<std::uint64_t>(k));
    const double gamma = 0.3 * inst.cost.inf_norm();
    const Matrix kernel = (-inst.cost.entries().array() / gamma).exp().matrix();
    Vector a = Vector::Ones(inst.cost.size());
    Vector b = Vector::Ones(inst.cost.size());
    SinkhornState state;
    state.pot = DualPotentials::zeros(inst.cost.size());
    for (int t = 0; t < 200; ++t) {
      state = sinkhorn_step(state, inst.cost, gamma, inst.p, inst.q);
      if (t % 2 == 0) {
        a = inst.p.weights().cwiseQuotient(kernel * b);
      } else {
        b = inst.q.weights().cwiseQuotient(kernel.transpose() * a);
      }
      const Matrix scaled = a.asDiagonal() * kernel * b.asDiagonal();
      const double diff = max_abs(scaling_matrix(state.pot, inst.cost, gamma) - scaled);
      worst_plan = std::max(worst_plan, diff);
      tally.check(diff <= 1e-9, "instance " + std::to_string(k) + " step " + std::to_string(t));
    }
    SinkhornOptions kernel_opts;
    kernel_opts.kernel_scaling = true;
    const auto via_kernel = sinkhorn_solve(inst.cost, gamma, inst.p, inst.q, 1e-10, kernel_opts);
    const auto via_logs = sinkhorn_solve(inst.cost, gamma, inst.p, inst.q, 1e-10);
    const double diff = max_abs(via_kernel.plan.entries - via_logs.plan.entries);
    worst_plan = std::max(worst_plan, diff);
    tally.check(diff <= 1e-9, "instance " + std::to_string(k) + " kernel vs log solve");
    tally.check(via_kernel.state.iteration == via_logs.state.iteration,
                "instance " + std::to_string(k) + " iteration counts differ");
  }

  for (double shift : {-1e4, -500.0, -1.0, 0.0, 2.5, 700.0, 1e4}) {
    const Vector x = gaussian(7, 3.0, rng);
    const Vector shifted = x.array() + shift;
    const double diff = std::abs(logsumexp(shifted) - logsumexp(x) - shift);
    worst_shift = std::max(worst_shift, diff);
    tally.check(diff <= 1e-9, "logsumexp shift " + num(shift));
  }
  {
    const std::vector<double> big{1000.0, 1000.0};
    const double diff = std::abs(logsumexp(big) - (1000.0 + std::log(2.0)));
    worst_shift = std::max(worst_shift, diff);
    tally.check(diff <= 1e-9, "logsumexp [1000, 1000]");
  }
  for (int k = 0; k < 10; ++k) {
    const auto inst = instances::random_ot(5, 9200 + static_cast<std::uint64_t>(k));
    const double gamma = 0.2;
    const DualPotentials pot{gaussian(5, 1.0, rng), gaussian(5, 1.0, rng)};
    const double tu = std::normal_distribution<double>(0, 3)(rng);
    const double tv = std::normal_distribution<double>(0, 3)(rng);
    const DualPotentials moved{pot.u.array() + tu, pot.v.array() + tv};
    const Matrix lhs = scaling_matrix(moved, inst.cost, gamma);
    const Matrix rhs = std::exp(tu + tv) * scaling_matrix(pot, inst.cost, gamma);
    const double rel = max_abs(lhs - rhs) / max_abs(rhs);
    worst_shift = std::max(worst_shift, rel);
    tally.check(rel <= 1e-9, "B(u + t, v + s) relative " + num(rel));
    const double phi_diff = std::abs(dual_objective_lip(moved, inst.cost, gamma, inst.p, inst.q) -
                                     dual_objective_lip(pot, inst.cost, gamma, inst.p, inst.q));
    worst_shift = std::max(worst_shift, phi_diff);
    tally.check(phi_diff <= 1e-9, "phi shift invariance " + num(phi_diff));
  }
  return make(tally.ok(), tally.summary() + ", max plan difference " + num(worst_plan) +
                              ", max shift residual " + num(worst_shift));
}

}  // namespace

const std::vector<Criterion>& criteria() {
  static const std::vector<Criterion> all = {
      {1, "sinkhorn-rate-envelope", rate_envelope},
      {2, "approx-ot-vs-lp", sinkhorn_end_to_end},
      {3, "rounding-contract", rounding_contract},
      {4, "accelerated-ot-vs-lp", accelerated_end_to_end},
      {5, "gradient-checks", gradient_checks},
      {6, "barycenter-vs-lp", barycenter_correctness},
      {7, "decentralized-consensus", decentralized_consensus},
      {8, "stochastic-gradient-unbiased", stochastic_unbiased},
      {9, "scaling-equivalence-shift-invariance", scaling_equivalence},
  };
  return all;
}

Outcome run_one(const Criterion& criterion) {
  const auto start = std::chrono::steady_clock::now();
  Outcome outcome;
  try {
    outcome = criterion.run();
  } catch (const std::exception& e) {
    outcome = make(false, std::string("exception: ") + e.what());
  }
  outcome.id = criterion.id;
  outcome.name = criterion.name;
  outcome.seconds = seconds_since(start);
  return outcome;
}

std::string format(const Outcome& outcome) {
  char secs[32];
  std::snprintf(secs, sizeof secs, "%.2f", outcome.seconds);
  return std::string(outcome.passed ? "PASS" : "FAIL") + " [" + std::to_string(outcome.id) + "] " +
         outcome.name + ": " + outcome.detail + " (" + secs + " s)";
}

std::vector<Outcome> run(std::ostream& out, const std::vector<int>& ids) {
  std::vector<Outcome> outcomes;
  for (const auto& c : criteria()) {
    if (!ids.empty() && std::find(ids.begin(), ids.end(), c.id) == ids.end()) continue;
    outcomes.push_back(run_one(c));
    out << format(outcomes.back()) << std::endl;
  }
  return outcomes;
}

}  // namespace otkit::acceptance
