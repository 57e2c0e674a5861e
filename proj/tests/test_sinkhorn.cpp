#include <cmath>

#include "doctest.h"
#include "otkit/aam.hpp"
#include "otkit/instances.hpp"
#include "otkit/rounding.hpp"
#include "otkit/sinkhorn.hpp"
#include "support.hpp"

using namespace otkit;
using otkit::testing::mat;
using otkit::testing::max_abs_diff;
using otkit::testing::TwoByTwo;

namespace {

Matrix coupled(const SinkhornState& s, const CostMatrix& cost, double gamma) {
  return scaling_matrix(s.pot, cost, gamma);
}

}  // namespace

TEST_SUITE("sinkhorn") {
  TEST_CASE("each half-step matches its marginal exactly") {
    const auto inst = instances::random_ot(8, 21);
    const double gamma = 0.1 * inst.cost.inf_norm();
    SinkhornState s{DualPotentials::zeros(8)};
    double previous = sinkhorn_dual_objective(s.pot, inst.cost, gamma, inst.p, inst.q);
    for (int k = 0; k < 60; ++k) {
      const bool u_step = s.iteration % 2 == 0;
      s = sinkhorn_step(s, inst.cost, gamma, inst.p, inst.q);
      const TransportPlan plan{coupled(s, inst.cost, gamma)};
      if (u_step) {
        CHECK((plan.row_sums() - inst.p.weights()).lpNorm<1>() < 1e-9);
      } else {
        CHECK((plan.col_sums() - inst.q.weights()).lpNorm<1>() < 1e-9);
      }
      const double f = sinkhorn_dual_objective(s.pot, inst.cost, gamma, inst.p, inst.q);
      CHECK(f <= previous + 1e-12);
      previous = f;
    }
  }

  TEST_CASE("dual objective at the origin") {
    const double gamma = 0.7;
    const DiscreteMeasure u = DiscreteMeasure::uniform(3);
    const CostMatrix zero(Matrix::Zero(3, 3));
    CHECK(sinkhorn_dual_objective(DualPotentials::zeros(3), zero, gamma, u, u) ==
          doctest::Approx(gamma * 9.0));
  }

  TEST_CASE("uniform marginals with a constant cost balance in one sweep") {
    const double gamma = 0.5;
    const DiscreteMeasure u = DiscreteMeasure::uniform(4);
    const CostMatrix flat(Matrix::Constant(4, 4, 2.0));
    SinkhornState s{DualPotentials::zeros(4)};
    s = sinkhorn_step(s, flat, gamma, u, u);
    s = sinkhorn_step(s, flat, gamma, u, u);
    CHECK(max_abs_diff(coupled(s, flat, gamma), Matrix::Constant(4, 4, 1.0 / 16.0)) < 1e-15);
  }

  TEST_CASE("zero cost converges within two half-steps") {
    const auto inst = instances::random_ot(5, 22);
    const CostMatrix zero(Matrix::Zero(5, 5));
    SinkhornOptions options;
    options.max_iter = 100;
    const auto res = sinkhorn_solve(zero, 0.3, inst.p, inst.p, 1e-12, options);
    CHECK(res.state.iteration <= 2);
    CHECK(max_abs_diff(res.plan.entries, inst.p.weights() * inst.p.weights().transpose()) < 1e-15);
  }

  TEST_CASE("two by two instance rounds to the LP cost") {
    const TwoByTwo inst;
    SinkhornOptions options;
    options.max_iter = 1'000'000;
    const auto res = sinkhorn_solve(inst.cost, 0.05, inst.p, inst.q, 1e-6, options);
    CHECK(marginal_violation(res.plan.entries, inst.p, inst.q) <= 1e-6);
    const TransportPlan rounded = round_to_polytope(res.plan.entries, inst.p, inst.q);
    CHECK(std::abs(transport_cost(rounded.entries, inst.cost) - 0.3) <= 0.01);
  }

  TEST_CASE("iteration count obeys the envelope") {
    for (std::uint64_t seed : {23u, 24u, 25u}) {
      const auto inst = instances::random_ot(16, seed);
      const double gamma = 0.1 * inst.cost.inf_norm();
      const double eps_prime = 1e-3;
      const auto res = sinkhorn_solve(inst.cost, gamma, inst.p, inst.q, eps_prime);
      const double r = radius_bound(inst.cost, gamma, inst.p, inst.q);
      CHECK(static_cast<double>(res.state.iteration) <= 2.0 + 4.0 * r / eps_prime);
      // Trace rows after t = 2 stay under 4R/(t-2).
      const auto t = res.trace.column("iteration");
      const auto e = res.trace.column("violation");
      for (std::size_t k = 0; k < t.size(); ++k) {
        if (t[k] > 2.0) CHECK(e[k] <= 4.0 * r / (t[k] - 2.0));
      }
    }
  }

  TEST_CASE("budget exhaustion carries the trace") {
    const auto inst = instances::random_ot(8, 26);
    SinkhornOptions options;
    options.max_iter = 5;
    try {
      sinkhorn_solve(inst.cost, 0.01 * inst.cost.inf_norm(), inst.p, inst.q, 1e-12, options);
      FAIL("expected a convergence error");
    } catch (const ConvergenceError& e) {
      CHECK_FALSE(e.trace().empty());
    }
  }

  TEST_CASE("nonpositive marginals are rejected") {
    const TwoByTwo inst;
    const DiscreteMeasure hole = otkit::testing::measure({1.0, 0.0});
    SinkhornState s{DualPotentials::zeros(2)};
    CHECK_THROWS_WITH_AS(sinkhorn_step(s, inst.cost, 0.1, hole, inst.q),
                         "marginal must be strictly positive", DomainError);
  }

  TEST_CASE("kl projection") {
    const Matrix plan = mat({{0.5, 0.1}, {0.1, 0.3}});
    const DiscreteMeasure half = DiscreteMeasure::uniform(2);
    const Matrix rows = kl_project(plan, half, Axis::rows);
    CHECK(max_abs_diff(rows, mat({{0.5 / 1.2, 0.1 / 1.2}, {0.125, 0.375}})) < 1e-15);
    CHECK(rows(0, 0) == doctest::Approx(0.41666).epsilon(1e-4));
    CHECK(rows(0, 1) == doctest::Approx(0.08333).epsilon(1e-4));

    const Matrix feasible = Matrix::Constant(2, 2, 0.25);
    CHECK(max_abs_diff(kl_project(feasible, half, Axis::columns), feasible) < 1e-16);
    CHECK_THROWS_AS((kl_project(mat({{0, 0}, {0.5, 0.5}}), half, Axis::rows)), DomainError);
  }

  TEST_CASE("alternating kl projections reproduce the log-domain iterates") {
    for (std::uint64_t seed : {27u, 28u, 29u}) {
      const auto inst = instances::random_ot(8, seed);
      const double gamma = 0.2 * inst.cost.inf_norm();
      Matrix plan = (-inst.cost.entries().array() / gamma).exp().matrix();
      SinkhornState s{DualPotentials::zeros(8)};
      for (int k = 0; k < 40; ++k) {
        plan = kl_project(plan, k % 2 == 0 ? inst.p : inst.q, k % 2 == 0 ? Axis::rows : Axis::columns);
        s = sinkhorn_step(s, inst.cost, gamma, inst.p, inst.q);
        CHECK(max_abs_diff(plan, coupled(s, inst.cost, gamma)) < 1e-9);
      }
    }
  }

  TEST_CASE("regularized gap certificate") {
    const auto inst = instances::random_ot(8, 30);
    const double gamma = 0.1 * inst.cost.inf_norm();
    const double optimum = regularized_ot_value(inst.cost, gamma, inst.p, inst.q);
    SinkhornState s{DualPotentials::zeros(8)};
    for (int k = 0; k < 30; ++k) {
      s = sinkhorn_step(s, inst.cost, gamma, inst.p, inst.q);
      const Matrix plan = coupled(s, inst.cost, gamma);
      const double g = regularized_cost(plan, inst.cost, gamma);
      const double cert = reg_gap_certificate(s, inst.cost, gamma, inst.p, inst.q);
      const double r = radius_bound(inst.cost, gamma, inst.p, inst.q);
      CHECK(cert == doctest::Approx(gamma * r / 2.0 * marginal_violation(plan, inst.p, inst.q)));
      CHECK(g - optimum <= cert + 1e-9);
    }
  }

  TEST_CASE("approximate OT on the two by two instance") {
    const TwoByTwo inst;
    const auto res = approx_ot_sinkhorn(inst.cost, inst.p, inst.q, 0.05);
    const double cost = transport_cost(res.plan.entries, inst.cost);
    CHECK(cost >= 0.3 - 1e-12);
    CHECK(cost <= 0.35);
    CHECK(marginal_violation(res.plan.entries, inst.p, inst.q) < 1e-12);
    CHECK(res.report.objective == doctest::Approx(cost));
  }

  TEST_CASE("approximate OT with zero cost") {
    const auto inst = instances::random_ot(6, 31);
    const CostMatrix zero(Matrix::Zero(6, 6));
    const auto res = approx_ot_sinkhorn(zero, inst.p, inst.q, 0.1);
    CHECK(res.report.objective == 0.0);
    CHECK(marginal_violation(res.plan.entries, inst.p, inst.q) < 1e-12);
  }

  TEST_CASE("gamma override is reported") {
    const TwoByTwo inst;
    const auto res = approx_ot_sinkhorn(inst.cost, inst.p, inst.q, 0.05, 0.02);
    CHECK(res.report.gamma_overridden);
    CHECK(res.report.param("gamma") == 0.02);
  }

  TEST_CASE("agrees with the accelerated solver on the regularized problem") {
    const TwoByTwo inst;
    const double gamma = 0.05;
    const double sinkhorn = regularized_ot_value(inst.cost, gamma, inst.p, inst.q);
    const auto aam = aam_solve(inst.cost, gamma, inst.p, inst.q);
    CHECK(std::abs(sinkhorn + aam.state.phi_eta) <= 1e-6);
  }
}
