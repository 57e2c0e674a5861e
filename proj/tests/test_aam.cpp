#include <cmath>

#include "doctest.h"
#include "otkit/aam.hpp"
#include "otkit/instances.hpp"
#include "otkit/oracle.hpp"
#include "support.hpp"

using namespace otkit;
using otkit::testing::numeric_gradient;
using otkit::testing::relative_error;
using otkit::testing::TwoByTwo;

TEST_SUITE("aam") {
  TEST_CASE("objective at the origin and under shifts") {
    const double gamma = 0.4;
    const DiscreteMeasure u = DiscreteMeasure::uniform(3);
    const CostMatrix zero(Matrix::Zero(3, 3));
    CHECK(dual_objective_lip(DualPotentials::zeros(3), zero, gamma, u, u) ==
          doctest::Approx(2.0 * gamma * std::log(3.0)));

    const auto inst = instances::random_ot(6, 51);
    instances::Engine rng(52);
    std::normal_distribution<double> normal;
    DualPotentials pot{Vector(6), Vector(6)};
    for (auto& x : pot.u) x = normal(rng);
    for (auto& x : pot.v) x = normal(rng);
    const double base = dual_objective_lip(pot, inst.cost, 0.2, inst.p, inst.q);
    DualPotentials shifted = pot;
    shifted.u.array() += 3.5;
    shifted.v.array() -= 1.25;
    CHECK(dual_objective_lip(shifted, inst.cost, 0.2, inst.p, inst.q) ==
          doctest::Approx(base).epsilon(1e-12));
  }

  TEST_CASE("gradient at the origin with zero cost") {
    const double gamma = 0.3;
    const DiscreteMeasure u = DiscreteMeasure::uniform(4);
    const DiscreteMeasure q = otkit::testing::measure({0.1, 0.2, 0.3, 0.4});
    const CostMatrix zero(Matrix::Zero(4, 4));
    const auto [gu, gv] = dual_partial_gradients(DualPotentials::zeros(4), zero, gamma, u, q);
    CHECK(gu.cwiseAbs().maxCoeff() < 1e-16);
    // d/dv of gamma (ln 1^T B 1 - <v, q>) at B = 1 1^T is gamma (1/n - q).
    CHECK((gv - gamma * (Vector::Constant(4, 0.25) - q.weights())).cwiseAbs().maxCoeff() < 1e-15);
  }

  TEST_CASE("gradient vanishes where the row marginal matches") {
    const auto inst = instances::random_ot(5, 53);
    const DualPotentials pot{inst.p.weights().array().log().matrix(), Vector::Zero(5)};
    const CostMatrix zero(Matrix::Zero(5, 5));
    const auto [gu, gv] = dual_partial_gradients(pot, zero, 0.5, inst.p, inst.q);
    CHECK(gu.cwiseAbs().maxCoeff() < 1e-15);
  }

  TEST_CASE("gradient matches finite differences") {
    const auto inst = instances::random_ot(6, 54);
    const double gamma = 0.1 * inst.cost.inf_norm();
    const OtDualObjective objective(inst.cost, gamma, inst.p, inst.q);
    instances::Engine rng(55);
    std::normal_distribution<double> normal;
    for (int trial = 0; trial < 10; ++trial) {
      Vector x(12);
      for (auto& xi : x) xi = normal(rng);
      const Vector numeric = numeric_gradient([&](const Vector& y) { return objective.value(y); }, x);
      CHECK(relative_error(objective.gradient(x), numeric) <= 1e-5);
    }
  }

  TEST_CASE("first step size") {
    const auto inst = instances::random_ot(8, 56);
    const double gamma = 0.1 * inst.cost.inf_norm();
    const OtDualObjective objective(inst.cost, gamma, inst.p, inst.q);
    const AamState s0 = aam_init(objective);
    const AamState s1 = aam_iterate(s0, objective);
    const Vector origin = Vector::Zero(16);
    const double expected =
        2.0 * (objective.value(origin) - s1.phi_eta) / objective.gradient(origin).squaredNorm();
    CHECK(s1.last_a == doctest::Approx(expected).epsilon(1e-12));
    CHECK(s1.A_big == s1.last_a);
  }

  TEST_CASE("iterates on random instances") {
    for (std::uint64_t seed : {57u, 58u, 59u}) {
      const auto inst = instances::random_ot(8, seed);
      const double gamma = 0.1 * inst.cost.inf_norm();
      const OtDualObjective objective(inst.cost, gamma, inst.p, inst.q);
      AamState s = aam_init(objective);
      double phi = objective.value(s.eta);
      double big_a = s.A_big;
      for (int k = 0; k < 200; ++k) {
        s = aam_iterate(s, objective);
        CHECK(std::abs(s.last_residual) <= 1e-10 * std::max(1.0, std::abs(s.phi_eta)));
        CHECK(s.phi_eta <= phi + 1e-12);
        CHECK(s.A_big >= big_a);
        CHECK((s.plan_avg[0].array() >= 0.0).all());
        CHECK(s.plan_avg[0].sum() == doctest::Approx(1.0).epsilon(1e-12));
        phi = s.phi_eta;
        big_a = s.A_big;
      }
    }
  }

  TEST_CASE("normalization shift leaves the trajectory unchanged") {
    for (std::uint64_t seed : {60u, 64u, 65u}) {
      const auto inst = instances::random_ot(8, seed);
      const double gamma = 0.1 * inst.cost.inf_norm();
      const OtDualObjective objective(inst.cost, gamma, inst.p, inst.q);
      AamOptions plain;
      plain.normalize_shift = false;
      AamState shifted = aam_init(objective);
      AamState raw = shifted;
      int compared = 0;
      for (int k = 0; k < 200; ++k) {
        shifted = aam_iterate(shifted, objective);
        raw = aam_iterate(raw, objective, plain);
        CHECK(std::abs(objective.value(shifted.eta) - objective.value(raw.eta)) <= 1e-12);
        // Once phi stops decreasing by more than its rounding error the step
        // size equation is solved from noise, and two runs drift apart.
        const double decrease = objective.value(shifted.mu) - shifted.phi_eta;
        if (decrease <= 1e-9 * std::abs(shifted.phi_eta)) break;
        CHECK(std::abs(shifted.last_beta - raw.last_beta) <= 1e-9);
        CHECK(otkit::testing::max_abs_diff(shifted.plan_avg[0], raw.plan_avg[0]) <= 1e-9);
        ++compared;
      }
      CHECK(compared >= 10);
    }
  }

  TEST_CASE("normalization keeps value, gradient and plans") {
    const auto inst = instances::random_ot(6, 66);
    const OtDualObjective objective(inst.cost, 0.2, inst.p, inst.q);
    instances::Engine rng(67);
    std::normal_distribution<double> normal(0.0, 5.0);
    for (int trial = 0; trial < 10; ++trial) {
      Vector x(12);
      for (auto& xi : x) xi = normal(rng);
      Vector y = x;
      objective.normalize(y);
      CHECK(y.head(6).maxCoeff() == 0.0);
      CHECK(y.tail(6).maxCoeff() == 0.0);
      CHECK(objective.value(y) == doctest::Approx(objective.value(x)).epsilon(1e-13));
      CHECK((objective.gradient(y) - objective.gradient(x)).cwiseAbs().maxCoeff() <= 1e-13);
      CHECK(otkit::testing::max_abs_diff(objective.coupled_plans(y)[0], objective.coupled_plans(x)[0]) <= 1e-14);
    }
  }

  TEST_CASE("duality gap and feasibility envelopes") {
    const auto inst = instances::random_ot(8, 61);
    const double gamma = 0.1 * inst.cost.inf_norm();
    const OtDualObjective objective(inst.cost, gamma, inst.p, inst.q);
    const double d = distance_bound(inst.cost, gamma, inst.p, inst.q);
    AamState s = aam_init(objective);
    for (long t = 1; t <= 300; ++t) {
      s = aam_iterate(s, objective);
      const Matrix& plan = s.plan_avg[0];
      const double g = regularized_cost(plan, inst.cost, gamma);
      const double t2 = static_cast<double>(t * t);
      const double violation = (Vector(plan.rowwise().sum()) - inst.p.weights()).squaredNorm() +
                               (Vector(plan.colwise().sum().transpose()) - inst.q.weights()).squaredNorm();
      CHECK(std::abs(s.phi_eta + g) <= 32.0 * d * d / (gamma * t2));
      CHECK(std::sqrt(violation) <= 32.0 * d / (gamma * t2));
    }
  }

  TEST_CASE("regularized solve") {
    const TwoByTwo inst;
    const auto res = aam_solve(inst.cost, 0.05, inst.p, inst.q);
    CHECK_FALSE(res.trace.empty());
    CHECK(res.trace.column("gap").back() <= 1e-7);
  }

  TEST_CASE("accelerated OT on the two by two instance") {
    const TwoByTwo inst;
    const auto res = accelerated_ot(inst.cost, inst.p, inst.q, 0.05);
    const double cost = transport_cost(res.plan.entries, inst.cost);
    CHECK(cost >= 0.3 - 1e-12);
    CHECK(cost <= 0.35);
    CHECK(marginal_violation(res.plan.entries, inst.p, inst.q) < 1e-12);
  }

  TEST_CASE("accelerated OT with zero cost stops at once") {
    const auto inst = instances::random_ot(6, 62);
    const auto res = accelerated_ot(CostMatrix(Matrix::Zero(6, 6)), inst.p, inst.q, 0.1);
    CHECK(res.report.objective == 0.0);
    CHECK(res.report.iterations <= 1);
  }

  TEST_CASE("accelerated OT is within eps of the LP") {
    const auto inst = instances::random_ot(12, 63);
    const double eps = 0.1 * inst.cost.inf_norm();
    const auto res = accelerated_ot(inst.cost, inst.p, inst.q, eps);
    const double lp = exact_ot_lp(inst.cost, inst.p, inst.q).objective;
    CHECK(res.report.objective - lp <= eps);
    CHECK(res.report.objective >= lp - 1e-12);
  }
}
