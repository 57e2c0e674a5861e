#include "doctest.h"
#include "otkit/instances.hpp"
#include "otkit/rounding.hpp"
#include "support.hpp"

using namespace otkit;
using otkit::testing::mat;
using otkit::testing::max_abs_diff;

TEST_SUITE("rounding") {
  TEST_CASE("hand-executed example") {
    const DiscreteMeasure half = DiscreteMeasure::uniform(2);
    const TransportPlan out = round_to_polytope(mat({{0.5, 0.1}, {0.1, 0.3}}), half, half);
    const Matrix expected = mat({{0.403226, 0.096774}, {0.096774, 0.403226}});
    CHECK(max_abs_diff(out.entries, expected) < 1e-6);
    CHECK(out.feasible_for.has_value());
  }

  TEST_CASE("feasible input is returned unchanged") {
    const auto inst = instances::random_ot(5, 41);
    const Matrix plan = inst.p.weights() * inst.q.weights().transpose();
    const TransportPlan out = round_to_polytope(plan, inst.p, inst.q);
    CHECK(max_abs_diff(out.entries, plan) < 1e-16);
  }

  TEST_CASE("output is feasible and moves at most the violation") {
    instances::Engine rng(42);
    for (int trial = 0; trial < 50; ++trial) {
      const DiscreteMeasure p = instances::random_measure(8, rng);
      const DiscreteMeasure q = instances::random_measure(8, rng);
      const Matrix plan = instances::random_plan(8, rng);
      const TransportPlan out = round_to_polytope(plan, p, q);
      CHECK((out.entries.array() >= 0.0).all());
      CHECK(marginal_violation(out.entries, p, q) < 1e-12);
      CHECK((out.entries - plan).lpNorm<1>() <= marginal_violation(plan, p, q) + 1e-12);
    }
  }

  TEST_CASE("dimension mismatch") {
    const DiscreteMeasure half = DiscreteMeasure::uniform(2);
    CHECK_THROWS_AS(round_to_polytope(Matrix::Constant(3, 3, 1.0 / 9.0), half, half), DimensionError);
  }
}
