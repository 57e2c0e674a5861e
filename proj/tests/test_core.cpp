#include <cmath>
#include <vector>

#include "doctest.h"
#include "otkit/core.hpp"
#include "otkit/instances.hpp"
#include "support.hpp"

using namespace otkit;
using otkit::testing::mat;
using otkit::testing::measure;
using otkit::testing::vec;

TEST_SUITE("core") {
  TEST_CASE("logsumexp") {
    const std::vector<double> zeros{0.0, 0.0};
    CHECK(logsumexp(zeros) == doctest::Approx(std::log(2.0)).epsilon(1e-15));

    const std::vector<double> big{1000.0, 1000.0};
    const double value = logsumexp(big);
    CHECK(std::isfinite(value));
    CHECK(value == doctest::Approx(1000.0 + std::log(2.0)).epsilon(1e-15));

    const std::vector<double> half{0.5, 0.5};
    CHECK(std::abs(logsumexp(zeros, half)) < 1e-15);

    CHECK_THROWS_WITH_AS(logsumexp(std::vector<double>{}), "empty reduction", DomainError);
    CHECK_THROWS(logsumexp(zeros, std::vector<double>{1.0}));
  }

  TEST_CASE("logsumexp is shift covariant") {
    instances::Engine rng(11);
    std::uniform_real_distribution<double> unif(-50.0, 50.0);
    for (int trial = 0; trial < 20; ++trial) {
      Vector x(7);
      for (auto& xi : x) xi = unif(rng);
      const double c = unif(rng);
      CHECK(logsumexp(Vector(x.array() + c)) == doctest::Approx(logsumexp(x) + c).epsilon(1e-13));
    }
  }

  TEST_CASE("scaling matrix") {
    const double gamma = 0.3;
    const CostMatrix zero(Matrix::Zero(2, 2));
    CHECK(scaling_matrix(DualPotentials::zeros(2), zero, gamma).isApprox(Matrix::Ones(2, 2)));

    const CostMatrix flat(Matrix::Constant(3, 3, gamma));
    const Matrix b = scaling_matrix(DualPotentials::zeros(3), flat, gamma);
    CHECK((b.array() - std::exp(-1.0)).abs().maxCoeff() < 1e-15);

    const DualPotentials pot{vec({std::log(2.0), 0.0}), Vector::Zero(2)};
    CHECK(otkit::testing::max_abs_diff(scaling_matrix(pot, zero, gamma), mat({{2, 2}, {1, 1}})) < 1e-14);

    CHECK_THROWS_AS(scaling_matrix(pot, zero, 0.0), ParameterError);
  }

  TEST_CASE("normalized scaling matrix survives large potentials") {
    const CostMatrix zero(Matrix::Zero(2, 2));
    const DualPotentials pot{vec({800.0, 800.0}), vec({0.0, 0.0})};
    const Matrix b = normalized_scaling_matrix(pot, zero, 1.0);
    CHECK(b.allFinite());
    CHECK(b.sum() == doctest::Approx(1.0));
  }

  TEST_CASE("negative entropy") {
    CHECK(neg_entropy(Matrix::Constant(2, 2, 0.25)) == doctest::Approx(-2.0 * std::log(2.0)));
    CHECK(neg_entropy(mat({{1, 0}, {0, 0}})) == 0.0);
    CHECK(neg_entropy(mat({{0.5, 0}, {0, 0.5}})) == doctest::Approx(-std::log(2.0)));
    CHECK_THROWS_AS((neg_entropy(mat({{-0.1, 0}, {0, 1.1}}))), DomainError);
  }

  TEST_CASE("negative entropy stays in [-2 ln n, 0] on the polytope") {
    instances::Engine rng(12);
    for (int trial = 0; trial < 20; ++trial) {
      const DiscreteMeasure p = instances::random_measure(6, rng);
      const DiscreteMeasure q = instances::random_measure(6, rng);
      const Matrix plan = p.weights() * q.weights().transpose();
      const double h = neg_entropy(plan);
      CHECK(h <= 0.0);
      CHECK(h >= -2.0 * std::log(6.0));
    }
  }

  TEST_CASE("kl divergence") {
    const Matrix quarter = Matrix::Constant(2, 2, 0.25);
    const Matrix half = Matrix::Constant(2, 2, 0.5);
    CHECK(kl_divergence(quarter, quarter) == 0.0);
    CHECK(kl_divergence(quarter, half) == doctest::Approx(1.0 - std::log(2.0)));
    CHECK(kl_divergence(half, quarter) == doctest::Approx(2.0 * std::log(2.0) - 1.0));
    CHECK_THROWS_AS((kl_divergence(half, mat({{0.5, 0}, {0.5, 0.5}}))), DomainError);
  }

  TEST_CASE("kl divergence is nonnegative") {
    instances::Engine rng(13);
    std::uniform_real_distribution<double> unif(0.01, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
      Matrix a(4, 4);
      Matrix b(4, 4);
      for (auto& x : a.reshaped()) x = unif(rng);
      for (auto& x : b.reshaped()) x = unif(rng);
      CHECK(kl_divergence(a, b) >= 0.0);
    }
  }

  TEST_CASE("marginal violation") {
    const DiscreteMeasure u = DiscreteMeasure::uniform(2);
    CHECK(marginal_violation(Matrix::Constant(2, 2, 0.25), u, u) == 0.0);
    CHECK(marginal_violation(mat({{0.5, 0.1}, {0.1, 0.3}}), u, u) == doctest::Approx(0.4));
    CHECK(marginal_violation(Matrix::Zero(2, 2), u, u) == doctest::Approx(2.0));
  }

  TEST_CASE("transport cost") {
    const CostMatrix swap(mat({{0, 1}, {1, 0}}));
    CHECK(transport_cost(mat({{0.3, 0}, {0.3, 0.4}}), swap) == doctest::Approx(0.3));
    CHECK(transport_cost(mat({{0.2, 0}, {0, 0.8}}), swap) == 0.0);
    CHECK(transport_cost(Matrix::Constant(2, 2, 0.25), CostMatrix(Matrix::Zero(2, 2))) == 0.0);
  }

  TEST_CASE("smoothing") {
    const DiscreteMeasure point = measure({1.0, 0.0});
    const DiscreteMeasure s = smooth_measure(point, 0.8, 8.0);
    CHECK(s[0] == doctest::Approx(0.945 / 0.99));
    CHECK(s[1] == doctest::Approx(0.045 / 0.99));

    const DiscreteMeasure u = DiscreteMeasure::uniform(5);
    const auto [pu, qu] = smooth_marginals(u, u, 1.3);
    CHECK((pu.weights() - u.weights()).cwiseAbs().maxCoeff() < 1e-15);

    instances::Engine rng(14);
    for (double eps_prime : {1.5, 0.3, 1e-3}) {
      const DiscreteMeasure p = instances::random_measure(10, rng);
      const DiscreteMeasure q = instances::random_measure(10, rng);
      const auto [ps, qs] = smooth_marginals(p, q, eps_prime);
      CHECK(ps.weights().sum() == doctest::Approx(1.0).epsilon(1e-14));
      CHECK(ps.min() >= (1.0 - eps_prime / 8.0) * eps_prime / 80.0);
      CHECK((ps.weights() - p.weights()).lpNorm<1>() <= eps_prime / 4.0);
      CHECK((qs.weights() - q.weights()).lpNorm<1>() <= eps_prime / 4.0);
    }
  }

  TEST_CASE("regularization params") {
    CHECK_NOTHROW(RegularizationParams{0.1, 0.2, 0.5}.validate());
    CHECK_THROWS_AS((RegularizationParams{0.0, 0.2, 0.5}.validate()), ParameterError);
    CHECK_THROWS_AS((RegularizationParams{0.1, 0.2, 2.0}.validate()), ParameterError);
  }

  TEST_CASE("cost matrix validation") {
    CHECK_THROWS_AS((CostMatrix(mat({{0, 1}, {2, 0}}))), InputError);
    CHECK_NOTHROW(CostMatrix(mat({{0, 1}, {2, 0}}), true));
    CHECK_THROWS_AS((CostMatrix(mat({{0, -1}, {-1, 0}}))), InputError);
    CHECK_THROWS_AS(CostMatrix(Matrix::Zero(2, 3)), InputError);
    CHECK(CostMatrix(mat({{0, 3}, {3, 0}})).inf_norm() == 3.0);
  }

  TEST_CASE("discrete measure normalizes") {
    const DiscreteMeasure p(vec({2.0, 6.0}));
    CHECK(p[0] == doctest::Approx(0.25));
    CHECK(p[1] == doctest::Approx(0.75));
    CHECK_THROWS(DiscreteMeasure(vec({1.0, -1.0, 1.0})));
  }
}
