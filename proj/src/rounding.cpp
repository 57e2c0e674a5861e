#include "otkit/rounding.hpp"

#include <algorithm>

namespace otkit {

namespace {

// min(target / current, 1) with 0/0 := 1.
double shrink_factor(double target, double current) {
  if (current <= 0.0) return 1.0;
  return std::min(target / current, 1.0);
}

}  // namespace

TransportPlan round_to_polytope(const Matrix& plan, const DiscreteMeasure& p,
                                const DiscreteMeasure& q) {
  require_same_size(plan.rows(), p.size(), "round_to_polytope rows");
  require_same_size(plan.cols(), q.size(), "round_to_polytope cols");
  if ((plan.array() < 0.0).any()) throw DomainError("round_to_polytope: negative plan entry");

  const Eigen::Index n = plan.rows();
  const Eigen::Index k = plan.cols();

  Matrix f = plan;
  const Vector rows = f.rowwise().sum();
  for (Eigen::Index i = 0; i < n; ++i) f.row(i) *= shrink_factor(p[i], rows[i]);
  const Vector cols = f.colwise().sum().transpose();
  for (Eigen::Index j = 0; j < k; ++j) f.col(j) *= shrink_factor(q[j], cols[j]);

  // Both error vectors are nonnegative after the two shrink passes.
  const Vector err_p = (p.weights() - f.rowwise().sum()).cwiseMax(0.0);
  const Vector err_q = (q.weights() - f.colwise().sum().transpose()).cwiseMax(0.0);
  const double mass_p = err_p.sum();
  const double mass_q = err_q.sum();

  if (mass_p > 0.0) {
    f.noalias() += err_p * err_q.transpose() / mass_p;
  } else if (mass_q > 0.0) {
    // Only reachable through floating-point imbalance; spread along p.
    f.noalias() += p.weights() * err_q.transpose();
  }

  TransportPlan out;
  out.entries = std::move(f);
  out.feasible_for = std::make_pair(p.weights(), q.weights());
  return out;
}

}  // namespace otkit
