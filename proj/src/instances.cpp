#include "otkit/instances.hpp"

namespace otkit::instances {

DiscreteMeasure random_measure(Eigen::Index n, Engine& rng) {
  std::uniform_real_distribution<double> weight(0.05, 1.0);
  Vector w(n);
  for (Eigen::Index i = 0; i < n; ++i) w[i] = weight(rng);
  return DiscreteMeasure(std::move(w));
}

CostMatrix random_cost(Eigen::Index n, Engine& rng) {
  std::uniform_real_distribution<double> coord(0.0, 1.0);
  Matrix pts(n, 2);
  for (Eigen::Index i = 0; i < n; ++i) {
    pts(i, 0) = coord(rng);
    pts(i, 1) = coord(rng);
  }
  Matrix c(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) c(i, j) = (pts.row(i) - pts.row(j)).squaredNorm();
  }
  return CostMatrix(std::move(c));
}

Matrix random_plan(Eigen::Index n, Engine& rng, double zero_fraction) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Matrix m(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) m(i, j) = unit(rng) < zero_fraction ? 0.0 : unit(rng);
  }
  if (m.sum() == 0.0) m(0, 0) = 1.0;
  return m / m.sum();
}

OtInstance random_ot(Eigen::Index n, std::uint64_t seed) {
  Engine rng(seed);
  CostMatrix cost = random_cost(n, rng);
  DiscreteMeasure p = random_measure(n, rng);
  DiscreteMeasure q = random_measure(n, rng);
  return {std::move(cost), std::move(p), std::move(q)};
}

BarycenterInstance random_barycenter(Eigen::Index n, std::size_t m, std::uint64_t seed) {
  Engine rng(seed);
  BarycenterInstance out;
  out.cost = random_cost(n, rng);
  for (std::size_t l = 0; l < m; ++l) out.measures.push_back(random_measure(n, rng));
  return out;
}

}  // namespace otkit::instances
