#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "otkit/core.hpp"

namespace otkit::instances {

/// Random problem data for tests and the acceptance harness. Every generator
/// draws from the engine it is handed, so a seed fixes the whole instance.
using Engine = std::mt19937_64;

/// Weights uniform on [0.05, 1], normalized. Strictly positive.
DiscreteMeasure random_measure(Eigen::Index n, Engine& rng);

/// Squared Euclidean distances between n uniform points of the unit square.
/// Symmetric with a zero diagonal.
CostMatrix random_cost(Eigen::Index n, Engine& rng);

/// Nonnegative n x n matrix of total mass 1; a fraction of entries is zeroed.
Matrix random_plan(Eigen::Index n, Engine& rng, double zero_fraction = 0.2);

struct OtInstance {
  CostMatrix cost;
  DiscreteMeasure p;
  DiscreteMeasure q;
};
OtInstance random_ot(Eigen::Index n, std::uint64_t seed);

struct BarycenterInstance {
  CostMatrix cost;
  std::vector<DiscreteMeasure> measures;
};
BarycenterInstance random_barycenter(Eigen::Index n, std::size_t m, std::uint64_t seed);

}  // namespace otkit::instances
