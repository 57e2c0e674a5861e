#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <set>
#include <utility>
#include <vector>

#include "otkit/core.hpp"
#include "otkit/report.hpp"

namespace otkit {

struct CommunicationGraph {
  int m = 0;
  std::vector<std::pair<int, int>> edges;  // unordered pairs stored as (min, max), sorted
  Matrix laplacian;                        // degree on the diagonal, -1 per edge
  std::vector<std::vector<int>> neighbors;

  /// True for j == i or an edge (i, j).
  bool can_read(int reader, int target) const;
};

/// Builds the Laplacian of an undirected graph. Duplicate edges collapse.
/// Throws InputError on out-of-range ids or self-loops, and on disconnected
/// graphs ("graph must be connected").
CommunicationGraph graph_laplacian(int m, const std::vector<std::pair<int, int>>& edges);

/// lambda_max(W) / lambda_min^+(W). A single node has no positive eigenvalue
/// and reports 1.
double condition_number(const CommunicationGraph& graph);
double max_eigenvalue(const CommunicationGraph& graph);

struct NodeState {
  int node_id = 0;
  DiscreteMeasure p_local;
  Vector u_local;
  Vector q_local;  // gradient of W*_{gamma, p_i} at m * u_i
  long round = 0;
};

struct SimConfig {
  double gamma = 0.0;
  std::optional<double> step_L;  // default m * lambda_max(W) / gamma
  long rounds = 0;
  bool stochastic = false;
  std::uint64_t seed = 0;
  int batch = 1;
};

/// Records every cross-node read the simulator performs.
struct AccessLog {
  long reads = 0;
  long messages = 0;
  std::set<std::pair<int, int>> pairs;  // (reader, target)
};

/// A node's window onto the previous round: only itself and its graph
/// neighbours are readable. Any other read raises ProtocolError.
class NeighborView {
 public:
  NeighborView(const CommunicationGraph& graph, const std::vector<NodeState>& snapshot, int reader,
               AccessLog* log);

  const Vector& q(int target) const;

 private:
  const CommunicationGraph* graph_;
  const std::vector<NodeState>* snapshot_;
  int reader_;
  AccessLog* log_;
};

/// Stochastic estimate of grad W*_{gamma,p}(u): draw column xi ~ p and return
/// its softmax. Unbiased.
Vector stochastic_dual_gradient(const Vector& u, const DiscreteMeasure& p, const CostMatrix& cost,
                                double gamma, std::mt19937_64& rng);

/// Full or batched-stochastic local gradient at m * u_i.
struct LocalGradient {
  bool stochastic = false;
  int batch = 1;
  std::mt19937_64* rng = nullptr;
};

Vector local_gradient(const NodeState& node, std::size_t m, const CostMatrix& cost, double gamma,
                      const LocalGradient& oracle);

/// Initial node states: u_i = 0 and q_i from the oracle.
std::vector<NodeState> init_nodes(const std::vector<DiscreteMeasure>& measures,
                                  const CostMatrix& cost, double gamma, const LocalGradient& oracle);

/// One synchronous round: u_i <- u_i - (1/L) sum_j W_ij q_j, reading q_j only
/// through NeighborView, then recompute q_i. Throws ProtocolError when the
/// states are not all from the same round.
std::vector<NodeState> decentralized_dual_step(const std::vector<NodeState>& states,
                                               const CommunicationGraph& graph,
                                               const CostMatrix& cost, double gamma, double step_L,
                                               const LocalGradient& oracle = {},
                                               AccessLog* log = nullptr);

/// max_{i,j} ||q_i - q_j||_1.
double consensus_error(const std::vector<NodeState>& states);
/// (1/m) sum_i W*_{gamma, p_i}(m u_i).
double decentralized_dual_value(const std::vector<NodeState>& states, const CostMatrix& cost,
                                double gamma);

struct DecentralizedResult {
  std::vector<NodeState> nodes;
  SolveReport report;  // trace: round, consensus_error, dual_value, messages
  AccessLog access;
};

/// Called after round 0 and every round; returning false stops the simulation.
using RoundObserver = std::function<bool(long, const std::vector<NodeState>&)>;

DecentralizedResult simulate_decentralized_barycenter(const std::vector<DiscreteMeasure>& measures,
                                                      const CostMatrix& cost,
                                                      const CommunicationGraph& graph,
                                                      const SimConfig& config,
                                                      const RoundObserver& observer = {});

}  // namespace otkit
