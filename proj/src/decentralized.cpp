#include "otkit/decentralized.hpp"

#include <algorithm>
#include <queue>
#include <string>

#include "otkit/barycenter.hpp"

namespace otkit {

bool CommunicationGraph::can_read(int reader, int target) const {
  if (reader == target) return true;
  const auto& adj = neighbors.at(static_cast<std::size_t>(reader));
  return std::binary_search(adj.begin(), adj.end(), target);
}

CommunicationGraph graph_laplacian(int m, const std::vector<std::pair<int, int>>& edges) {
  if (m <= 0) throw InputError("graph needs at least one node");
  CommunicationGraph g;
  g.m = m;
  std::set<std::pair<int, int>> unique;
  for (auto [a, b] : edges) {
    if (a < 0 || b < 0 || a >= m || b >= m) {
      throw InputError("edge (" + std::to_string(a) + ", " + std::to_string(b) +
                       ") references a node outside [0, " + std::to_string(m) + ")");
    }
    if (a == b) throw InputError("self-loop at node " + std::to_string(a));
    unique.emplace(std::min(a, b), std::max(a, b));
  }
  g.edges.assign(unique.begin(), unique.end());
  g.neighbors.assign(static_cast<std::size_t>(m), {});
  g.laplacian = Matrix::Zero(m, m);
  for (auto [a, b] : g.edges) {
    g.laplacian(a, b) = -1.0;
    g.laplacian(b, a) = -1.0;
    g.laplacian(a, a) += 1.0;
    g.laplacian(b, b) += 1.0;
    g.neighbors[static_cast<std::size_t>(a)].push_back(b);
    g.neighbors[static_cast<std::size_t>(b)].push_back(a);
  }
  for (auto& adj : g.neighbors) std::sort(adj.begin(), adj.end());

  std::vector<bool> seen(static_cast<std::size_t>(m), false);
  std::queue<int> frontier;
  frontier.push(0);
  seen[0] = true;
  int reached = 1;
  while (!frontier.empty()) {
    const int node = frontier.front();
    frontier.pop();
    for (int next : g.neighbors[static_cast<std::size_t>(node)]) {
      if (!seen[static_cast<std::size_t>(next)]) {
        seen[static_cast<std::size_t>(next)] = true;
        ++reached;
        frontier.push(next);
      }
    }
  }
  if (reached != m) throw InputError("graph must be connected");
  return g;
}

namespace {

Vector laplacian_spectrum(const CommunicationGraph& graph) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(graph.laplacian, Eigen::EigenvaluesOnly);
  return solver.eigenvalues();
}

}  // namespace

double max_eigenvalue(const CommunicationGraph& graph) { return laplacian_spectrum(graph).maxCoeff(); }

double condition_number(const CommunicationGraph& graph) {
  const Vector eig = laplacian_spectrum(graph);
  const double top = eig.maxCoeff();
  const double cutoff = 1e-9 * std::max(top, 1.0);
  double smallest_positive = 0.0;
  for (Eigen::Index k = 0; k < eig.size(); ++k) {
    if (eig[k] > cutoff && (smallest_positive == 0.0 || eig[k] < smallest_positive)) {
      smallest_positive = eig[k];
    }
  }
  if (smallest_positive == 0.0) return 1.0;
  return top / smallest_positive;
}

NeighborView::NeighborView(const CommunicationGraph& graph, const std::vector<NodeState>& snapshot,
                           int reader, AccessLog* log)
    : graph_(&graph), snapshot_(&snapshot), reader_(reader), log_(log) {}

const Vector& NeighborView::q(int target) const {
  if (target < 0 || target >= graph_->m || !graph_->can_read(reader_, target)) {
    throw ProtocolError("node " + std::to_string(reader_) + " attempted to read non-neighbour " +
                        std::to_string(target));
  }
  if (log_ != nullptr) {
    ++log_->reads;
    log_->pairs.emplace(reader_, target);
  }
  return (*snapshot_)[static_cast<std::size_t>(target)].q_local;
}

Vector stochastic_dual_gradient(const Vector& u, const DiscreteMeasure& p, const CostMatrix& cost,
                                double gamma, std::mt19937_64& rng) {
  require_same_size(p.size(), cost.size(), "stochastic_dual_gradient p");
  std::discrete_distribution<Eigen::Index> draw(p.weights().data(),
                                                p.weights().data() + p.weights().size());
  return softmax_column(u, cost, gamma, draw(rng));
}

Vector local_gradient(const NodeState& node, std::size_t m, const CostMatrix& cost, double gamma,
                      const LocalGradient& oracle) {
  const Vector arg = static_cast<double>(m) * node.u_local;
  if (!oracle.stochastic) return fenchel_dual_gradient(arg, node.p_local, cost, gamma);
  if (oracle.rng == nullptr) throw ParameterError("stochastic gradients need a random generator");
  if (oracle.batch < 1) throw ParameterError("batch must be at least 1");
  Vector acc = Vector::Zero(cost.size());
  for (int b = 0; b < oracle.batch; ++b) {
    acc += stochastic_dual_gradient(arg, node.p_local, cost, gamma, *oracle.rng);
  }
  return acc / static_cast<double>(oracle.batch);
}

std::vector<NodeState> init_nodes(const std::vector<DiscreteMeasure>& measures,
                                  const CostMatrix& cost, double gamma, const LocalGradient& oracle) {
  std::vector<NodeState> nodes;
  nodes.reserve(measures.size());
  for (std::size_t i = 0; i < measures.size(); ++i) {
    require_same_size(measures[i].size(), cost.size(), "node measure");
    NodeState node;
    node.node_id = static_cast<int>(i);
    node.p_local = measures[i];
    node.u_local = Vector::Zero(cost.size());
    nodes.push_back(std::move(node));
  }
  for (auto& node : nodes) node.q_local = local_gradient(node, nodes.size(), cost, gamma, oracle);
  return nodes;
}

std::vector<NodeState> decentralized_dual_step(const std::vector<NodeState>& states,
                                               const CommunicationGraph& graph,
                                               const CostMatrix& cost, double gamma, double step_L,
                                               const LocalGradient& oracle, AccessLog* log) {
  require_positive_gamma(gamma);
  if (!(step_L > 0.0)) throw ParameterError("step constant L must be positive");
  if (states.size() != static_cast<std::size_t>(graph.m)) {
    throw DimensionError("node count differs from graph size");
  }
  const long round = states.front().round;
  for (std::size_t i = 0; i < states.size(); ++i) {
    if (states[i].node_id != static_cast<int>(i)) throw ProtocolError("node ids out of order");
    if (states[i].round != round) {
      throw ProtocolError("stale state: node " + std::to_string(i) + " is at round " +
                          std::to_string(states[i].round) + ", expected " + std::to_string(round));
    }
  }

  // Every node reads the immutable round-k snapshot and writes round k+1.
  std::vector<NodeState> next = states;
  for (int i = 0; i < graph.m; ++i) {
    const NeighborView view(graph, states, i, log);
    Vector mixed = graph.laplacian(i, i) * view.q(i);
    for (int j : graph.neighbors[static_cast<std::size_t>(i)]) mixed += graph.laplacian(i, j) * view.q(j);
    auto& node = next[static_cast<std::size_t>(i)];
    node.u_local -= mixed / step_L;
    node.round = round + 1;
  }
  for (auto& node : next) node.q_local = local_gradient(node, next.size(), cost, gamma, oracle);
  if (log != nullptr) log->messages += static_cast<long>(graph.edges.size());
  return next;
}

double consensus_error(const std::vector<NodeState>& states) {
  double worst = 0.0;
  for (std::size_t i = 0; i < states.size(); ++i) {
    for (std::size_t j = i + 1; j < states.size(); ++j) {
      worst = std::max(worst, (states[i].q_local - states[j].q_local).lpNorm<1>());
    }
  }
  return worst;
}

double decentralized_dual_value(const std::vector<NodeState>& states, const CostMatrix& cost,
                                double gamma) {
  const double m = static_cast<double>(states.size());
  double acc = 0.0;
  for (const auto& node : states) acc += fenchel_dual_ot(m * node.u_local, node.p_local, cost, gamma);
  return acc / m;
}

DecentralizedResult simulate_decentralized_barycenter(const std::vector<DiscreteMeasure>& measures,
                                                      const CostMatrix& cost,
                                                      const CommunicationGraph& graph,
                                                      const SimConfig& config,
                                                      const RoundObserver& observer) {
  if (measures.size() != static_cast<std::size_t>(graph.m)) {
    throw InputError("need one measure per graph node (" + std::to_string(graph.m) + "), got " +
                     std::to_string(measures.size()));
  }
  require_positive_gamma(config.gamma);
  if (config.rounds < 0) throw ParameterError("rounds must be nonnegative");

  const double m = static_cast<double>(graph.m);
  const double step_L = config.step_L.value_or(m * max_eigenvalue(graph) / config.gamma);
  // A single node has W = 0 and nothing to communicate; any positive L is inert.
  const double effective_L = step_L > 0.0 ? step_L : 1.0;

  std::mt19937_64 rng(config.seed);
  LocalGradient oracle{config.stochastic, config.batch, config.stochastic ? &rng : nullptr};

  DecentralizedResult result;
  SolveReport& report = result.report;
  report.method = config.stochastic ? "decentralized-stochastic" : "decentralized";
  report.set_param("gamma", config.gamma);
  report.set_param("L", effective_L);
  report.set_param("rounds", static_cast<double>(config.rounds));
  report.set_param("m", m);
  report.set_param("n", static_cast<double>(cost.size()));
  report.set_param("chi", condition_number(graph));
  if (config.stochastic) report.set_param("batch", config.batch);
  report.trace = Trace({"round", "consensus_error", "dual_value", "messages"});

  std::vector<NodeState> nodes = init_nodes(measures, cost, config.gamma, oracle);
  auto record = [&](long round) {
    report.trace.push({static_cast<double>(round), consensus_error(nodes),
                       decentralized_dual_value(nodes, cost, config.gamma),
                       static_cast<double>(result.access.messages)});
    return !observer || observer(round, nodes);
  };
  long done = 0;
  if (record(0)) {
    for (long r = 1; r <= config.rounds; ++r) {
      nodes = decentralized_dual_step(nodes, graph, cost, config.gamma, effective_L, oracle,
                                      &result.access);
      done = r;
      if (!record(r)) break;
    }
  }

  report.iterations = done;
  report.certificate = consensus_error(nodes);
  report.regularized_objective = -decentralized_dual_value(nodes, cost, config.gamma);
  result.nodes = std::move(nodes);
  return result;
}

}  // namespace otkit
