#include "otkit/cli.hpp"

#include <chrono>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "otkit/aam.hpp"
#include "otkit/acceptance.hpp"
#include "otkit/barycenter.hpp"
#include "otkit/decentralized.hpp"
#include "otkit/io.hpp"
#include "otkit/oracle.hpp"
#include "otkit/rounding.hpp"
#include "otkit/sinkhorn.hpp"

namespace otkit::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

const char* to_string(Command command) {
  switch (command) {
    case Command::sinkhorn: return "sinkhorn";
    case Command::approx: return "approx";
    case Command::aam: return "aam";
    case Command::round: return "round";
    case Command::barycenter: return "barycenter";
    case Command::decentralized: return "decentralized";
    case Command::oracle: return "oracle";
    case Command::verify: return "verify";
  }
  return "unknown";
}

namespace {

void require_path(const std::optional<fs::path>& path, const char* flag, bool directory = false) {
  if (!path) throw InputError(std::string("missing required flag ") + flag);
  if (directory ? !fs::is_directory(*path) : !fs::exists(*path)) {
    throw InputError(std::string(directory ? "no such directory: " : "no such file: ") +
                     path->string());
  }
}

template <typename T>
const T& require_value(const std::optional<T>& value, const char* flag) {
  if (!value) throw InputError(std::string("missing required flag ") + flag);
  return *value;
}

// What a command produced, before it is written out.
struct Outcome {
  SolveReport report;
  std::vector<std::pair<std::string, Matrix>> matrices;
  std::vector<std::pair<std::string, Vector>> vectors;
};

class Runner {
 public:
  Runner(const RunManifest& m, std::ostream& err) : m_(m), err_(err) {}

  io::WarningSink warnings() const {
    if (m_.quiet) return {};
    return [this](const std::string& msg) { err_ << "warning: " << msg << '\n'; };
  }

  CostMatrix cost_matrix() const { return io::read_cost(*m_.cost, m_.allow_asymmetric); }

  DiscreteMeasure measure(const std::optional<fs::path>& path) const {
    return io::read_measure(*path, warnings());
  }

  Outcome sinkhorn() const {
    const CostMatrix cost = cost_matrix();
    const DiscreteMeasure p = measure(m_.source);
    const DiscreteMeasure q = measure(m_.target);
    const double gamma = require_value(m_.gamma, "--gamma");
    SinkhornOptions opts;
    opts.max_iter = m_.max_iter;
    const SinkhornResult res = sinkhorn_solve(cost, gamma, p, q, m_.tol, opts);
    Outcome out;
    SolveReport& r = out.report;
    r.method = "sinkhorn";
    r.objective = transport_cost(res.plan.entries, cost);
    r.regularized_objective = gamma - sinkhorn_dual_objective(res.state.pot, cost, gamma, p, q);
    r.certificate = reg_gap_certificate(res.state, cost, gamma, p, q);
    r.iterations = res.state.iteration;
    r.set_param("gamma", gamma);
    r.set_param("tol", m_.tol);
    r.set_param("R", radius_bound(cost, gamma, p, q));
    r.set_param("violation", res.state.last_violation);
    r.trace = res.trace;
    out.matrices.emplace_back("plan.csv", res.plan.entries);
    out.vectors.emplace_back("u.csv", res.state.pot.u);
    out.vectors.emplace_back("v.csv", res.state.pot.v);
    return out;
  }

  Outcome approx() const {
    const CostMatrix cost = cost_matrix();
    const DiscreteMeasure p = measure(m_.source);
    const DiscreteMeasure q = measure(m_.target);
    SinkhornOptions opts;
    opts.max_iter = m_.max_iter;
    auto res = approx_ot_sinkhorn(cost, p, q, require_value(m_.eps, "--eps"), m_.gamma, opts);
    Outcome out;
    out.report = std::move(res.report);
    out.matrices.emplace_back("plan.csv", res.plan.entries);
    return out;
  }

  Outcome aam() const {
    const CostMatrix cost = cost_matrix();
    const DiscreteMeasure p = measure(m_.source);
    const DiscreteMeasure q = measure(m_.target);
    Outcome out;
    if (!m_.eps) {
      // Regularized mode at the given gamma.
      const double gamma = require_value(m_.gamma, "--eps or --gamma");
      AamSolveOptions opts;
      if (m_.max_iter) opts.max_iter = *m_.max_iter;
      opts.gap_tol = m_.tol;
      opts.violation_tol = m_.tol;
      const AamSolveResult res = aam_solve(cost, gamma, p, q, opts);
      SolveReport& r = out.report;
      r.method = "aam-regularized";
      const Matrix& plan = res.state.plan_avg.front();
      r.objective = transport_cost(plan, cost);
      r.regularized_objective = -res.state.phi_eta;
      r.certificate = res.trace.rows.back()[2];
      r.iterations = res.state.iteration;
      r.set_param("gamma", gamma);
      r.set_param("tol", m_.tol);
      r.set_param("D", distance_bound(cost, gamma, p, q));
      r.trace = res.trace;
      out.matrices.emplace_back("plan.csv", plan);
      return out;
    }
    AcceleratedOtOptions opts;
    if (m_.max_iter) opts.max_iter = *m_.max_iter;
    auto res = accelerated_ot(cost, p, q, *m_.eps, m_.gamma, opts);
    out.report = std::move(res.report);
    out.matrices.emplace_back("plan.csv", res.plan.entries);
    return out;
  }

  Outcome round() const {
    const Matrix plan = io::read_matrix(*m_.plan);
    const DiscreteMeasure p = measure(m_.source);
    const DiscreteMeasure q = measure(m_.target);
    if (plan.rows() != p.size() || plan.cols() != q.size()) {
      throw DimensionError("plan is " + std::to_string(plan.rows()) + "x" +
                           std::to_string(plan.cols()) + " but the marginals have sizes " +
                           std::to_string(p.size()) + " and " + std::to_string(q.size()));
    }
    const TransportPlan rounded = round_to_polytope(plan, p, q);
    Outcome out;
    SolveReport& r = out.report;
    r.method = "round";
    r.certificate = marginal_violation(plan, p, q);
    if (m_.cost) {
      const CostMatrix cost = cost_matrix();
      require_same_size(cost.size(), p.size(), "cost");
      r.objective = transport_cost(rounded.entries, cost);
    }
    r.set_param("moved_l1", (rounded.entries - plan).cwiseAbs().sum());
    r.set_param("violation_after", marginal_violation(rounded.entries, p, q));
    out.matrices.emplace_back("plan.csv", rounded.entries);
    return out;
  }

  Outcome barycenter() const {
    const CostMatrix cost = cost_matrix();
    const auto measures = io::read_measures_dir(*m_.measures, warnings());
    const double eps = require_value(m_.eps, "--eps");
    BarycenterResult res;
    if (m_.method == "ibp") {
      IbpOptions opts;
      if (m_.max_iter) opts.max_iter = *m_.max_iter;
      res = barycenter_ibp(measures, cost, eps, m_.gamma, opts);
    } else if (m_.method == "aibp") {
      AcceleratedIbpOptions opts;
      if (m_.max_iter) opts.max_iter = *m_.max_iter;
      res = accelerated_ibp(measures, cost, eps, m_.gamma, opts);
    } else {
      throw InputError("--method must be ibp or aibp, got " + m_.method);
    }
    Outcome out;
    out.report = std::move(res.report);
    out.vectors.emplace_back("q_bar.csv", res.q_bar);
    for (std::size_t l = 0; l < res.plans.size(); ++l) {
      out.matrices.emplace_back("plan_" + std::to_string(l + 1) + ".csv", res.plans[l].entries);
    }
    return out;
  }

  Outcome decentralized() const {
    const CostMatrix cost = cost_matrix();
    const auto measures = io::read_measures_dir(*m_.measures, warnings());
    auto [nodes, edges] = io::read_edge_list(*m_.graph);
    nodes = std::max(nodes, static_cast<int>(measures.size()));
    const CommunicationGraph graph = graph_laplacian(nodes, edges);
    SimConfig config;
    config.gamma = require_value(m_.gamma, "--gamma");
    config.rounds = m_.rounds;
    config.step_L = m_.step_L;
    config.stochastic = m_.stochastic;
    config.seed = m_.seed;
    config.batch = m_.batch;
    auto res = simulate_decentralized_barycenter(measures, cost, graph, config);
    Outcome out;
    out.report = std::move(res.report);
    out.report.set_param("messages", static_cast<double>(res.access.messages));
    Matrix q(cost.size(), static_cast<Eigen::Index>(res.nodes.size()));
    for (std::size_t i = 0; i < res.nodes.size(); ++i) q.col(static_cast<Eigen::Index>(i)) = res.nodes[i].q_local;
    // No primal plan exists here; the regularized dual value stands in.
    out.report.objective = out.report.regularized_objective;
    out.vectors.emplace_back("q_bar.csv", q.rowwise().mean());
    out.matrices.emplace_back("q_nodes.csv", q);
    return out;
  }

  Outcome oracle() const {
    const CostMatrix cost = cost_matrix();
    Outcome out;
    SolveReport& r = out.report;
    if (m_.target_kind == "ot") {
      const auto res = exact_ot_lp(cost, measure(m_.source), measure(m_.target));
      r.method = "lp-ot";
      r.objective = res.objective;
      r.iterations = res.lp.pivots;
      out.matrices.emplace_back("plan.csv", res.plan);
    } else {
      const auto measures = io::read_measures_dir(*m_.measures, warnings());
      const auto res = exact_barycenter_lp(measures, cost);
      r.method = "lp-barycenter";
      r.objective = res.objective;
      r.iterations = res.lp.pivots;
      out.vectors.emplace_back("q_bar.csv", res.q);
      for (std::size_t l = 0; l < res.plans.size(); ++l) {
        out.matrices.emplace_back("plan_" + std::to_string(l + 1) + ".csv", res.plans[l]);
      }
    }
    r.regularized_objective = r.objective;
    return out;
  }

 private:
  const RunManifest& m_;
  std::ostream& err_;
};

json params_json(const SolveReport& report) {
  json p = json::object();
  for (const auto& [k, v] : report.params) p[k] = v;
  return p;
}

void write_report(const RunManifest& m, const SolveReport& report, double wall_time,
                  const std::vector<std::string>& files) {
  json j;
  j["command"] = to_string(m.command);
  j["method"] = report.method;
  j["objective"] = report.objective;
  j["regularized_objective"] = report.regularized_objective;
  j["iterations"] = report.iterations;
  j["certificate"] = report.certificate;
  j["wall_time"] = wall_time;
  j["seed"] = m.seed;
  j["gamma_overridden"] = report.gamma_overridden;
  j["params"] = params_json(report);
  j["outputs"] = files;
  fs::create_directories(m.output_dir);
  std::ofstream out(m.output_dir / "report.json");
  if (!out) throw InputError("cannot write " + (m.output_dir / "report.json").string());
  out << j.dump(2) << '\n';
}

}  // namespace

void RunManifest::validate() const {
  switch (command) {
    case Command::sinkhorn:
    case Command::approx:
    case Command::aam:
      require_path(cost, "--cost");
      require_path(source, "--source");
      require_path(target, "--target");
      break;
    case Command::round:
      require_path(plan, "--plan");
      require_path(source, "--source");
      require_path(target, "--target");
      if (cost) require_path(cost, "--cost");
      break;
    case Command::barycenter:
      require_path(cost, "--cost");
      require_path(measures, "--measures", true);
      break;
    case Command::decentralized:
      require_path(cost, "--cost");
      require_path(measures, "--measures", true);
      require_path(graph, "--graph");
      break;
    case Command::oracle:
      require_path(cost, "--cost");
      if (target_kind == "ot") {
        require_path(source, "--source");
        require_path(target, "--target");
      } else if (target_kind == "barycenter") {
        require_path(measures, "--measures", true);
      } else {
        throw InputError("oracle target must be ot or barycenter");
      }
      break;
    case Command::verify:
      break;
  }
}

int run(const RunManifest& manifest, std::ostream& out, std::ostream& err) {
  const auto start = std::chrono::steady_clock::now();
  if (manifest.command == Command::verify) {
    std::ostringstream sink;
    const auto outcomes = acceptance::run(manifest.quiet ? sink : out, manifest.criteria);
    bool all = true;
    for (const auto& o : outcomes) all = all && o.passed;
    return all ? exit_ok : exit_failed;
  }

  const Runner runner(manifest, err);
  Outcome result;
  try {
    manifest.validate();
    switch (manifest.command) {
      case Command::sinkhorn: result = runner.sinkhorn(); break;
      case Command::approx: result = runner.approx(); break;
      case Command::aam: result = runner.aam(); break;
      case Command::round: result = runner.round(); break;
      case Command::barycenter: result = runner.barycenter(); break;
      case Command::decentralized: result = runner.decentralized(); break;
      case Command::oracle: result = runner.oracle(); break;
      case Command::verify: break;
    }
  } catch (const ConvergenceError& e) {
    err << "error: " << e.what() << '\n';
    if (manifest.trace) io::write_trace(*manifest.trace, e.trace());
    return exit_convergence;
  } catch (const NumericalError& e) {
    err << "error: " << e.what() << '\n';
    return exit_convergence;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_input;
  }

  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::vector<std::string> files;
  for (const auto& [name, m] : result.matrices) {
    io::write_matrix(manifest.output_dir / name, m);
    files.push_back(name);
  }
  for (const auto& [name, v] : result.vectors) {
    io::write_vector(manifest.output_dir / name, v);
    files.push_back(name);
  }
  if (manifest.trace) io::write_trace(*manifest.trace, result.report.trace);
  write_report(manifest, result.report, wall, files);
  if (!manifest.quiet) {
    out << result.report.method << ": objective " << io::format_real(result.report.objective)
        << ", iterations " << result.report.iterations << ", certificate "
        << io::format_real(result.report.certificate) << '\n';
  }
  return exit_ok;
}

}  // namespace otkit::cli
