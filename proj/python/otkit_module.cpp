#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "otkit/aam.hpp"
#include "otkit/barycenter.hpp"
#include "otkit/decentralized.hpp"
#include "otkit/oracle.hpp"
#include "otkit/rounding.hpp"
#include "otkit/sinkhorn.hpp"

namespace py = pybind11;
using namespace otkit;

namespace {

std::vector<DiscreteMeasure> to_measures(const std::vector<Vector>& weights) {
  std::vector<DiscreteMeasure> out;
  out.reserve(weights.size());
  for (const auto& w : weights) out.emplace_back(w);
  return out;
}

py::dict report_dict(const SolveReport& r) {
  py::dict params;
  for (const auto& [key, value] : r.params) params[py::str(key)] = value;
  py::dict d;
  d["method"] = r.method;
  d["objective"] = r.objective;
  d["regularized_objective"] = r.regularized_objective;
  d["certificate"] = r.certificate;
  d["iterations"] = r.iterations;
  d["gamma_overridden"] = r.gamma_overridden;
  d["params"] = params;
  return d;
}

py::dict barycenter_dict(const BarycenterResult& res) {
  std::vector<Matrix> plans;
  for (const auto& plan : res.plans) plans.push_back(plan.entries);
  py::dict d = report_dict(res.report);
  d["q_bar"] = res.q_bar;
  d["plans"] = plans;
  return d;
}

}  // namespace

PYBIND11_MODULE(_otkit, m) {
  m.doc() = "Entropic optimal transport and Wasserstein barycenter solvers";

  auto base = py::register_exception<Error>(m, "OtkitError", PyExc_RuntimeError);
  py::register_exception<DomainError>(m, "DomainError", base.ptr());
  py::register_exception<ParameterError>(m, "ParameterError", base.ptr());
  py::register_exception<DimensionError>(m, "DimensionError", base.ptr());
  py::register_exception<InputError>(m, "InputError", base.ptr());
  py::register_exception<NumericalError>(m, "NumericalError", base.ptr());
  py::register_exception<ProtocolError>(m, "ProtocolError", base.ptr());
  py::register_exception<ConvergenceError>(m, "ConvergenceError", base.ptr());

  m.def("logsumexp", py::overload_cast<const Vector&>(&logsumexp), py::arg("values"));

  m.def(
      "sinkhorn",
      [](const Matrix& cost, double gamma, const Vector& p, const Vector& q, double tol,
         std::optional<long> max_iter) {
        SinkhornOptions options;
        options.max_iter = max_iter;
        options.record_trace = false;
        const auto res =
            sinkhorn_solve(CostMatrix(cost), gamma, DiscreteMeasure(p), DiscreteMeasure(q), tol, options);
        py::dict d;
        d["u"] = res.state.pot.u;
        d["v"] = res.state.pot.v;
        d["plan"] = res.plan.entries;
        d["iterations"] = res.state.iteration;
        return d;
      },
      py::arg("cost"), py::arg("gamma"), py::arg("p"), py::arg("q"), py::arg("tol") = 1e-9,
      py::arg("max_iter") = py::none(), "Sinkhorn at fixed gamma until the marginal violation is at most tol.");

  m.def(
      "regularized_ot_value",
      [](const Matrix& cost, double gamma, const Vector& p, const Vector& q) {
        return regularized_ot_value(CostMatrix(cost), gamma, DiscreteMeasure(p), DiscreteMeasure(q));
      },
      py::arg("cost"), py::arg("gamma"), py::arg("p"), py::arg("q"));

  m.def(
      "approx_ot",
      [](const Matrix& cost, const Vector& p, const Vector& q, double eps, std::optional<double> gamma,
         const std::string& method) {
        const CostMatrix c(cost);
        const DiscreteMeasure pm(p);
        const DiscreteMeasure qm(q);
        py::dict d;
        if (method == "sinkhorn") {
          const auto res = approx_ot_sinkhorn(c, pm, qm, eps, gamma);
          d = report_dict(res.report);
          d["plan"] = res.plan.entries;
        } else if (method == "aam") {
          const auto res = accelerated_ot(c, pm, qm, eps, gamma);
          d = report_dict(res.report);
          d["plan"] = res.plan.entries;
        } else {
          throw ParameterError("method must be 'sinkhorn' or 'aam'");
        }
        return d;
      },
      py::arg("cost"), py::arg("p"), py::arg("q"), py::arg("eps"), py::arg("gamma") = py::none(),
      py::arg("method") = "sinkhorn", "eps-approximate optimal transport plan.");

  m.def(
      "round_to_polytope",
      [](const Matrix& plan, const Vector& p, const Vector& q) {
        return round_to_polytope(plan, DiscreteMeasure(p), DiscreteMeasure(q)).entries;
      },
      py::arg("plan"), py::arg("p"), py::arg("q"));

  m.def(
      "barycenter",
      [](const std::vector<Vector>& measures, const Matrix& cost, double eps, const std::string& method,
         std::optional<double> gamma) {
        const auto ms = to_measures(measures);
        const CostMatrix c(cost);
        if (method == "ibp") return barycenter_dict(barycenter_ibp(ms, c, eps, gamma));
        if (method == "aibp") return barycenter_dict(accelerated_ibp(ms, c, eps, gamma));
        throw ParameterError("method must be 'ibp' or 'aibp'");
      },
      py::arg("measures"), py::arg("cost"), py::arg("eps"), py::arg("method") = "ibp",
      py::arg("gamma") = py::none(), "eps-approximate fixed-support barycenter.");

  m.def(
      "decentralized",
      [](const std::vector<Vector>& measures, const Matrix& cost,
         const std::vector<std::pair<int, int>>& edges, double gamma, long rounds, bool stochastic,
         int batch, std::uint64_t seed, std::optional<double> step_l) {
        const auto ms = to_measures(measures);
        const auto graph = graph_laplacian(static_cast<int>(ms.size()), edges);
        SimConfig config;
        config.gamma = gamma;
        config.rounds = rounds;
        config.stochastic = stochastic;
        config.batch = batch;
        config.seed = seed;
        config.step_L = step_l;
        const auto res = simulate_decentralized_barycenter(ms, CostMatrix(cost), graph, config);
        std::vector<Vector> q;
        std::vector<Vector> u;
        for (const auto& node : res.nodes) {
          q.push_back(node.q_local);
          u.push_back(node.u_local);
        }
        py::dict d = report_dict(res.report);
        d["q"] = q;
        d["u"] = u;
        d["consensus_error"] = consensus_error(res.nodes);
        d["condition_number"] = condition_number(graph);
        return d;
      },
      py::arg("measures"), py::arg("cost"), py::arg("edges"), py::arg("gamma"), py::arg("rounds"),
      py::arg("stochastic") = false, py::arg("batch") = 1, py::arg("seed") = 0,
      py::arg("step_L") = py::none(), "Simulate the decentralized dual method on a graph.");

  m.def(
      "fenchel_dual_ot",
      [](const Vector& u, const Vector& p, const Matrix& cost, double gamma) {
        return fenchel_dual_ot(u, DiscreteMeasure(p), CostMatrix(cost), gamma);
      },
      py::arg("u"), py::arg("p"), py::arg("cost"), py::arg("gamma"));
  m.def(
      "fenchel_dual_gradient",
      [](const Vector& u, const Vector& p, const Matrix& cost, double gamma) {
        return fenchel_dual_gradient(u, DiscreteMeasure(p), CostMatrix(cost), gamma);
      },
      py::arg("u"), py::arg("p"), py::arg("cost"), py::arg("gamma"));

  m.def(
      "exact_ot",
      [](const Matrix& cost, const Vector& p, const Vector& q) {
        const auto res = exact_ot_lp(CostMatrix(cost), DiscreteMeasure(p), DiscreteMeasure(q));
        return py::make_tuple(res.objective, res.plan);
      },
      py::arg("cost"), py::arg("p"), py::arg("q"), "Exact LP optimum and an optimal vertex plan (n <= 32).");
  m.def(
      "exact_barycenter",
      [](const std::vector<Vector>& measures, const Matrix& cost) {
        const auto res = exact_barycenter_lp(to_measures(measures), CostMatrix(cost));
        return py::make_tuple(res.objective, res.q);
      },
      py::arg("measures"), py::arg("cost"));
}
