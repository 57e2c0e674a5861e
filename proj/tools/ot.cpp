#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "otkit/cli.hpp"

using otkit::cli::Command;
using otkit::cli::RunManifest;

namespace {

void add_ot_inputs(CLI::App* sub, RunManifest& m) {
  sub->add_option("--cost", m.cost, "cost matrix CSV");
  sub->add_option("--source", m.source, "source measure CSV");
  sub->add_option("--target", m.target, "target measure CSV");
}

}  // namespace

int main(int argc, char** argv) {
  RunManifest m;
  CLI::App app{"Optimal transport and Wasserstein barycenter solvers"};
  app.require_subcommand(1);
  app.fallthrough();
  app.add_option("--output-dir", m.output_dir, "directory for report.json and CSV outputs");
  app.add_option("--seed", m.seed, "random seed, recorded in the report");
  app.add_flag("--quiet", m.quiet, "suppress summaries and warnings");
  app.add_option("--trace", m.trace, "write the per-iteration trace to this CSV");
  app.add_flag("--allow-asymmetric", m.allow_asymmetric, "accept a cost matrix that is not symmetric");

  auto* sinkhorn = app.add_subcommand("sinkhorn", "entropic OT by Sinkhorn at a fixed gamma");
  add_ot_inputs(sinkhorn, m);
  sinkhorn->add_option("--gamma", m.gamma, "regularization")->required();
  sinkhorn->add_option("--tol", m.tol, "marginal violation target");
  sinkhorn->add_option("--max-iter", m.max_iter, "half-step budget");

  auto* approx = app.add_subcommand("approx", "eps-approximate OT through Sinkhorn and rounding");
  add_ot_inputs(approx, m);
  approx->add_option("--eps", m.eps, "additive accuracy")->required();
  approx->add_option("--gamma", m.gamma, "override the scheduled gamma");
  approx->add_option("--max-iter", m.max_iter, "half-step budget");

  auto* aam = app.add_subcommand("aam", "accelerated alternating minimization");
  add_ot_inputs(aam, m);
  aam->add_option("--eps", m.eps, "additive accuracy (omit for a regularized run at --gamma)");
  aam->add_option("--gamma", m.gamma, "override the scheduled gamma");
  aam->add_option("--tol", m.tol, "gap and feasibility target of a regularized run");
  aam->add_option("--max-iter", m.max_iter, "iteration budget");

  auto* round = app.add_subcommand("round", "round a plan onto the transport polytope");
  round->add_option("--plan", m.plan, "plan CSV")->required();
  round->add_option("--source", m.source, "row marginal CSV")->required();
  round->add_option("--target", m.target, "column marginal CSV")->required();
  round->add_option("--cost", m.cost, "optional cost, to report the rounded plan's cost");

  auto* bary = app.add_subcommand("barycenter", "eps-approximate Wasserstein barycenter");
  bary->add_option("--method", m.method, "ibp or aibp")->check(CLI::IsMember({"ibp", "aibp"}));
  bary->add_option("--measures", m.measures, "directory holding p_1.csv, p_2.csv, ...");
  bary->add_option("--cost", m.cost, "cost matrix CSV");
  bary->add_option("--eps", m.eps, "additive accuracy")->required();
  bary->add_option("--gamma", m.gamma, "override the scheduled gamma");
  bary->add_option("--max-iter", m.max_iter, "iteration budget");

  auto* dec = app.add_subcommand("decentralized", "simulate the decentralized dual method");
  dec->add_option("--graph", m.graph, "edge list, one 'i j' pair per line");
  dec->add_option("--measures", m.measures, "directory holding p_1.csv, p_2.csv, ...");
  dec->add_option("--cost", m.cost, "cost matrix CSV");
  dec->add_option("--gamma", m.gamma, "regularization")->required();
  dec->add_option("--rounds", m.rounds, "communication rounds")->required();
  dec->add_flag("--stochastic", m.stochastic, "sampled local gradients");
  dec->add_option("--batch", m.batch, "samples per stochastic gradient");
  dec->add_option("--step-L", m.step_L, "step constant L (default m lambda_max(W) / gamma)");

  auto* oracle = app.add_subcommand("oracle", "exact LP solutions for small instances");
  oracle->add_option("kind", m.target_kind, "ot or barycenter")
      ->required()
      ->check(CLI::IsMember({"ot", "barycenter"}));
  add_ot_inputs(oracle, m);
  oracle->add_option("--measures", m.measures, "directory holding p_1.csv, p_2.csv, ...");

  auto* verify = app.add_subcommand("verify", "run the acceptance suite");
  verify->add_option("--criterion", m.criteria, "run only these criteria");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : otkit::cli::exit_input;
  }

  const std::pair<CLI::App*, Command> commands[] = {
      {sinkhorn, Command::sinkhorn},   {approx, Command::approx}, {aam, Command::aam},
      {round, Command::round},         {bary, Command::barycenter},
      {dec, Command::decentralized},   {oracle, Command::oracle}, {verify, Command::verify},
  };
  for (const auto& [sub, command] : commands) {
    if (sub->parsed()) m.command = command;
  }
  return otkit::cli::run(m, std::cout, std::cerr);
}
