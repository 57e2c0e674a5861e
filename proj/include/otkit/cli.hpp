#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace otkit::cli {

enum class Command { sinkhorn, approx, aam, round, barycenter, decentralized, oracle, verify };

const char* to_string(Command command);

enum ExitCode : int {
  exit_ok = 0,
  exit_failed = 1,  // verify found a failing criterion
  exit_convergence = 2,
  exit_input = 3,
};

/// Everything one invocation needs. Paths are checked by validate().
struct RunManifest {
  Command command = Command::verify;
  std::string target_kind;    // oracle: "ot" or "barycenter"
  std::string method = "ibp";  // barycenter: "ibp" or "aibp"

  std::optional<std::filesystem::path> cost;
  std::optional<std::filesystem::path> source;
  std::optional<std::filesystem::path> target;
  std::optional<std::filesystem::path> plan;
  std::optional<std::filesystem::path> measures;
  std::optional<std::filesystem::path> graph;
  std::optional<std::filesystem::path> trace;
  std::filesystem::path output_dir = ".";

  std::optional<double> eps;
  std::optional<double> gamma;
  double tol = 1e-9;
  std::optional<long> max_iter;
  long rounds = 0;
  std::optional<double> step_L;
  bool stochastic = false;
  int batch = 1;
  std::uint64_t seed = 0;
  bool quiet = false;
  bool allow_asymmetric = false;
  std::vector<int> criteria;

  /// Throws InputError naming the first missing path or parameter.
  void validate() const;
};

/// Executes the manifest, writing report.json and the command's CSV outputs
/// into output_dir. Diagnostics go to `err`, summaries to `out`.
int run(const RunManifest& manifest, std::ostream& out, std::ostream& err);

}  // namespace otkit::cli
