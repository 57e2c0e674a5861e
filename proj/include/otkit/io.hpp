#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "otkit/core.hpp"
#include "otkit/report.hpp"

namespace otkit::io {

/// Receives non-fatal notices such as auto-normalization.
using WarningSink = std::function<void(const std::string&)>;

/// One nonnegative real per line. Blank lines are skipped. Weights whose sum is
/// off by more than 1e-9 are rescaled and the sink is told so. Parse errors
/// throw InputError naming the file and line.
DiscreteMeasure read_measure(const std::filesystem::path& path, const WarningSink& warn = {});

/// Dense matrix, one comma-separated row per line.
Matrix read_matrix(const std::filesystem::path& path);
CostMatrix read_cost(const std::filesystem::path& path, bool allow_asymmetric = false);

/// Reads p_1.csv, p_2.csv, ... from a directory until the next index is missing.
std::vector<DiscreteMeasure> read_measures_dir(const std::filesystem::path& dir,
                                               const WarningSink& warn = {});

/// Edge list, one "i j" pair per line, 0-indexed. Returns the edges and the
/// node count (largest id + 1).
std::pair<int, std::vector<std::pair<int, int>>> read_edge_list(const std::filesystem::path& path);

void write_matrix(const std::filesystem::path& path, const Matrix& m);
void write_vector(const std::filesystem::path& path, const Vector& v);
void write_trace(const std::filesystem::path& path, const Trace& trace);

/// Shortest decimal form that reads back to the same double.
std::string format_real(double x);

}  // namespace otkit::io
