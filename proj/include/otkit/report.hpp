#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "otkit/errors.hpp"

namespace otkit {

// Column-named table of per-iteration diagnostics.
struct Trace {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  Trace() = default;
  explicit Trace(std::vector<std::string> cols) : columns(std::move(cols)) {}

  void push(std::vector<double> row) { rows.push_back(std::move(row)); }
  bool empty() const { return rows.empty(); }
  std::size_t size() const { return rows.size(); }

  // Value of a named column in a given row; throws if the column is unknown.
  double at(std::size_t row, const std::string& column) const;
  std::vector<double> column(const std::string& column) const;
};

// Summary of one solve. `params` keeps insertion order so reports diff cleanly.
struct SolveReport {
  std::string method;
  double objective = 0.0;              // non-regularized cost of the returned answer
  double regularized_objective = 0.0;  // entropic objective where meaningful
  double certificate = 0.0;            // solver-specific gap / feasibility certificate
  long iterations = 0;
  bool gamma_overridden = false;
  std::vector<std::pair<std::string, double>> params;
  Trace trace;

  void set_param(const std::string& key, double value);
  double param(const std::string& key) const;
};

// Iteration budget exhausted. Carries the trace collected so far.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, Trace trace)
      : Error(what), trace_(std::move(trace)) {}

  const Trace& trace() const noexcept { return trace_; }

 private:
  Trace trace_;
};

}  // namespace otkit
