#include "otkit/report.hpp"

#include <algorithm>

namespace otkit {

namespace {

std::size_t column_index(const Trace& trace, const std::string& column) {
  auto it = std::find(trace.columns.begin(), trace.columns.end(), column);
  if (it == trace.columns.end()) throw InputError("trace has no column '" + column + "'");
  return static_cast<std::size_t>(it - trace.columns.begin());
}

}  // namespace

double Trace::at(std::size_t row, const std::string& name) const {
  return rows.at(row).at(column_index(*this, name));
}

std::vector<double> Trace::column(const std::string& name) const {
  const std::size_t idx = column_index(*this, name);
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r.at(idx));
  return out;
}

void SolveReport::set_param(const std::string& key, double value) {
  for (auto& kv : params) {
    if (kv.first == key) {
      kv.second = value;
      return;
    }
  }
  params.emplace_back(key, value);
}

double SolveReport::param(const std::string& key) const {
  for (const auto& kv : params) {
    if (kv.first == key) return kv.second;
  }
  throw InputError("report has no parameter '" + key + "'");
}

}  // namespace otkit
