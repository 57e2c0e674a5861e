#include "otkit/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace otkit::io {

namespace fs = std::filesystem;

namespace {

std::ifstream open_for_reading(const fs::path& path) {
  if (!fs::exists(path)) throw InputError("no such file: " + path.string());
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  return in;
}

std::ofstream open_for_writing(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  return out;
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

[[noreturn]] void fail(const fs::path& path, long line, const std::string& what) {
  throw InputError(path.string() + ":" + std::to_string(line) + ": " + what);
}

double parse_real(std::string_view token, const fs::path& path, long line) {
  token = trim(token);
  if (token.empty()) fail(path, line, "empty field");
  if (token.front() == '+') token.remove_prefix(1);
  double value = 0.0;
  const auto [end, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || end != token.data() + token.size()) {
    fail(path, line, "not a number: '" + std::string(token) + "'");
  }
  if (!std::isfinite(value)) fail(path, line, "non-finite value");
  return value;
}

}  // namespace

std::string format_real(double x) {
  char buf[32];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return ec == std::errc() ? std::string(buf, end) : std::string("nan");
}

DiscreteMeasure read_measure(const fs::path& path, const WarningSink& warn) {
  auto in = open_for_reading(path);
  std::vector<double> values;
  std::string raw;
  long line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto text = trim(raw);
    if (text.empty()) continue;
    if (text.find(',') != std::string_view::npos) fail(path, line, "expected one value per line");
    const double x = parse_real(text, path, line);
    if (x < 0.0) fail(path, line, "negative weight");
    values.push_back(x);
  }
  if (values.empty()) throw InputError(path.string() + ": no values");
  const Vector w = Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
  const double total = w.sum();
  if (!(total > 0.0)) throw InputError(path.string() + ": weights sum to zero");
  if (std::abs(total - 1.0) > 1e-9 && warn) {
    warn(path.string() + ": weights sum to " + format_real(total) + ", normalizing");
  }
  return DiscreteMeasure(w);
}

Matrix read_matrix(const fs::path& path) {
  auto in = open_for_reading(path);
  std::vector<std::vector<double>> rows;
  std::string raw;
  long line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto text = trim(raw);
    if (text.empty()) continue;
    std::vector<double> row;
    std::size_t start = 0;
    for (;;) {
      const auto comma = text.find(',', start);
      row.push_back(parse_real(text.substr(start, comma - start), path, line));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      fail(path, line, "expected " + std::to_string(rows.front().size()) + " columns, found " +
                           std::to_string(row.size()));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw InputError(path.string() + ": no rows");
  Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
  }
  return m;
}

CostMatrix read_cost(const fs::path& path, bool allow_asymmetric) {
  Matrix m = read_matrix(path);
  try {
    return CostMatrix(std::move(m), allow_asymmetric);
  } catch (const Error& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

std::vector<DiscreteMeasure> read_measures_dir(const fs::path& dir, const WarningSink& warn) {
  if (!fs::is_directory(dir)) throw InputError("no such directory: " + dir.string());
  std::vector<DiscreteMeasure> out;
  for (int l = 1;; ++l) {
    const fs::path file = dir / ("p_" + std::to_string(l) + ".csv");
    if (!fs::exists(file)) break;
    out.push_back(read_measure(file, warn));
  }
  if (out.empty()) throw InputError(dir.string() + ": no p_1.csv found");
  return out;
}

std::pair<int, std::vector<std::pair<int, int>>> read_edge_list(const fs::path& path) {
  auto in = open_for_reading(path);
  std::vector<std::pair<int, int>> edges;
  int nodes = 0;
  std::string raw;
  long line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto text = trim(raw);
    if (text.empty() || text.front() == '#') continue;
    std::istringstream fields{std::string(text)};
    long a = -1;
    long b = -1;
    std::string extra;
    if (!(fields >> a >> b) || (fields >> extra)) fail(path, line, "expected two node ids");
    if (a < 0 || b < 0) fail(path, line, "node ids must be nonnegative");
    edges.emplace_back(static_cast<int>(a), static_cast<int>(b));
    nodes = std::max(nodes, static_cast<int>(std::max(a, b)) + 1);
  }
  if (edges.empty()) {
    // A lone node needs no edges; an empty file describes it.
    nodes = 1;
  }
  return {nodes, std::move(edges)};
}

void write_matrix(const fs::path& path, const Matrix& m) {
  auto out = open_for_writing(path);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j > 0) out << ',';
      out << format_real(m(i, j));
    }
    out << '\n';
  }
}

void write_vector(const fs::path& path, const Vector& v) {
  auto out = open_for_writing(path);
  for (Eigen::Index i = 0; i < v.size(); ++i) out << format_real(v[i]) << '\n';
}

void write_trace(const fs::path& path, const Trace& trace) {
  auto out = open_for_writing(path);
  for (std::size_t c = 0; c < trace.columns.size(); ++c) {
    if (c > 0) out << ',';
    out << trace.columns[c];
  }
  out << '\n';
  for (const auto& row : trace.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c > 0) out << ',';
      out << format_real(row[c]);
    }
    out << '\n';
  }
}

}  // namespace otkit::io
