#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "otkit/cli.hpp"
#include "otkit/io.hpp"

using namespace otkit;
namespace fs = std::filesystem;

namespace {

struct Scratch {
  fs::path dir;

  explicit Scratch(const std::string& name) : dir(fs::temp_directory_path() / ("otkit_test_" + name)) {
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  ~Scratch() { fs::remove_all(dir); }

  fs::path write(const std::string& file, const std::string& body) const {
    const fs::path path = dir / file;
    fs::create_directories(path.parent_path());
    std::ofstream(path) << body;
    return path;
  }
};

std::string slurp(const fs::path& path) {
  std::ifstream in(path);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

cli::RunManifest approx_manifest(const Scratch& s) {
  cli::RunManifest m;
  m.command = cli::Command::approx;
  m.cost = s.write("cost.csv", "0,1\n1,0\n");
  m.source = s.write("p.csv", "0.3\n0.7\n");
  m.target = s.write("q.csv", "0.6\n0.4\n");
  m.eps = 0.05;
  m.quiet = true;
  m.output_dir = s.dir / "out";
  return m;
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("approx on the two by two instance") {
    const Scratch s("approx");
    std::ostringstream out;
    std::ostringstream err;
    const auto m = approx_manifest(s);
    REQUIRE(cli::run(m, out, err) == cli::exit_ok);
    const auto report = nlohmann::json::parse(slurp(m.output_dir / "report.json"));
    const double objective = report["objective"];
    CHECK(objective >= 0.3 - 1e-12);
    CHECK(objective <= 0.35);
    CHECK(report["command"] == "approx");
    CHECK(report["params"].contains("gamma"));
    CHECK(fs::exists(m.output_dir / "plan.csv"));
  }

  TEST_CASE("reports are deterministic apart from wall time") {
    const Scratch s("determinism");
    std::ostringstream sink;
    auto m = approx_manifest(s);
    m.seed = 7;
    REQUIRE(cli::run(m, sink, sink) == cli::exit_ok);
    const std::string first = slurp(m.output_dir / "report.json");
    REQUIRE(cli::run(m, sink, sink) == cli::exit_ok);
    const std::string second = slurp(m.output_dir / "report.json");
    const std::regex wall("\"wall_time\": [^,\\n]*");
    CHECK(std::regex_replace(first, wall, "") == std::regex_replace(second, wall, ""));
  }

  TEST_CASE("missing files") {
    const Scratch s("missing");
    std::ostringstream out;
    std::ostringstream err;
    auto m = approx_manifest(s);
    m.source = s.dir / "nope.csv";
    CHECK(cli::run(m, out, err) == cli::exit_input);
    CHECK(err.str().find("nope.csv") != std::string::npos);
  }

  TEST_CASE("malformed csv names the line") {
    const Scratch s("malformed");
    std::ostringstream out;
    std::ostringstream err;
    auto m = approx_manifest(s);
    m.cost = s.write("bad.csv", "0,1\n1,x\n");
    CHECK(cli::run(m, out, err) == cli::exit_input);
    CHECK(err.str().find("bad.csv:2") != std::string::npos);
  }

  TEST_CASE("dimension mismatch") {
    const Scratch s("mismatch");
    std::ostringstream out;
    std::ostringstream err;
    auto m = approx_manifest(s);
    m.target = s.write("q3.csv", "0.2\n0.3\n0.5\n");
    CHECK(cli::run(m, out, err) == cli::exit_input);
  }

  TEST_CASE("exhausted budget exits with the convergence code") {
    const Scratch s("budget");
    std::ostringstream out;
    std::ostringstream err;
    auto m = approx_manifest(s);
    m.command = cli::Command::sinkhorn;
    m.eps.reset();
    m.gamma = 0.001;
    m.tol = 1e-12;
    m.max_iter = 3;
    m.trace = s.dir / "trace.csv";
    CHECK(cli::run(m, out, err) == cli::exit_convergence);
    CHECK(fs::exists(s.dir / "trace.csv"));
  }

  TEST_CASE("asymmetric costs need the flag") {
    const Scratch s("asym");
    std::ostringstream out;
    std::ostringstream err;
    auto m = approx_manifest(s);
    m.cost = s.write("asym.csv", "0,1\n2,0\n");
    CHECK(cli::run(m, out, err) == cli::exit_input);
    m.allow_asymmetric = true;
    CHECK(cli::run(m, out, err) == cli::exit_ok);
  }

  TEST_CASE("oracle command") {
    const Scratch s("oracle");
    std::ostringstream sink;
    auto m = approx_manifest(s);
    m.command = cli::Command::oracle;
    m.target_kind = "ot";
    m.eps.reset();
    REQUIRE(cli::run(m, sink, sink) == cli::exit_ok);
    const auto report = nlohmann::json::parse(slurp(m.output_dir / "report.json"));
    CHECK(static_cast<double>(report["objective"]) == doctest::Approx(0.3));
  }

  TEST_CASE("measure files are normalized with a warning") {
    const Scratch s("normalize");
    std::vector<std::string> warnings;
    const auto p = io::read_measure(s.write("p.csv", "1\n3\n"),
                                    [&](const std::string& w) { warnings.push_back(w); });
    CHECK(p[0] == doctest::Approx(0.25));
    REQUIRE(warnings.size() == 1);
    CHECK(warnings[0].find("normalizing") != std::string::npos);

    warnings.clear();
    io::read_measure(s.write("u.csv", "0.5\n0.5\n"), [&](const std::string& w) { warnings.push_back(w); });
    CHECK(warnings.empty());
  }

  TEST_CASE("io round trip") {
    const Scratch s("roundtrip");
    Matrix m(2, 3);
    m << 0.1, 1.0 / 3.0, 2e-17, 5.0, 0.0, 1e300;
    io::write_matrix(s.dir / "m.csv", m);
    CHECK(io::read_matrix(s.dir / "m.csv") == m);
    CHECK_THROWS_AS(io::read_matrix(s.write("ragged.csv", "1,2\n3\n")), InputError);

    const auto [nodes, edges] = io::read_edge_list(s.write("g.txt", "# path\n0 1\n1 2\n"));
    CHECK(nodes == 3);
    CHECK(edges.size() == 2);
    CHECK_THROWS_AS(io::read_edge_list(s.write("bad.txt", "0 1 2\n")), InputError);
  }
}
