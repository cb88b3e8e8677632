#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <unistd.h>

#include <json.hpp>

#include "oracles.hpp"
#include "wg/cli.hpp"
#include "wg/problems.hpp"
#include "wg/study.hpp"

using namespace wg;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

struct TempDir {
  fs::path path;
  TempDir() {
    static int counter = 0;
    path = fs::temp_directory_path() /
           ("wg_cli_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
};

nlohmann::json read_json(const std::string& path) { return nlohmann::json::parse(slurp(path)); }

} // namespace

TEST_CASE("mesh gen") {
  TempDir dir;
  const Run r = cli({"mesh", "gen", "--family", "squares", "--n", "2", "--out", dir / "m.txt"});
  CHECK(r.code == kExitOk);
  CHECK(read_mesh_file(dir / "m.txt").num_cells() == 4);
  CHECK(r.out.find("cells 4") != std::string::npos);

  const Run s = cli({"mesh", "gen", "--family", "small-edge", "--n", "2", "--eps", "0.25",
                     "--out", dir / "s.txt"});
  CHECK(s.code == kExitOk);
  CHECK(s.out.find("min_edge 0.125\n") != std::string::npos);
  CHECK(s.out.find("min_edge/h") != std::string::npos);

  for (const char* eps : {"0.7", "0.5", "0", "-1", "abc"}) {
    const Run bad = cli({"mesh", "gen", "--family", "small-edge", "--n", "2", "--eps", eps,
                         "--out", dir / "x.txt"});
    CHECK(bad.code == kExitUsage);
  }
  CHECK_FALSE(fs::exists(dir / "x.txt"));
  CHECK(cli({"mesh", "gen", "--family", "hexes", "--n", "2", "--out", dir / "x.txt"}).code ==
        kExitUsage);
  CHECK(cli({"mesh", "gen", "--family", "squares", "--out", dir / "x.txt"}).code == kExitUsage);
  CHECK(cli({"mesh", "gen", "--family", "squares", "--n", "0", "--out", dir / "x.txt"}).code ==
        kExitUsage);
}

TEST_CASE("usage") {
  CHECK(cli({}).code == kExitUsage);
  CHECK(cli({"frobnicate"}).code == kExitUsage);
  const Run h = cli({"--help"});
  CHECK(h.code == kExitOk);
  CHECK(h.out.find("convergence") != std::string::npos);
}

TEST_CASE("solve") {
  TempDir dir;
  REQUIRE(cli({"mesh", "gen", "--family", "squares", "--n", "4", "--out", dir / "m.txt"}).code ==
          0);
  const Run r = cli({"solve", "--mesh", dir / "m.txt", "--k", "1", "--problem", "sinsin", "--out",
                     dir / "sol"});
  REQUIRE(r.code == kExitOk);
  const nlohmann::json j = read_json(dir / "sol.json");
  for (const char* key : {"err_wgrad", "err_grad0", "err_l2", "err_edge"}) {
    REQUIRE(j["errors"].contains(key));
    const double v = j["errors"][key].get<double>();
    CHECK(std::isfinite(v));
    CHECK(v > 0.0);
  }
  int k = 0;
  const Eigen::VectorXd c = read_field(slurp(dir / "sol.field"), &k);
  CHECK(k == 1);
  CHECK(static_cast<std::size_t>(c.size()) == j["dofs"].get<std::size_t>());
}

TEST_CASE("solve: quadratic patch test") {
  TempDir dir;
  REQUIRE(cli({"mesh", "gen", "--family", "small-edge", "--n", "4", "--eps", "1e-6", "--out",
               dir / "m.txt"})
              .code == 0);
  const Run r = cli({"solve", "--mesh", dir / "m.txt", "--k", "2", "--problem", "poly2", "--out",
                     dir / "p"});
  REQUIRE(r.code == kExitOk);
  const nlohmann::json j = read_json(dir / "p.json");
  for (const char* key : {"err_wgrad", "err_grad0", "err_l2", "err_edge"})
    CHECK(j["errors"][key].get<double>() <= 1e-8);
}

TEST_CASE("solve is deterministic") {
  TempDir dir;
  REQUIRE(cli({"mesh", "gen", "--family", "small-edge", "--n", "8", "--eps", "1e-3", "--out",
               dir / "m.txt"})
              .code == 0);
  for (const char* solver : {"auto", "cg", "dense"}) {
    const std::vector<std::string> a{"solve", "--mesh", dir / "m.txt", "--k", "2", "--problem",
                                     "runge", "--solver", solver, "--out", dir / "a"};
    std::vector<std::string> b = a;
    b.back() = dir / "b";
    const Run ra = cli(a), rb = cli(b);
    REQUIRE(ra.code == 0);
    REQUIRE(rb.code == 0);
    CHECK(ra.out == rb.out);
    CHECK(slurp(dir / "a.field") == slurp(dir / "b.field"));
    CHECK(slurp(dir / "a.json") == slurp(dir / "b.json"));
  }
}

TEST_CASE("solve: input errors map to exit codes") {
  TempDir dir;
  std::ofstream(dir / "cw.txt") << "v 0 0\nv 1 0\nv 1 1\nv 0 1\nc 0 3 2 1\n";
  std::ofstream(dir / "junk.txt") << "v 0 0\nhello\n";
  REQUIRE(cli({"mesh", "gen", "--family", "squares", "--n", "2", "--out", dir / "m.txt"}).code ==
          0);
  CHECK(cli({"solve", "--mesh", dir / "cw.txt", "--k", "1", "--problem", "sinsin", "--out",
             dir / "o"})
            .code == kExitValidation);
  CHECK(cli({"solve", "--mesh", dir / "junk.txt", "--k", "1", "--problem", "sinsin", "--out",
             dir / "o"})
            .code == kExitValidation);
  CHECK(cli({"solve", "--mesh", dir / "missing.txt", "--k", "1", "--problem", "sinsin", "--out",
             dir / "o"})
            .code == kExitUsage);
  CHECK(cli({"solve", "--mesh", dir / "m.txt", "--k", "1", "--problem", "nope", "--out",
             dir / "o"})
            .code == kExitUsage);
  CHECK(cli({"solve", "--mesh", dir / "m.txt", "--k", "0", "--problem", "sinsin", "--out",
             dir / "o"})
            .code == kExitUsage);
  CHECK_FALSE(fs::exists(dir / "o.json"));
}

TEST_CASE("exit code contract") {
  auto code = [](auto e) { return exit_code_for(std::make_exception_ptr(e)); };
  CHECK(code(std::invalid_argument("x")) == kExitUsage);
  CHECK(code(ParseError(3, "x")) == kExitValidation);
  CHECK(code(ValidationError("x", 2)) == kExitValidation);
  CHECK(code(GeometryError("x")) == kExitValidation);
  CHECK(code(SolverError("x", 1.0, 10)) == kExitSolver);
  CHECK(code(std::runtime_error("x")) == kExitFailure);
}

TEST_CASE("convergence: squares") {
  TempDir dir;
  const Run r = cli({"convergence", "--family", "squares", "--levels", "4", "--k", "1",
                     "--problem", "sinsin", "--out", dir / "c1"});
  REQUIRE(r.code == kExitOk);
  const std::string csv = slurp(dir / "c1.csv");
  CHECK(csv.rfind("level,h,dofs,err_wgrad,err_grad0,err_l2,err_edge,cg_iters\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);

  const nlohmann::json j1 = read_json(dir / "c1.json");
  const std::vector<std::pair<const char*, double>> want1{
      {"err_wgrad", 1.0}, {"err_grad0", 1.0}, {"err_l2", 2.0}, {"err_edge", 2.0}};
  for (const auto& [name, rate] : want1) {
    CAPTURE(name);
    CHECK(std::abs(j1["slopes"][name]["slope"].get<double>() - rate) <= 0.1);
  }
  REQUIRE(j1["rows"].size() == 4);
  for (std::size_t i = 1; i < 4; ++i)
    CHECK(j1["rows"][i]["h"].get<double>() < j1["rows"][i - 1]["h"].get<double>());

  const std::string svg = slurp(dir / "c1.svg");
  CHECK(svg.find("version=\"1.1\"") != std::string::npos);
  CHECK(svg.find("viewBox=\"0 0 800 600\"") != std::string::npos);
  CHECK(std::count(svg.begin(), svg.end(), '\n') > 10);
  size_t polylines = 0;
  for (size_t pos = 0; (pos = svg.find("<polyline", pos)) != std::string::npos; ++pos)
    ++polylines;
  CHECK(polylines == 4);

  const Run r2 = cli({"convergence", "--family", "squares", "--levels", "4", "--k", "2",
                      "--problem", "sinsin", "--out", dir / "c2"});
  REQUIRE(r2.code == kExitOk);
  const nlohmann::json j2 = read_json(dir / "c2.json");
  const std::vector<std::pair<const char*, double>> want2{
      {"err_wgrad", 2.0}, {"err_grad0", 2.0}, {"err_l2", 3.0}, {"err_edge", 3.0}};
  for (const auto& [name, rate] : want2) {
    CAPTURE(name);
    CHECK(std::abs(j2["slopes"][name]["slope"].get<double>() - rate) <= 0.15);
  }

  for (const auto& entry : fs::directory_iterator(dir.path))
    CHECK(entry.path().extension() != ".tmp");
}

TEST_CASE("convergence: slopes ignore short edges") {
  TempDir dir;
  REQUIRE(cli({"convergence", "--family", "small-edge", "--eps", "0.25", "--levels", "4", "--k",
               "1", "--problem", "sinsin", "--out", dir / "a"})
              .code == 0);
  REQUIRE(cli({"convergence", "--family", "small-edge", "--eps", "1e-6", "--levels", "4", "--k",
               "1", "--problem", "sinsin", "--out", dir / "b"})
              .code == 0);
  const nlohmann::json a = read_json(dir / "a.json"), b = read_json(dir / "b.json");
  CHECK(b["eps"].get<double>() == 1e-6);
  for (const char* name : {"err_wgrad", "err_grad0", "err_l2", "err_edge"}) {
    CAPTURE(name);
    CHECK(std::abs(a["slopes"][name]["slope"].get<double>() -
                   b["slopes"][name]["slope"].get<double>()) <= 0.15);
  }
}

TEST_CASE("convergence: a polynomial problem is reported as exact") {
  TempDir dir;
  const Run r = cli({"convergence", "--family", "squares", "--levels", "3", "--k", "1",
                     "--problem", "poly1", "--out", dir / "p"});
  REQUIRE(r.code == 0);
  const nlohmann::json j = read_json(dir / "p.json");
  // errors sit at round-off; whatever slope appears must not be mistaken for a rate
  for (const auto& row : j["rows"])
    CHECK(row["err_l2"].get<double>() < 1e-10);
}

TEST_CASE("robustness sweep") {
  TempDir dir;
  const Run r = cli({"robustness", "--levels", "3", "--k", "1", "--eps-list", "0.25,1e-4,1e-8",
                     "--out", dir / "r"});
  REQUIRE(r.code == kExitOk);
  const nlohmann::json j = read_json(dir / "r.json");
  REQUIRE(j["runs"].size() == 3);
  for (const auto& run : j["runs"]) {
    CHECK(run["max_slope_shift"].get<double>() <= 0.15);
    CHECK(run["max_iter_ratio"].get<double>() <= 2.0);
  }
  CHECK(cli({"robustness", "--eps-list", "0.25,0.9", "--out", dir / "bad"}).code == kExitUsage);
}

TEST_CASE("write_file_atomic") {
  TempDir dir;
  write_file_atomic(dir / "f.txt", "one");
  write_file_atomic(dir / "f.txt", "two");
  CHECK(slurp(dir / "f.txt") == "two");
  CHECK_FALSE(fs::exists(dir / "f.txt.tmp"));
  CHECK_THROWS(write_file_atomic(dir / "no/such/dir/f.txt", "x"));
}

TEST_CASE("ProblemSpec consistency by finite differences") {
  std::mt19937 rng(42);
  std::uniform_real_distribution<double> ud(0.05, 0.95);
  for (const ProblemSpec& p : builtin_problems()) {
    CAPTURE(p.name);
    for (int i = 0; i < 20; ++i) {
      const Point x(ud(rng), ud(rng));
      const Eigen::Vector2d g = p.grad(x);
      const Eigen::Vector2d gfd = oracle::fd_gradient(p.u, x);
      CHECK((g - gfd).norm() <= 1e-5 * std::max(1.0, g.norm()));
      const double f = p.f(x);
      const double ffd = -oracle::fd_laplacian(p.u, x);
      CHECK(std::abs(f - ffd) <= 1e-5 * std::max(1.0, std::abs(f)));
    }
    // g is the trace of u
    for (double t : {0.0, 0.3, 1.0}) {
      CHECK(p.g(Point(t, 0.0)) == doctest::Approx(p.u(Point(t, 0.0))).epsilon(1e-15));
      CHECK(p.g(Point(1.0, t)) == doctest::Approx(p.u(Point(1.0, t))).epsilon(1e-15));
    }
  }
  CHECK(find_problem("sinsin") != nullptr);
  CHECK(find_problem("unknown") == nullptr);
}
