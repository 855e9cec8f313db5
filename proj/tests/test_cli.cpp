#include "cli/config.hpp"
#include "cli/runner.hpp"
#include "cli/tasks.hpp"
#include "curvlab/errors.hpp"

#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <unistd.h>

namespace fs = std::filesystem;
using namespace curvlab;
using namespace curvlab::cli;

namespace {

// Fresh scratch directory, also used as CURVLAB_OUTPUT_ROOT.
struct Scratch {
  fs::path root;
  Scratch() {
    static int counter = 0;
    root = fs::temp_directory_path() / ("curvlab_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::remove_all(root);
    fs::create_directories(root);
    ::setenv("CURVLAB_OUTPUT_ROOT", (root / "out").c_str(), 1);
  }
  ~Scratch() {
    ::unsetenv("CURVLAB_OUTPUT_ROOT");
    std::error_code ec;
    fs::remove_all(root, ec);
  }
  fs::path config(const std::string& name, const std::string& text) const {
    const fs::path p = root / name;
    std::ofstream(p) << text;
    return p;
  }
  fs::path out(const std::string& name) const { return root / "out" / name; }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json results(const fs::path& dir) { return json::parse(slurp(dir / "results.json")); }

struct Outcome {
  int code;
  std::string out, err;
};

Outcome run(const fs::path& cfg) {
  std::ostringstream o, e;
  const int c = run_command(cfg, o, e);
  return {c, o.str(), e.str()};
}

Outcome sweep(const fs::path& cfg, int threads = 2) {
  std::ostringstream o, e;
  const int c = sweep_command(cfg, o, e, threads);
  return {c, o.str(), e.str()};
}

// sweep.csv as rows of strings, comment lines dropped
std::vector<std::vector<std::string>> csv_rows(const fs::path& p) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(slurp(p));
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

} // namespace

TEST_CASE("list-tasks names every operation family") {
  std::ostringstream o;
  CHECK(list_tasks_command(o) == 0);
  for (const char* t : {"anisotropic_torus_minimum", "radial_solve", "planar_solve", "sandwich_solve", "compact_solve",
                        "gravitating_solve", "nirenberg_flow", "sigma_strings", "helfrich_torus", "gauss_bonnet"})
    CHECK(o.str().find(t) != std::string::npos);
}

TEST_CASE("anisotropic_torus_minimum at gamma = 5") {
  Scratch s;
  const auto r = run(s.config("a.yaml", "task: anisotropic_torus_minimum\noutput: aniso\ninputs: {gamma: 5}\n"));
  REQUIRE(r.code == 0);
  const json d = results(s.out("aniso"));
  CHECK(std::abs(d["diagnostics"]["tau_min"].get<double>() - std::sqrt(3.0) / 2.0) < 1e-10);
  CHECK(d["status"] == "ok");
  CHECK(fs::exists(s.out("aniso") / "profile.csv"));
  CHECK(fs::exists(s.out("aniso") / "plot.py"));
}

TEST_CASE("radial_solve writes a profile and the flux") {
  Scratch s;
  const auto r = run(s.config("r.yaml", "task: radial_solve\noutput: rad\ninputs:\n  model: ah_classical\n  N: 1\n"));
  REQUIRE(r.code == 0);
  const json d = results(s.out("rad"));
  CHECK(d["diagnostics"]["flux"].get<double>() == doctest::Approx(2.0 * M_PI).epsilon(5e-3));
  CHECK(d["provenance"]["newton_iterations"].get<int>() > 0);
  const auto rows = csv_rows(s.out("rad") / "profile.csv");
  CHECK(rows[0] == std::vector<std::string>{"r", "v", "exp_v", "F12"});
  CHECK(rows.size() == 3002);
}

TEST_CASE("every artifact carries the config hash") {
  Scratch s;
  const auto cfg = s.config("g.yaml", "task: gravitating_solve\noutput: g\ninputs: {model: ah_classical, N: 1, G: 0.001}\n");
  REQUIRE(run(cfg).code == 0);
  const std::string hash = load_config(cfg).hash;
  CHECK(hash.size() == 64);
  for (const auto& e : fs::directory_iterator(s.out("g"))) {
    CAPTURE(e.path().string());
    CHECK(slurp(e.path()).find(hash) != std::string::npos);
  }
}

TEST_CASE("identical config gives byte-identical results") {
  Scratch s;
  const auto cfg = s.config("p.yaml", "task: sandwich_solve\noutput: sw\ninputs:\n  model: dielectric_inv_m\n  N: 1\n"
                                      "grid: {R: 8, h: 0.25}\n");
  REQUIRE(run(cfg).code == 0);
  const std::string first = slurp(s.out("sw") / "results.json");
  const std::string field = slurp(s.out("sw") / "field.csv");
  REQUIRE(run(cfg).code == 0);
  CHECK(first == slurp(s.out("sw") / "results.json"));
  CHECK(field == slurp(s.out("sw") / "field.csv"));
}

TEST_CASE("config hash ignores formatting but not content") {
  const auto a = parse_config("task: radial_solve\ninputs: {model: ah_classical, N: 1}\n");
  const auto b = parse_config("inputs:\n  N: 1\n  model: ah_classical\ntask: radial_solve   # comment\n");
  const auto c = parse_config("task: radial_solve\ninputs: {model: ah_classical, N: 2}\n");
  CHECK(a.hash == b.hash);
  CHECK(a.hash != c.hash);
}

TEST_CASE("malformed configs exit 2 and leave nothing behind") {
  Scratch s;
  const std::vector<std::string> bad = {
      "task: radial_solve\noutput: bad\ninputs: {model: ah_classical, N: [1\n",          // YAML syntax
      "task: radial_solve\noutput: bad\nbogus: 1\ninputs: {model: ah_classical}\n",       // top-level key
      "task: radial_solve\noutput: bad\ninputs: {model: ah_classical, colour: red}\n",    // unknown input
      "task: radial_solve\noutput: bad\ninputs: {model: ah_classical, lambda: -1}\n",     // range
      "task: radial_solve\noutput: bad\ninputs: {model: nope}\n",                         // choice
      "task: no_such_task\noutput: bad\n",                                                // task
      "task: radial_solve\noutput: bad\ninputs: {model: ah_classical, N: 1.5}\n",         // integer
      "task: gravitating_solve\noutput: bad\ninputs: {model: ah_classical, N: 1, G: 1}\n",  // G too large
      "- just\n- a list\n",
  };
  for (std::size_t i = 0; i < bad.size(); ++i) {
    CAPTURE(bad[i]);
    const auto r = run(s.config("bad" + std::to_string(i) + ".yaml", bad[i]));
    CHECK(r.code == 2);
    const json rec = json::parse(r.err);
    CHECK(rec["status"] == "error");
    CHECK(rec["error"] == "validation");
  }
  CHECK_FALSE(fs::exists(s.out("bad")));
  CHECK((!fs::exists(s.root / "out") || fs::is_empty(s.root / "out")));
}

TEST_CASE("solver failures exit 3 without artifacts") {
  Scratch s;
  const auto r = run(s.config("t.yaml", "task: compact_solve\noutput: t3\ninputs:\n  model: ah_classical\n  L: 3\n"
                                        "  points: [[1.5, 1.5]]\n  multiplicities: [1]\ngrid: {n: 32}\n"));
  CHECK(r.code == 3);
  CHECK(json::parse(r.err)["error"] == "solvability");
  CHECK_FALSE(fs::exists(s.out("t3")));
}

TEST_CASE("missing config file exits 4") {
  Scratch s;
  const auto r = run(s.root / "does_not_exist.yaml");
  CHECK(r.code == 4);
  CHECK(json::parse(r.err)["error"] == "io");
}

TEST_CASE("refuses to overwrite a foreign directory") {
  Scratch s;
  fs::create_directories(s.out("mine"));
  std::ofstream(s.out("mine") / "notes.txt") << "keep";
  const auto r = run(s.config("a.yaml", "task: topological_bounds\noutput: mine\n"));
  CHECK(r.code == 4);
  CHECK(slurp(s.out("mine") / "notes.txt") == "keep");
}

TEST_CASE("output root override applies to relative paths only") {
  Scratch s;
  const fs::path abs = s.root / "elsewhere";
  REQUIRE(run(s.config("a.yaml", "task: topological_bounds\noutput: " + abs.string() + "\n")).code == 0);
  CHECK(fs::exists(abs / "results.json"));
  REQUIRE(run(s.config("b.yaml", "task: topological_bounds\noutput: rel\n")).code == 0);
  CHECK(fs::exists(s.out("rel") / "results.json"));
}

TEST_CASE("gamma sweep gives a monotone tau_min column") {
  Scratch s;
  const auto r = sweep(s.config("s.yaml", "task: anisotropic_torus_minimum\noutput: sg\n"
                                          "inputs:\n  gamma: {sweep: {from: 0.1, to: 100, count: 30, spacing: log}}\n"));
  REQUIRE(r.code == 0);
  const auto rows = csv_rows(s.out("sg") / "sweep.csv");
  REQUIRE(rows.size() == 31);
  const auto& head = rows[0];
  const auto col = std::find(head.begin(), head.end(), "tau_min") - head.begin();
  double prev = 0.0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    CHECK(rows[i][1] == "ok");
    const double t = std::stod(rows[i][col]);
    CHECK(t > prev);
    prev = t;
  }
}

TEST_CASE("G sweep: deficit is linear with slope 8 pi^2 tau N") {
  Scratch s;
  const auto r = sweep(s.config("s.yaml", "task: gravitating_solve\noutput: sG\ninputs:\n  model: gauged_sigma\n  N: 2\n"
                                          "  G: {values: [0.0002, 0.0005, 0.001, 0.002]}\n"));
  REQUIRE(r.code == 0);
  const json d = results(s.out("sG"));
  REQUIRE(d["rows"].size() == 4);
  const auto& rows = d["rows"];
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const double slope = (rows[i]["diagnostics"]["total_curvature"].get<double>() -
                          rows[0]["diagnostics"]["total_curvature"].get<double>()) /
                         (rows[i]["value"].get<double>() - rows[0]["value"].get<double>());
    CHECK(slope == doctest::Approx(8.0 * M_PI * M_PI * 2.0 * 2.0).epsilon(2e-2));
  }
}

TEST_CASE("sweep records row failures and keeps going") {
  Scratch s;
  const auto r = sweep(s.config("s.yaml", "task: compact_solve\noutput: sL\ninputs:\n  model: ah_classical\n"
                                          "  L: {values: [3, 10]}\n  points: [[1, 1]]\n  multiplicities: [1]\n"
                                          "grid: {n: 32}\n"));
  REQUIRE(r.code == 0);
  const json d = results(s.out("sL"));
  CHECK(d["rows"][0]["status"] == "failed");
  CHECK(d["rows"][0]["error"]["kind"] == "solvability");
  CHECK(d["rows"][1]["status"] == "ok");
  CHECK(d["sweep"]["failed"] == 1);
}

TEST_CASE("empty sweep range gives an empty table") {
  Scratch s;
  const auto r = sweep(s.config("s.yaml", "task: anisotropic_torus_minimum\noutput: empty\n"
                                          "inputs: {gamma: {sweep: {from: 1, to: 2, count: 0}}}\n"));
  REQUIRE(r.code == 0);
  CHECK(results(s.out("empty"))["rows"].empty());
  CHECK(csv_rows(s.out("empty") / "sweep.csv").size() == 1);
}

TEST_CASE("two swept parameters are rejected") {
  Scratch s;
  const auto cfg = s.config("s.yaml", "task: anisotropic_torus_minimum\noutput: two\n"
                                      "inputs: {kappa1: {values: [1, 2]}, kappa2: {values: [1, 2]}}\n");
  CHECK(sweep(cfg).code == 2);
  CHECK_FALSE(fs::exists(s.out("two")));
  // a plain run refuses a swept config too
  CHECK(run(s.config("t.yaml", "task: anisotropic_torus_minimum\ninputs: {gamma: {values: [1]}}\n")).code == 2);
}

TEST_CASE("validate checks without running") {
  Scratch s;
  std::ostringstream o, e;
  CHECK(validate_command(s.config("v.yaml", "task: radial_solve\ninputs: {model: ah_classical}\n"), o, e) == 0);
  CHECK(json::parse(o.str())["status"] == "valid");
  CHECK(validate_command(s.config("w.yaml", "task: radial_solve\ninputs: {model: ah_classical, n: 3}\n"), o, e) == 2);
  CHECK_FALSE(fs::exists(s.root / "out"));
}

TEST_CASE("argv front end") {
  Scratch s;
  std::ostringstream o, e;
  const std::string cfg = s.config("a.yaml", "task: topological_bounds\noutput: fe\n").string();
  std::vector<std::string> args = {"curvlab", "run", cfg};
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  CHECK(cli_main(static_cast<int>(argv.size()), argv.data(), o, e) == 0);
  CHECK(fs::exists(s.out("fe") / "results.json"));
  std::vector<std::string> none = {"curvlab"};
  std::vector<char*> argv2 = {none[0].data()};
  CHECK(cli_main(1, argv2.data(), o, e) == 1);
}

TEST_CASE("every task runs with its defaults or a minimal input") {
  Scratch s;
  const std::vector<std::pair<std::string, std::string>> cases = {
      {"gauss_bonnet", "grid: {n_u: 32, n_v: 32}"},
      {"helfrich_torus", "grid: {n: 32}"},
      {"helfrich_scan", "grid: {n_a: 20, n_tau: 20}"},
      {"torus_minimum", ""},
      {"sphere_minimum", "inputs: {c0: -1, p: 1, lambda: 0.5}"},
      {"shape_residual", "inputs: {c0: -1, p: 1, lambda: 0.5}\ngrid: {n: 32}"},
      {"nirenberg_flow", "grid: {n: 16, steps: 50}"},
      {"letelier_strings", "inputs: {points: [[0, 0], [1, 0]], strengths: [1, 2], G: 0.01}"},
      {"sigma_strings", "inputs: {poles: [[0, 0]], G: 0.001}"},
      {"completeness", "inputs: {N: 2, G: 0.01}"},
      {"model_check", "inputs: {model: sinh_beta}"},
      {"planar_solve", "inputs: {model: ah_classical, N: 1}\ngrid: {R: 6, h: 0.25}"},
  };
  for (const auto& [task, body] : cases) {
    CAPTURE(task);
    const auto r = run(s.config(task + ".yaml", "task: " + task + "\noutput: " + task + "\n" + body + "\n"));
    CAPTURE(r.err);
    CHECK(r.code == 0);
    CHECK(results(s.out(task))["task"] == task);
  }
}
