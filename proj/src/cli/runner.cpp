#include "cli/runner.hpp"

#include "cli/config.hpp"
#include "cli/tasks.hpp"
#include "curvlab/errors.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <set>
#include <thread>
#include <unistd.h>

namespace curvlab::cli {

namespace fs = std::filesystem;

namespace {

constexpr const char* version = "0.1.0";

std::string num(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string csv_quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c == '\n' ? ' ' : c;
  }
  return out + "\"";
}

struct Failure {
  int code;
  std::string kind;
  std::string message;
};

Failure classify(const std::exception& e) {
  if (dynamic_cast<const ValidationError*>(&e)) return {validation, "validation", e.what()};
  if (dynamic_cast<const SolvabilityError*>(&e)) return {solver, "solvability", e.what()};
  if (dynamic_cast<const SolverError*>(&e)) return {solver, "solver", e.what()};
  if (dynamic_cast<const InconsistencyError*>(&e)) return {solver, "inconsistency", e.what()};
  if (dynamic_cast<const IoError*>(&e)) return {io, "io", e.what()};
  if (dynamic_cast<const fs::filesystem_error*>(&e)) return {io, "io", e.what()};
  return {solver, "internal", e.what()};
}

int report(const Failure& f, std::ostream& err, const std::string& hash = "") {
  json rec = {{"status", "error"}, {"error", f.kind}, {"exit_code", f.code}, {"message", f.message}};
  if (!hash.empty()) rec["config_hash"] = hash;
  err << rec.dump() << "\n";
  return f.code;
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream o(p, std::ios::binary);
  o << text;
  o.close();
  if (!o) throw IoError("cannot write " + p.string());
}

std::string table_csv(const Table& t, const std::string& hash) {
  std::string s = "# config_hash: " + hash + "\n";
  if (!t.header.is_null()) s += "# " + t.header.dump() + "\n";
  for (std::size_t c = 0; c < t.columns.size(); ++c) s += (c ? "," : "") + t.columns[c];
  s += "\n";
  for (const auto& row : t.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) s += (c ? "," : "") + num(row[c]);
    s += "\n";
  }
  return s;
}

std::string plot_script(const std::vector<std::pair<std::string, std::vector<std::string>>>& tables,
                        const std::string& hash) {
  std::string s = "#!/usr/bin/env python3\n# config_hash: " + hash +
                  "\n# Plots every CSV of this run next to it as PNG. Needs matplotlib.\n"
                  "import csv, os\nimport matplotlib\nmatplotlib.use('Agg')\nimport matplotlib.pyplot as plt\n\n"
                  "HERE = os.path.dirname(os.path.abspath(__file__))\nTABLES = [\n";
  for (const auto& [name, cols] : tables) {
    s += "    ('" + name + "', [";
    for (std::size_t i = 0; i < cols.size(); ++i) s += (i ? ", '" : "'") + cols[i] + "'";
    s += "]),\n";
  }
  s += "]\n\n"
       "def load(name):\n"
       "    with open(os.path.join(HERE, name + '.csv')) as f:\n"
       "        rows = [r for r in csv.reader(f) if r and not r[0].startswith('#')]\n"
       "    head, body = rows[0], rows[1:]\n"
       "    cols = list(zip(*body)) if body else [[] for _ in head]\n"
       "    out = {}\n"
       "    for h, c in zip(head, cols):\n"
       "        try:\n"
       "            out[h] = [float(x) for x in c]\n"
       "        except ValueError:\n"
       "            out[h] = list(c)\n"
       "    return out\n\n"
       "for name, cols in TABLES:\n"
       "    d = load(name)\n"
       "    fig, ax = plt.subplots()\n"
       "    if cols[:2] == ['x', 'y']:\n"
       "        sc = ax.scatter(d['x'], d['y'], c=d[cols[2]], s=2)\n"
       "        fig.colorbar(sc, label=cols[2])\n"
       "        ax.set_aspect('equal')\n"
       "    else:\n"
       "        for c in cols[1:]:\n"
       "            if d[c] and isinstance(d[c][0], float):\n"
       "                ax.plot(d[cols[0]], d[c], label=c)\n"
       "        ax.set_xlabel(cols[0])\n"
       "        ax.legend()\n"
       "    ax.set_title(name)\n"
       "    fig.savefig(os.path.join(HERE, name + '.png'), dpi=120)\n";
  return s;
}

// Writes into a sibling staging directory and renames it into place, so a
// failed write never leaves a partial run behind.
class Staging {
public:
  explicit Staging(fs::path target) : target_(std::move(target)) {
    if (fs::exists(target_)) {
      if (!fs::is_directory(target_)) throw IoError("output path exists and is not a directory: " + target_.string());
      if (!fs::is_empty(target_) && !fs::exists(target_ / "results.json"))
        throw IoError("refusing to replace non-empty directory without results.json: " + target_.string());
    }
    const fs::path parent = target_.has_parent_path() ? target_.parent_path() : fs::path(".");
    std::error_code ec;
    fs::create_directories(parent, ec);
    if (ec) throw IoError("cannot create " + parent.string() + ": " + ec.message());
    dir_ = parent / (target_.filename().string() + ".partial-" + std::to_string(::getpid()));
    fs::remove_all(dir_, ec);
    if (!fs::create_directory(dir_, ec) || ec) throw IoError("cannot create " + dir_.string());
  }
  ~Staging() {
    std::error_code ec;
    if (!committed_) fs::remove_all(dir_, ec);
  }
  const fs::path& dir() const { return dir_; }
  void commit() {
    std::error_code ec;
    fs::remove_all(target_, ec);
    fs::rename(dir_, target_, ec);
    if (ec) throw IoError("cannot move results into " + target_.string() + ": " + ec.message());
    committed_ = true;
  }

private:
  fs::path target_, dir_;
  bool committed_ = false;
};

json result_document(const RunConfig& c, const TaskResult& r, const std::vector<std::string>& artifacts) {
  return {{"status", "ok"},
          {"task", c.task},
          {"config_hash", c.hash},
          {"config", c.canonical},
          {"curvlab_version", version},
          {"diagnostics", r.diagnostics},
          {"provenance", r.provenance},
          {"warnings", r.warnings},
          {"artifacts", artifacts}};
}

void emit(const RunConfig& c, const TaskResult& r, const fs::path& target) {
  Staging st(target);
  std::vector<std::string> files;
  std::vector<std::pair<std::string, std::vector<std::string>>> plots;
  for (const auto& t : r.tables) {
    write_file(st.dir() / (t.name + ".csv"), table_csv(t, c.hash));
    files.push_back(t.name + ".csv");
    plots.emplace_back(t.name, t.columns);
  }
  if (!plots.empty()) {
    write_file(st.dir() / "plot.py", plot_script(plots, c.hash));
    files.push_back("plot.py");
  }
  files.push_back("results.json");
  write_file(st.dir() / "results.json", result_document(c, r, files).dump(2) + "\n");
  st.commit();
}

RunConfig load(const fs::path& p) { return load_config(p); }

} // namespace

int run_command(const fs::path& path, std::ostream& out, std::ostream& err) {
  std::string hash;
  try {
    const RunConfig c = load(path);
    hash = c.hash;
    if (!find_sweeps(c).empty()) throw ValidationError("config declares a sweep; use `curvlab sweep`");
    Runner run = prepare_task(c);
    const TaskResult r = run();
    const fs::path target = resolve_output(c);
    emit(c, r, target);
    out << target.string() << "\n";
    return ok;
  } catch (const std::exception& e) {
    return report(classify(e), err, hash);
  }
}

int validate_command(const fs::path& path, std::ostream& out, std::ostream& err) {
  std::string hash;
  try {
    const RunConfig c = load(path);
    hash = c.hash;
    const auto axes = find_sweeps(c);
    if (axes.size() > 1) throw ValidationError("more than one swept parameter");
    if (axes.empty()) {
      prepare_task(c);
    } else {
      find_task(c.task);
      for (double v : axes[0].values) prepare_task(with_value(c, axes[0], v));
    }
    out << json{{"status", "valid"}, {"task", c.task}, {"config_hash", c.hash}}.dump() << "\n";
    return ok;
  } catch (const std::exception& e) {
    return report(classify(e), err, hash);
  }
}

int list_tasks_command(std::ostream& out) {
  for (const auto& t : task_registry()) out << t.name << "\t" << t.summary << "\n";
  return ok;
}

int sweep_command(const fs::path& path, std::ostream& out, std::ostream& err, int threads) {
  std::string hash;
  try {
    const RunConfig c = load(path);
    hash = c.hash;
    const auto axes = find_sweeps(c);
    if (axes.size() != 1)
      throw ValidationError("a sweep needs exactly one swept parameter, found " + std::to_string(axes.size()));
    find_task(c.task);
    const SweepAxis& axis = axes[0];
    const std::size_t n = axis.values.size();

    struct Row {
      bool ok = false;
      json diagnostics;
      Failure failure{0, "", ""};
    };
    std::vector<Row> rows(n);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          const TaskResult r = prepare_task(with_value(c, axis, axis.values[i]))();
          rows[i].ok = true;
          rows[i].diagnostics = r.diagnostics;
        } catch (const std::exception& e) {
          rows[i].failure = classify(e);
        }
      }
    };
    int nt = threads > 0 ? threads : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    nt = static_cast<int>(std::min<std::size_t>(nt, std::max<std::size_t>(n, 1)));
    std::vector<std::thread> pool;
    for (int t = 1; t < nt; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    // scalar diagnostics become columns
    std::set<std::string> cols;
    for (const auto& r : rows)
      if (r.ok)
        for (const auto& [k, v] : r.diagnostics.items())
          if ((v.is_number() || v.is_boolean()) && k != axis.key) cols.insert(k);
    std::string csv = "# config_hash: " + c.hash + "\n" + axis.key + ",status";
    for (const auto& k : cols) csv += "," + k;
    csv += ",error\n";
    json table = json::array();
    int failed = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const Row& r = rows[i];
      csv += num(axis.values[i]) + (r.ok ? ",ok" : ",failed");
      for (const auto& k : cols) {
        csv += ",";
        if (r.ok && r.diagnostics.contains(k)) {
          const json& v = r.diagnostics.at(k);
          csv += v.is_boolean() ? (v.get<bool>() ? "1" : "0") : num(v.get<double>());
        }
      }
      csv += "," + (r.ok ? std::string() : csv_quote(r.failure.kind + ": " + r.failure.message)) + "\n";
      json entry = {{"value", axis.values[i]}, {"status", r.ok ? "ok" : "failed"}};
      if (r.ok)
        entry["diagnostics"] = r.diagnostics;
      else
        entry["error"] = {{"kind", r.failure.kind}, {"exit_code", r.failure.code}, {"message", r.failure.message}};
      failed += r.ok ? 0 : 1;
      table.push_back(entry);
    }

    const fs::path target = resolve_output(c);
    Staging st(target);
    write_file(st.dir() / "sweep.csv", csv);
    std::vector<std::string> plot_cols = {axis.key};
    for (const auto& k : cols) plot_cols.push_back(k);
    write_file(st.dir() / "plot.py", plot_script({{"sweep", plot_cols}}, c.hash));
    const json doc = {{"status", "ok"},
                      {"task", c.task},
                      {"config_hash", c.hash},
                      {"config", c.canonical},
                      {"curvlab_version", version},
                      {"sweep", {{"section", axis.section}, {"key", axis.key}, {"count", n}, {"failed", failed}}},
                      {"rows", table},
                      {"artifacts", {"sweep.csv", "plot.py", "results.json"}}};
    write_file(st.dir() / "results.json", doc.dump(2) + "\n");
    st.commit();
    out << target.string() << "\n";
    return ok;
  } catch (const std::exception& e) {
    return report(classify(e), err, hash);
  }
}

int cli_main(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"curvlab: curvature and vortex-string computations"};
  app.require_subcommand(1);
  std::string config;
  int threads = 0;
  auto* run = app.add_subcommand("run", "run one task from a config file");
  run->add_option("config", config, "YAML config")->required();
  auto* sweep = app.add_subcommand("sweep", "run a config with one swept parameter");
  sweep->add_option("config", config, "YAML config")->required();
  sweep->add_option("-j,--threads", threads, "worker threads (default: hardware)")->check(CLI::NonNegativeNumber);
  auto* val = app.add_subcommand("validate", "check a config without running it");
  val->add_option("config", config, "YAML config")->required();
  auto* list = app.add_subcommand("list-tasks", "print the task names");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return ok;
    }
    err << e.what() << "\n" << app.help();
    return usage;
  }
  if (*run) return run_command(config, out, err);
  if (*sweep) return sweep_command(config, out, err, threads);
  if (*val) return validate_command(config, out, err);
  if (*list) return list_tasks_command(out);
  return usage;
}

} // namespace curvlab::cli
