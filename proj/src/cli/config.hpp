#pragma once

#include <json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace curvlab::cli {

using json = nlohmann::json;

// A parsed run configuration. The file is YAML:
//
//   task: radial_solve
//   output: runs/ah          # relative to CURVLAB_OUTPUT_ROOT when set
//   inputs: {model: ah_classical, N: 1}
//   grid: {n: 3001}
//   tolerance: {tol: 1.0e-10}
//
// `canonical` is the whole document as JSON with sorted keys; its SHA-256 is
// the config hash carried by every artifact.
struct RunConfig {
  std::string task;
  std::string output;
  json inputs = json::object();
  json grid = json::object();
  json tolerance = json::object();
  json canonical;
  std::string hash;
};

RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);

std::string sha256_hex(const std::string& data);

// Output directory after applying CURVLAB_OUTPUT_ROOT to a relative path.
std::filesystem::path resolve_output(const RunConfig& config);

// A swept input: `key: {sweep: {from, to, count, spacing: linear|log}}` or
// `key: {values: [...]}`.
struct SweepAxis {
  std::string section;  // inputs, grid or tolerance
  std::string key;
  std::vector<double> values;
};

// All declared sweep axes, in section/key order.
std::vector<SweepAxis> find_sweeps(const RunConfig& config);

// Copy of the config with the swept entry replaced by one value.
RunConfig with_value(const RunConfig& config, const SweepAxis& axis, double value);

} // namespace curvlab::cli
