#include "cli/config.hpp"

#include "curvlab/errors.hpp"

#include <openssl/evp.h>
#include <yaml-cpp/yaml.h>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

namespace curvlab::cli {

namespace {

json scalar_to_json(const YAML::Node& node) {
  const std::string& s = node.Scalar();
  if (node.Tag() == "!") return s;  // quoted
  if (s == "true" || s == "True") return true;
  if (s == "false" || s == "False") return false;
  if (s == "null" || s == "~" || s.empty()) return nullptr;
  try {
    std::size_t used = 0;
    const long long i = std::stoll(s, &used);
    if (used == s.size()) return i;
  } catch (const std::exception&) {
  }
  try {
    std::size_t used = 0;
    const double d = std::stod(s, &used);
    if (used == s.size()) return d;
  } catch (const std::exception&) {
  }
  return s;
}

json yaml_to_json(const YAML::Node& node) {
  switch (node.Type()) {
  case YAML::NodeType::Null:
  case YAML::NodeType::Undefined:
    return nullptr;
  case YAML::NodeType::Scalar:
    return scalar_to_json(node);
  case YAML::NodeType::Sequence: {
    json a = json::array();
    for (const auto& item : node) a.push_back(yaml_to_json(item));
    return a;
  }
  case YAML::NodeType::Map: {
    json o = json::object();
    for (const auto& kv : node) {
      const std::string key = kv.first.as<std::string>();
      if (o.contains(key)) throw ValidationError("duplicate key '" + key + "'");
      o[key] = yaml_to_json(kv.second);
    }
    return o;
  }
  }
  return nullptr;
}

const std::set<std::string> top_keys = {"task", "output", "inputs", "grid", "tolerance"};
const std::set<std::string> sections = {"inputs", "grid", "tolerance"};

bool is_sweep(const json& v) { return v.is_object() && (v.contains("sweep") || v.contains("values")); }

std::vector<double> expand(const std::string& key, const json& v) {
  if (v.size() != 1) throw ValidationError("sweep '" + key + "': give exactly one of 'sweep' or 'values'");
  if (v.contains("values")) {
    const json& a = v.at("values");
    if (!a.is_array()) throw ValidationError("sweep '" + key + "': 'values' must be a list");
    std::vector<double> out;
    for (const auto& x : a) {
      if (!x.is_number()) throw ValidationError("sweep '" + key + "': values must be numbers");
      out.push_back(x.get<double>());
    }
    return out;
  }
  const json& s = v.at("sweep");
  if (!s.is_object()) throw ValidationError("sweep '" + key + "' must be a table");
  for (const auto& [k, _] : s.items())
    if (k != "from" && k != "to" && k != "count" && k != "spacing")
      throw ValidationError("sweep '" + key + "': unknown key '" + k + "'");
  if (!s.contains("from") || !s.contains("to") || !s.contains("count"))
    throw ValidationError("sweep '" + key + "' needs from, to and count");
  if (!s.at("from").is_number() || !s.at("to").is_number() || !s.at("count").is_number_integer())
    throw ValidationError("sweep '" + key + "': from/to must be numbers and count an integer");
  const double a = s.at("from").get<double>(), b = s.at("to").get<double>();
  const long long n = s.at("count").get<long long>();
  const std::string spacing = s.value("spacing", std::string("linear"));
  if (n < 0 || n > 100000) throw ValidationError("sweep '" + key + "': count must be in [0, 100000]");
  if (spacing != "linear" && spacing != "log")
    throw ValidationError("sweep '" + key + "': spacing must be linear or log");
  if (spacing == "log" && !(a > 0.0 && b > 0.0))
    throw ValidationError("sweep '" + key + "': log spacing needs positive end points");
  std::vector<double> out;
  for (long long i = 0; i < n; ++i) {
    const double t = n == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(n - 1);
    out.push_back(spacing == "log" ? std::exp(std::log(a) + t * (std::log(b) - std::log(a))) : a + t * (b - a));
  }
  return out;
}

} // namespace

std::string sha256_hex(const std::string& data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw InconsistencyError("SHA-256 digest failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

RunConfig parse_config(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw ValidationError(std::string("config is not valid YAML: ") + e.what());
  }
  if (!root.IsMap()) throw ValidationError("config must be a table of keys");
  const json doc = yaml_to_json(root);
  for (const auto& [k, _] : doc.items())
    if (!top_keys.count(k)) throw ValidationError("unknown top-level key '" + k + "'");
  RunConfig c;
  if (!doc.contains("task") || !doc.at("task").is_string()) throw ValidationError("config needs a string 'task'");
  c.task = doc.at("task").get<std::string>();
  if (doc.contains("output")) {
    if (!doc.at("output").is_string() || doc.at("output").get<std::string>().empty())
      throw ValidationError("'output' must be a non-empty path");
    c.output = doc.at("output").get<std::string>();
  } else {
    c.output = "curvlab_out/" + c.task;
  }
  for (const char* s : {"inputs", "grid", "tolerance"}) {
    if (!doc.contains(s) || doc.at(s).is_null()) continue;
    if (!doc.at(s).is_object()) throw ValidationError(std::string("'") + s + "' must be a table");
    (s == std::string("inputs") ? c.inputs : s == std::string("grid") ? c.grid : c.tolerance) = doc.at(s);
  }
  c.canonical = doc;
  c.hash = sha256_hex(doc.dump());
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::filesystem::path resolve_output(const RunConfig& c) {
  std::filesystem::path p(c.output);
  if (p.is_relative()) {
    if (const char* root = std::getenv("CURVLAB_OUTPUT_ROOT"); root && *root) p = std::filesystem::path(root) / p;
  }
  return p.lexically_normal();
}

std::vector<SweepAxis> find_sweeps(const RunConfig& c) {
  std::vector<SweepAxis> out;
  for (const char* s : {"inputs", "grid", "tolerance"}) {
    const json& t = s == std::string("inputs") ? c.inputs : s == std::string("grid") ? c.grid : c.tolerance;
    for (const auto& [k, v] : t.items())
      if (is_sweep(v)) out.push_back({s, k, expand(k, v)});
  }
  return out;
}

RunConfig with_value(const RunConfig& c, const SweepAxis& axis, double value) {
  RunConfig r = c;
  json& t = axis.section == "inputs" ? r.inputs : axis.section == "grid" ? r.grid : r.tolerance;
  // keep integers integral so integer inputs accept swept counts
  if (std::floor(value) == value && std::abs(value) < 1e15)
    t[axis.key] = static_cast<long long>(value);
  else
    t[axis.key] = value;
  return r;
}

} // namespace curvlab::cli
