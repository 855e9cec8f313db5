#pragma once

#include "cli/config.hpp"

#include <cmath>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace curvlab::cli {

// Numeric range for an input; NaN bounds are open-ended.
struct Range {
  double lo = -HUGE_VAL, hi = HUGE_VAL;
  bool lo_open = false, hi_open = false;
};
inline Range positive() { return {0.0, HUGE_VAL, true, false}; }
inline Range nonnegative() { return {0.0, HUGE_VAL, false, false}; }
inline Range between(double lo, double hi) { return {lo, hi, false, false}; }
inline Range open_between(double lo, double hi) { return {lo, hi, true, true}; }

// One table of a config with usage tracking, so unread keys can be rejected.
class Params {
public:
  Params(const json& table, std::string section);

  bool has(const std::string& key) const;
  double number(const std::string& key, std::optional<double> fallback = std::nullopt, Range r = {});
  int integer(const std::string& key, std::optional<int> fallback = std::nullopt, Range r = {});
  std::string text(const std::string& key, std::optional<std::string> fallback, const std::vector<std::string>& choices);
  std::vector<double> numbers(const std::string& key);
  std::vector<std::pair<double, double>> pairs(const std::string& key);
  std::optional<std::pair<double, double>> pair(const std::string& key);
  void finish() const;  // throws on keys nobody read

private:
  const json& at(const std::string& key);
  json table_;
  std::string section_;
  std::set<std::string> used_;
};

struct TaskInputs {
  Params inputs, grid, tolerance;
  explicit TaskInputs(const RunConfig& c);
  void finish() const;
};

struct Table {
  std::string name;  // file stem
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  json header;  // written as a leading comment line when not null
};

struct TaskResult {
  json diagnostics = json::object();
  json provenance = json::object();
  std::vector<Table> tables;
  std::vector<std::string> warnings;
};

using Runner = std::function<TaskResult()>;

struct Task {
  std::string name;
  std::string summary;
  // Reads and range-checks every input, then returns the solve. Validation
  // errors surface here, before anything runs.
  std::function<Runner(TaskInputs&)> prepare;
};

const std::vector<Task>& task_registry();
const Task& find_task(const std::string& name);

// prepare + unknown-key check.
Runner prepare_task(const RunConfig& config);

} // namespace curvlab::cli
