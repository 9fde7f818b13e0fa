#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "config.hpp"

namespace furst::app {

inline constexpr const char* kToolVersion = "0.1.0";

enum class ReportFormat { json, csv };

struct RunOptions {
  std::filesystem::path out_dir = "furst-out";
  bool use_cache = true;
  unsigned threads = 1;
  ReportFormat format = ReportFormat::json;
  std::optional<std::string> only_kind;  // run only tasks of this kind
};

struct TaskOutcome {
  std::size_t index = 0;
  std::string kind;
  json payload;              // {"table": ..., "pass": bool|null, "files": {...}}
  bool cache_hit = false;
  double seconds = 0;
  int exit_class = 0;        // 0 ok, 1 verdict failure, 2 config error, 3 resource cap
  std::string error;
};

struct RunResult {
  int exit_code = 0;
  std::vector<TaskOutcome> tasks;
};

/// Executes the selected tasks (independent tasks in parallel), writes the
/// report and any task files into out_dir, and returns the exit code.
RunResult run(const ExperimentConfig& cfg, const RunOptions& options);

/// Exact rational as {"num", "den", "decimal"}.
json rational_json(const Rational& r);

}  // namespace furst::app
