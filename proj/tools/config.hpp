#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "furst/cylinder.hpp"
#include "furst/moments.hpp"
#include "furst/oracle.hpp"
#include "furst/spectrum.hpp"

namespace furst::app {

using nlohmann::json;

/// Validation or parse failure, exit code 2. `where` is "line:col" when known.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& where, const std::string& what)
      : std::runtime_error(where.empty() ? what : where + ": " + what) {}
};

struct Tolerances {
  double eps = 0.05;         // subsequence / comparison / accordance
  double tau = 1e-3;         // upper-density attainment
  double rotation = 5e-3;    // rotation correspondence
  double sigmas = 4;         // Markov band
  double oracle = 1e-3;      // moment oracle agreement
  double normalization = 0;  // |normalization - 1|; 0 means exact
};

struct Caps {
  std::uint64_t window_bits = kDefaultWindowCap;
  std::uint64_t cylinders = 100000;
  std::uint64_t tuples = 1000000;
};

/// A named set; orbit sets are realized by the runner.
struct SetDef {
  struct Orbit {
    std::string system;
    OrbitStart start;
    std::int64_t lo = 0;
    std::int64_t hi = 0;
  };
  std::variant<SetSpec, Orbit> source;
};

struct DensityTask {
  std::string set;
  std::vector<CorrelationQuery> queries;
  Schedule schedule;
};
struct SpectrumTask {
  std::string set;
  int depth = 1;
  std::int64_t radius = 1;
  Schedule schedule;
};
struct CylindersTask {
  std::string set;
  int depth = 1;
  std::int64_t radius = 1;
  Schedule schedule;
  bool patterns = false;
};
struct VerifyTask {
  std::string system;
  OrbitStart start;
  std::vector<CorrelationQuery> queries;
  Schedule schedule;
};
struct CompareTask {
  std::string first;
  std::string second;
  int depth = 1;
  std::int64_t radius = 1;
  Schedule schedule;
  std::optional<Verdict> expect;
};
struct MomentsTask {
  std::vector<std::string> functions;
  std::string scheme;
  std::vector<MomentQuery> queries;
  Schedule schedule;
  int conj_depth = 3;
  bool oracle = false;
};
struct NormcheckTask {
  std::string scheme;
  Schedule schedule;
};
/// Writes a set's window in the bitmask format.
struct ExportTask {
  std::string set;
  Box window;
  std::string path;
};

using TaskParams = std::variant<DensityTask, SpectrumTask, CylindersTask, VerifyTask, CompareTask, MomentsTask,
                                NormcheckTask, ExportTask>;

struct Task {
  std::string kind;  // subcommand name
  TaskParams params;
  json canonical;    // normalized description, part of the cache key
};

struct ExperimentConfig {
  std::filesystem::path base_dir;
  GroupSpec group;
  FolnerSpec folner = FolnerSpec::interval(1);
  Schedule schedule;
  Tolerances tolerances;
  Caps caps;
  std::optional<std::uint64_t> seed;
  std::map<std::string, SetDef> sets;
  std::map<std::string, OracleSystem> systems;
  std::map<std::string, AveragingScheme> schemes;
  std::map<std::string, FunctionSpec> functions;
  std::vector<Task> tasks;
  json canonical;      // whole config after defaults and overrides
  std::string digest;  // SHA-256 of canonical
};

/// Parses and validates. `seed_override` replaces the config seed.
ExperimentConfig load_config(const std::filesystem::path& path, std::optional<std::uint64_t> seed_override = {});
ExperimentConfig parse_config(const std::string& text, const std::filesystem::path& base_dir,
                              std::optional<std::uint64_t> seed_override = {});

std::string sha256_hex(const std::string& data);

}  // namespace furst::app
