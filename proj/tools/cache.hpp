#pragma once

#include <filesystem>
#include <optional>
#include <shared_mutex>
#include <string>

#include <json.hpp>

namespace furst::app {

/// Content-addressed store of task results under <dir>/<key>.json. Each entry
/// carries a SHA-256 checksum of its payload; a corrupt entry is reported on
/// stderr and treated as a miss. Concurrent reads, exclusive writes.
class ResultCache {
 public:
  explicit ResultCache(std::filesystem::path dir) : dir_(std::move(dir)) {}

  std::optional<nlohmann::json> get(const std::string& key) const;
  void put(const std::string& key, const nlohmann::json& payload);
  std::filesystem::path path_for(const std::string& key) const { return dir_ / (key + ".json"); }

 private:
  std::filesystem::path dir_;
  mutable std::shared_mutex mutex_;
};

}  // namespace furst::app
