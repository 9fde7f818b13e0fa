#include "cache.hpp"

#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>

#include "config.hpp"

namespace furst::app {

std::optional<nlohmann::json> ResultCache::get(const std::string& key) const {
  std::shared_lock lock(mutex_);
  const auto path = path_for(key);
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream text;
  text << in.rdbuf();
  try {
    auto entry = nlohmann::json::parse(text.str());
    const auto& payload = entry.at("payload");
    if (entry.at("key").get<std::string>() == key &&
        entry.at("checksum").get<std::string>() == sha256_hex(payload.dump())) {
      return payload;
    }
  } catch (const nlohmann::json::exception&) {
  }
  std::cerr << "warning: corrupt cache entry " << path.string() << "; recomputing\n";
  return std::nullopt;
}

void ResultCache::put(const std::string& key, const nlohmann::json& payload) {
  std::unique_lock lock(mutex_);
  std::filesystem::create_directories(dir_);
  const nlohmann::json entry{{"key", key}, {"checksum", sha256_hex(payload.dump())}, {"payload", payload}};
  const auto path = path_for(key);
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << entry.dump();
    if (!out) throw std::runtime_error("cannot write cache entry " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace furst::app
