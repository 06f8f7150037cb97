#pragma once

#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <unordered_map>

#include "mind/error.hpp"
#include "mind/jsonl.hpp"

namespace mind {

/// Append-only on-disk response cache (`responses.jsonl` under the cache
/// directory). Loaded once at open; every put is appended and flushed, so a
/// crashed run can be resumed from whatever reached the file.
class ResponseCache {
 public:
  explicit ResponseCache(std::filesystem::path dir) : path_(std::move(dir) / "responses.jsonl") {
    std::filesystem::create_directories(path_.parent_path());
    if (std::filesystem::exists(path_)) {
      for (auto& line : read_jsonl(path_)) {
        const json& v = line.value;
        if (v.is_object() && v.contains("key") && v.contains("response")) {
          entries_.insert_or_assign(v.at("key").get<std::string>(), v.at("response").get<std::string>());
        }
      }
    }
    out_.open(path_, std::ios::binary | std::ios::app);
    if (!out_) throw Error(ErrorKind::IoError, "cannot open cache file " + path_.string());
  }

  [[nodiscard]] std::optional<std::string> get(const std::string& key) const {
    std::shared_lock lock(mutex_);
    auto it = entries_.find(key);
    if (it == entries_.end()) return std::nullopt;
    return it->second;
  }

  void put(const std::string& key, const std::string& response) {
    std::unique_lock lock(mutex_);
    if (!entries_.insert_or_assign(key, response).second) return;
    out_ << json{{"key", key}, {"response", response}}.dump() << '\n';
    out_.flush();
  }

  [[nodiscard]] std::size_t size() const {
    std::shared_lock lock(mutex_);
    return entries_.size();
  }

  [[nodiscard]] const std::filesystem::path& path() const noexcept { return path_; }

 private:
  std::filesystem::path path_;
  mutable std::shared_mutex mutex_;
  std::unordered_map<std::string, std::string> entries_;
  std::ofstream out_;
};

}  // namespace mind
