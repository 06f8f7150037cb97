#pragma once

#include <algorithm>
#include <cctype>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <map>
#include <string>

#include "mind/backend.hpp"
#include "mind/evaluation.hpp"
#include "mind/hashing.hpp"
#include "mind/pipeline.hpp"
#include "mind/prompts.hpp"
#include "mind/retrieval.hpp"

namespace mind {

/// Every knob of a run. Defaults: lambda_v=0.8, lambda_t=0.2, K=3,
/// temperature 0, full mode.
struct RunConfig {
  std::filesystem::path manifest;
  std::filesystem::path embeddings;
  std::filesystem::path index;  // optional prebuilt index for `retrieve`
  FusionWeights weights;
  std::size_t k = 3;
  Mode mode = Mode::Full;
  BackendConfig backend;
  PromptPaths prompts;
  std::size_t max_insights = 5;
  std::uint64_t seed = 0;
  std::size_t sample_parallelism = 4;
  bool cache = true;
  std::filesystem::path cache_dir;  // empty: <out>/cache
  std::filesystem::path out = "mind-out";
  std::string run_id;  // empty: derived from config hash + timestamp
  ErrorPolicy error_policy = ErrorPolicy::Incorrect;

  [[nodiscard]] std::filesystem::path effective_cache_dir() const {
    return cache_dir.empty() ? out / "cache" : cache_dir;
  }
};

namespace detail {

inline std::string trim_copy(std::string_view s) { return std::string(trim(s)); }

inline std::uint64_t parse_unsigned(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    if (!value.empty() && value[0] == '-') throw std::invalid_argument("negative");
    const auto v = std::stoull(value, &used);
    if (used != value.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorKind::ConfigError, key + ": expected a non-negative integer, got '" + value + "'");
  }
}

inline double parse_double(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorKind::ConfigError, key + ": expected a number, got '" + value + "'");
  }
}

inline bool parse_bool(const std::string& key, std::string value) {
  for (auto& c : value) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (value == "1" || value == "true" || value == "on" || value == "yes") return true;
  if (value == "0" || value == "false" || value == "off" || value == "no") return false;
  throw Error(ErrorKind::ConfigError, key + ": expected a boolean, got '" + value + "'");
}

}  // namespace detail

/// Sets one configuration key. Relative paths are resolved against `base`.
inline void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value,
                          const std::filesystem::path& base = {}) {
  auto path = [&] {
    std::filesystem::path p(value);
    return (p.is_relative() && !base.empty()) ? base / p : p;
  };
  if (key == "manifest") cfg.manifest = path();
  else if (key == "embeddings") cfg.embeddings = path();
  else if (key == "index") cfg.index = path();
  else if (key == "lambda_v") cfg.weights.lambda_v = detail::parse_double(key, value);
  else if (key == "lambda_t") cfg.weights.lambda_t = detail::parse_double(key, value);
  else if (key == "k") cfg.k = detail::parse_unsigned(key, value);
  else if (key == "mode") {
    auto m = parse_mode(value);
    if (!m) throw Error(ErrorKind::ConfigError, "mode: unknown '" + value + "'");
    cfg.mode = *m;
  } else if (key == "backend") {
    if (value == "mock") cfg.backend.kind = BackendKind::Mock;
    else if (value == "http") cfg.backend.kind = BackendKind::Http;
    else throw Error(ErrorKind::ConfigError, "backend: expected mock or http, got '" + value + "'");
  } else if (key == "endpoint") cfg.backend.endpoint = value;
  else if (key == "model") cfg.backend.model_name = value;
  else if (key == "temperature") cfg.backend.temperature = detail::parse_double(key, value);
  else if (key == "timeout_ms") cfg.backend.timeout = std::chrono::milliseconds(detail::parse_unsigned(key, value));
  else if (key == "max_inflight") cfg.backend.max_inflight = detail::parse_unsigned(key, value);
  else if (key == "max_attempts") cfg.backend.max_attempts = static_cast<int>(detail::parse_unsigned(key, value));
  else if (key == "backoff_ms") cfg.backend.backoff_base = std::chrono::milliseconds(detail::parse_unsigned(key, value));
  else if (key == "mock_scenario") cfg.backend.mock_scenario = path();
  else if (key == "prompts.deriving") cfg.prompts.deriving = path();
  else if (key == "prompts.debater") cfg.prompts.debater = path();
  else if (key == "prompts.judge") cfg.prompts.judge = path();
  else if (key == "prompts.baseline") cfg.prompts.baseline = path();
  else if (key == "max_insights") cfg.max_insights = detail::parse_unsigned(key, value);
  else if (key == "seed") cfg.seed = detail::parse_unsigned(key, value);
  else if (key == "sample_parallelism") cfg.sample_parallelism = detail::parse_unsigned(key, value);
  else if (key == "cache") cfg.cache = detail::parse_bool(key, value);
  else if (key == "cache_dir") cfg.cache_dir = path();
  else if (key == "out") cfg.out = path();
  else if (key == "run_id") cfg.run_id = value;
  else if (key == "error_policy") {
    if (value == "incorrect") cfg.error_policy = ErrorPolicy::Incorrect;
    else if (value == "harmless") cfg.error_policy = ErrorPolicy::Harmless;
    else throw Error(ErrorKind::ConfigError, "error_policy: expected incorrect or harmless, got '" + value + "'");
  } else {
    throw Error(ErrorKind::ConfigError, "unknown key '" + key + "'");
  }
}

inline void validate(const RunConfig& cfg) {
  cfg.weights.validate();
  if (cfg.max_insights == 0) throw Error(ErrorKind::ConfigError, "max_insights must be positive");
  if (cfg.sample_parallelism == 0) throw Error(ErrorKind::ConfigError, "sample_parallelism must be positive");
  if (cfg.backend.max_inflight == 0) throw Error(ErrorKind::ConfigError, "max_inflight must be positive");
  if (cfg.backend.kind == BackendKind::Http && cfg.backend.endpoint.empty()) {
    throw Error(ErrorKind::ConfigError, "http backend needs an endpoint");
  }
}

/// `key = value` lines; '#' starts a comment. Paths are relative to the
/// config file's directory.
inline void load_config_file(RunConfig& cfg, const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  const auto base = path.parent_path();
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    std::string line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (detail::trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorKind::ConfigError, path.string() + ":" + std::to_string(line_no) + ": expected key = value");
    }
    try {
      apply_setting(cfg, detail::trim_copy(line.substr(0, eq)), detail::trim_copy(line.substr(eq + 1)), base);
    } catch (const Error& e) {
      throw Error(ErrorKind::ConfigError, path.string() + ":" + std::to_string(line_no) + ": " + e.detail());
    }
  }
}

/// Hash over everything that can change a run's output.
inline std::string config_hash(const RunConfig& cfg) {
  Sha256 h;
  h.field(cfg.manifest.string()).field(cfg.embeddings.string());
  h.field(std::to_string(cfg.weights.lambda_v)).field(std::to_string(cfg.weights.lambda_t));
  h.field(std::to_string(cfg.k)).field(to_string(cfg.mode));
  h.field(cfg.backend.kind == BackendKind::Http ? "http" : "mock").field(cfg.backend.endpoint);
  h.field(cfg.backend.model_name).field(std::to_string(cfg.backend.temperature));
  h.field(cfg.backend.mock_scenario.string());
  h.field(cfg.prompts.deriving.string()).field(cfg.prompts.debater.string());
  h.field(cfg.prompts.judge.string()).field(cfg.prompts.baseline.string());
  h.field(std::to_string(cfg.max_insights)).field(std::to_string(cfg.seed));
  return h.hex();
}

inline std::string utc_timestamp(const char* format = "%Y%m%dT%H%M%SZ") {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, format, &tm);
  return buf;
}

inline std::string resolve_run_id(const RunConfig& cfg) {
  if (!cfg.run_id.empty()) return cfg.run_id;
  return config_hash(cfg).substr(0, 12) + "-" + utc_timestamp();
}

}  // namespace mind
