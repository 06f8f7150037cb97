#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mind/error.hpp"
#include "mind/hashing.hpp"
#include "mind/jsonl.hpp"

namespace mind {

enum class Role { System, User, Assistant };

constexpr std::string_view to_string(Role role) noexcept {
  switch (role) {
    case Role::System: return "system";
    case Role::User: return "user";
    case Role::Assistant: return "assistant";
  }
  return "user";
}

struct ChatMessage {
  Role role = Role::User;
  std::string text;
  std::vector<std::string> images;  // image_ref values, in attachment order

  friend bool operator==(const ChatMessage&, const ChatMessage&) = default;
};

enum class BackendKind { Http, Mock };

struct BackendConfig {
  BackendKind kind = BackendKind::Mock;
  std::string endpoint;  // full chat-completions URL, http kind only
  std::string model_name = "mock";
  double temperature = 0.0;
  std::chrono::milliseconds timeout{60'000};
  std::size_t max_inflight = 4;
  int max_attempts = 3;
  std::chrono::milliseconds backoff_base{500};
  std::string api_key;  // filled from MIND_API_KEY when empty
  std::filesystem::path mock_scenario;
};

/// Which agent issued a call. `reasoner` covers the single-call ablations
/// that replace the debate (no_rid, no_iai).
enum class AgentRole { DerivingFwd, DerivingBack, DebaterFwd, DebaterBack, Judge, Reasoner, Baseline };

constexpr std::string_view to_string(AgentRole role) noexcept {
  switch (role) {
    case AgentRole::DerivingFwd: return "deriving_fwd";
    case AgentRole::DerivingBack: return "deriving_back";
    case AgentRole::DebaterFwd: return "debater_fwd";
    case AgentRole::DebaterBack: return "debater_back";
    case AgentRole::Judge: return "judge";
    case AgentRole::Reasoner: return "reasoner";
    case AgentRole::Baseline: return "baseline";
  }
  return "baseline";
}

inline std::optional<AgentRole> parse_agent_role(std::string_view s) {
  for (auto r : {AgentRole::DerivingFwd, AgentRole::DerivingBack, AgentRole::DebaterFwd, AgentRole::DebaterBack,
                 AgentRole::Judge, AgentRole::Reasoner, AgentRole::Baseline}) {
    if (to_string(r) == s) return r;
  }
  return std::nullopt;
}

struct CallRecord {
  std::size_t sequence_no = 0;
  AgentRole agent_role = AgentRole::Baseline;
  int attempt = 1;  // 2 for a format-retry
  std::string prompt_hash;
  std::string response_text;
  bool cached = false;
  double latency_ms = 0.0;
};

// ---------------------------------------------------------------------------
// Images

inline bool is_remote_image_ref(std::string_view ref) {
  return ref.starts_with("http://") || ref.starts_with("https://") || ref.starts_with("data:");
}

inline std::filesystem::path local_image_path(std::string_view ref) {
  if (ref.starts_with("file://")) ref.remove_prefix(7);
  return std::filesystem::path(std::string(ref));
}

inline std::string read_image_bytes(std::string_view ref) {
  const auto path = local_image_path(ref);
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) {
    throw Error(ErrorKind::UnreadableImage, std::string(ref));
  }
  try {
    return read_text_file(path);
  } catch (const Error&) {
    throw Error(ErrorKind::UnreadableImage, std::string(ref));
  }
}

/// Digest of an image's content. Remote references cannot be fetched
/// here, so the reference string itself stands in for the bytes.
inline std::string image_digest(std::string_view ref) {
  if (is_remote_image_ref(ref)) return sha256_hex(std::string("ref:") + std::string(ref));
  return sha256_hex(read_image_bytes(ref));
}

/// Content hash of a request: model name, each message's role and text,
/// and the digest of every attached image's bytes.
inline std::string cache_key(std::string_view model_name, const std::vector<ChatMessage>& messages) {
  Sha256 h;
  h.field("mind-cache-v1").field(model_name).field(std::to_string(messages.size()));
  for (const auto& m : messages) {
    h.field(to_string(m.role)).field(m.text).field(std::to_string(m.images.size()));
    for (const auto& img : m.images) h.field(image_digest(img));
  }
  return h.hex();
}

/// Flat text of a request, used by the mock's substring matchers.
inline std::string render_for_matching(const std::vector<ChatMessage>& messages) {
  std::string out;
  for (const auto& m : messages) {
    out += to_string(m.role);
    out += ": ";
    out += m.text;
    out += '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------
// Backends

class ChatBackend {
 public:
  virtual ~ChatBackend() = default;
  virtual std::string complete(const std::vector<ChatMessage>& messages) = 0;
};

/// Counting limiter on outstanding backend requests.
class AdmissionGate {
 public:
  explicit AdmissionGate(std::size_t limit) : limit_(limit == 0 ? 1 : limit) {}

  void acquire() {
    std::unique_lock lock(mutex_);
    cv_.wait(lock, [&] { return inflight_ < limit_; });
    ++inflight_;
  }

  void release() {
    {
      std::lock_guard lock(mutex_);
      --inflight_;
    }
    cv_.notify_one();
  }

 private:
  std::size_t limit_;
  std::size_t inflight_ = 0;
  std::mutex mutex_;
  std::condition_variable cv_;
};

class ResponseCache;

struct Completion {
  std::string text;
  std::string prompt_hash;
  bool cached = false;
  double latency_ms = 0.0;
};

/// Shared handle used by every agent: cache lookup, admission control,
/// then the backend. Safe to use from many sample workers at once.
class LmmClient {
 public:
  LmmClient(std::shared_ptr<ChatBackend> backend, BackendConfig config,
            std::shared_ptr<ResponseCache> cache = nullptr);

  Completion complete(const std::vector<ChatMessage>& messages);

  [[nodiscard]] const BackendConfig& config() const noexcept { return config_; }
  [[nodiscard]] std::size_t backend_calls() const noexcept { return backend_calls_.load(); }
  [[nodiscard]] std::size_t cache_hits() const noexcept { return cache_hits_.load(); }

 private:
  std::shared_ptr<ChatBackend> backend_;
  BackendConfig config_;
  std::shared_ptr<ResponseCache> cache_;
  AdmissionGate gate_;
  std::atomic<std::size_t> backend_calls_{0};
  std::atomic<std::size_t> cache_hits_{0};
};

/// Per-sample call log; assigns gapless sequence numbers.
class CallLog {
 public:
  std::string call(LmmClient& client, AgentRole role, const std::vector<ChatMessage>& messages, int attempt = 1) {
    Completion c = client.complete(messages);
    std::lock_guard lock(mutex_);
    records_.push_back(CallRecord{records_.size() + 1, role, attempt, c.prompt_hash, c.text, c.cached, c.latency_ms});
    return c.text;
  }

  [[nodiscard]] std::vector<CallRecord> records() const {
    std::lock_guard lock(mutex_);
    return records_;
  }

  [[nodiscard]] std::size_t size() const {
    std::lock_guard lock(mutex_);
    return records_.size();
  }

 private:
  mutable std::mutex mutex_;
  std::vector<CallRecord> records_;
};

inline void validate_messages(const std::vector<ChatMessage>& messages) {
  if (messages.empty()) throw Error(ErrorKind::InvalidMessage, "empty message list");
  for (const auto& m : messages) {
    if (m.text.empty() && m.images.empty()) {
      throw Error(ErrorKind::InvalidMessage, "message with neither text nor images");
    }
  }
}

}  // namespace mind

#include "mind/response_cache.hpp"

namespace mind {

inline LmmClient::LmmClient(std::shared_ptr<ChatBackend> backend, BackendConfig config,
                            std::shared_ptr<ResponseCache> cache)
    : backend_(std::move(backend)), config_(std::move(config)), cache_(std::move(cache)), gate_(config_.max_inflight) {}

inline Completion LmmClient::complete(const std::vector<ChatMessage>& messages) {
  validate_messages(messages);
  Completion out;
  out.prompt_hash = cache_key(config_.model_name, messages);
  const auto start = std::chrono::steady_clock::now();
  if (cache_) {
    if (auto hit = cache_->get(out.prompt_hash)) {
      ++cache_hits_;
      out.text = std::move(*hit);
      out.cached = true;
      return out;
    }
  }
  gate_.acquire();
  try {
    ++backend_calls_;
    out.text = backend_->complete(messages);
  } catch (...) {
    gate_.release();
    throw;
  }
  gate_.release();
  out.latency_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  if (out.text.find_first_not_of(" \t\r\n") == std::string::npos) {
    throw Error(ErrorKind::EmptyResponse, "backend returned an empty response");
  }
  if (cache_) cache_->put(out.prompt_hash, out.text);
  return out;
}

}  // namespace mind
