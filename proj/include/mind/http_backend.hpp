#pragma once

#include <chrono>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>

#include "mind/backend.hpp"
#include "mind/hashing.hpp"
#include "mind/jsonl.hpp"

namespace mind {

namespace detail {

struct SplitUrl {
  std::string base;  // scheme://host[:port]
  std::string path;
};

inline SplitUrl split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw Error(ErrorKind::ConfigError, "endpoint must be an absolute http(s) URL: " + url);
  }
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

inline std::string image_mime(const std::string& ref) {
  auto ends_with = [&](std::string_view ext) {
    if (ref.size() < ext.size()) return false;
    std::string tail = ref.substr(ref.size() - ext.size());
    for (auto& c : tail) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return tail == ext;
  };
  if (ends_with(".jpg") || ends_with(".jpeg")) return "image/jpeg";
  if (ends_with(".gif")) return "image/gif";
  if (ends_with(".webp")) return "image/webp";
  return "image/png";
}

inline std::string image_url(const std::string& ref) {
  if (is_remote_image_ref(ref)) return ref;
  return "data:" + image_mime(ref) + ";base64," + base64_encode(read_image_bytes(ref));
}

}  // namespace detail

/// OpenAI-compatible chat-completions request body. Images travel as
/// base64 data URLs read from disk at call time.
inline json build_chat_request(const BackendConfig& config, const std::vector<ChatMessage>& messages) {
  json msgs = json::array();
  for (const auto& m : messages) {
    json entry = {{"role", std::string(to_string(m.role))}};
    if (m.images.empty()) {
      entry["content"] = m.text;
    } else {
      json parts = json::array();
      if (!m.text.empty()) parts.push_back({{"type", "text"}, {"text", m.text}});
      for (const auto& img : m.images) {
        parts.push_back({{"type", "image_url"}, {"image_url", {{"url", detail::image_url(img)}}}});
      }
      entry["content"] = std::move(parts);
    }
    msgs.push_back(std::move(entry));
  }
  return {{"model", config.model_name}, {"messages", std::move(msgs)}, {"temperature", config.temperature}};
}

/// Pulls the assistant text out of a chat-completions response body.
inline std::string extract_response_text(const std::string& body) {
  json j;
  try {
    j = json::parse(body);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::TransportError, std::string("malformed response body: ") + e.what());
  }
  if (!j.contains("choices") || !j.at("choices").is_array() || j.at("choices").empty()) {
    throw Error(ErrorKind::EmptyResponse, "response has no choices");
  }
  const json& msg = j.at("choices").at(0).value("message", json::object());
  const json content = msg.value("content", json());
  std::string text;
  if (content.is_string()) {
    text = content.get<std::string>();
  } else if (content.is_array()) {
    for (const auto& part : content) {
      if (part.is_object() && part.value("type", "") == "text") text += part.value("text", "");
    }
  }
  if (text.empty()) throw Error(ErrorKind::EmptyResponse, "assistant message has no text");
  return text;
}

class HttpBackend final : public ChatBackend {
 public:
  explicit HttpBackend(BackendConfig config) : config_(std::move(config)), url_(detail::split_url(config_.endpoint)) {
    if (config_.api_key.empty()) {
      if (const char* key = std::getenv("MIND_API_KEY")) config_.api_key = key;
    }
  }

  std::string complete(const std::vector<ChatMessage>& messages) override {
    const std::string body = build_chat_request(config_, messages).dump();
    httplib::Headers headers;
    if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);

    std::string last_error;
    bool timed_out = false;
    const int attempts = std::max(1, config_.max_attempts);
    for (int attempt = 0; attempt < attempts; ++attempt) {
      if (attempt > 0) std::this_thread::sleep_for(config_.backoff_base * (1 << (attempt - 1)));
      httplib::Client client(url_.base);
      const auto secs = std::chrono::duration_cast<std::chrono::seconds>(config_.timeout);
      const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(config_.timeout - secs);
      client.set_connection_timeout(secs.count(), usecs.count());
      client.set_read_timeout(secs.count(), usecs.count());
      client.set_write_timeout(secs.count(), usecs.count());

      auto res = client.Post(url_.path, headers, body, "application/json");
      if (!res) {
        const auto err = res.error();
        timed_out = err == httplib::Error::ConnectionTimeout || err == httplib::Error::Read;
        last_error = httplib::to_string(err);
        continue;
      }
      if (res->status < 200 || res->status >= 300) {
        throw Error(ErrorKind::BadStatus, std::to_string(res->status) + " from " + config_.endpoint);
      }
      return extract_response_text(res->body);
    }
    throw Error(timed_out ? ErrorKind::Timeout : ErrorKind::TransportError,
                last_error + " after " + std::to_string(attempts) + " attempts to " + config_.endpoint);
  }

 private:
  BackendConfig config_;
  detail::SplitUrl url_;
};

}  // namespace mind
