#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <filesystem>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "mind/backend.hpp"
#include "mind/hashing.hpp"
#include "mind/jsonl.hpp"

namespace mind {

/// One scripted reply. A rule fires when every `needles` substring occurs
/// in the rendered prompt, or (bucket rules) when the prompt's FNV-1a hash
/// falls in bucket `bucket` of `buckets`.
struct MockRule {
  std::vector<std::string> needles;
  std::uint64_t bucket = 0;
  std::uint64_t buckets = 0;  // nonzero for a bucket rule
  bool is_default = false;
  std::string response;

  [[nodiscard]] bool matches(const std::string& prompt) const {
    if (is_default) return true;
    if (buckets != 0) return fnv1a64(prompt) % buckets == bucket;
    return std::all_of(needles.begin(), needles.end(),
                       [&](const std::string& n) { return prompt.find(n) != std::string::npos; });
  }
};

/// Ordered rule table. The default rule is the fallback whatever its
/// position in the file.
class MockScenario {
 public:
  explicit MockScenario(std::vector<MockRule> rules) : rules_(std::move(rules)) {
    auto it = std::find_if(rules_.begin(), rules_.end(), [](const MockRule& r) { return r.is_default; });
    if (it == rules_.end()) throw Error(ErrorKind::NoDefaultRule, "mock scenario has no default rule");
    fallback_ = static_cast<std::size_t>(it - rules_.begin());
  }

  [[nodiscard]] const std::string& respond(const std::string& prompt) const {
    for (const auto& rule : rules_) {
      if (!rule.is_default && rule.matches(prompt)) return rule.response;
    }
    return rules_[fallback_].response;
  }

  [[nodiscard]] const std::vector<MockRule>& rules() const noexcept { return rules_; }

  /// `match` is "default", "bucket:<i>/<n>", a substring, or an array of
  /// substrings that must all occur.
  static MockRule parse_rule(const json& row, const std::string& at) {
    if (!row.is_object() || !row.contains("match") || !row.contains("response") || !row.at("response").is_string()) {
      throw Error(ErrorKind::ParseError, at + ": rule needs 'match' and string 'response'");
    }
    MockRule rule;
    rule.response = row.at("response").get<std::string>();
    const json& m = row.at("match");
    if (m.is_array()) {
      for (const auto& n : m) rule.needles.push_back(n.get<std::string>());
      if (rule.needles.empty()) throw Error(ErrorKind::ParseError, at + ": empty match list");
      return rule;
    }
    if (!m.is_string()) throw Error(ErrorKind::ParseError, at + ": 'match' must be a string or array");
    const auto text = m.get<std::string>();
    if (text == "default") {
      rule.is_default = true;
    } else if (text.starts_with("bucket:")) {
      const auto slash = text.find('/');
      try {
        rule.bucket = std::stoull(text.substr(7, slash - 7));
        rule.buckets = std::stoull(text.substr(slash + 1));
      } catch (const std::exception&) {
        throw Error(ErrorKind::ParseError, at + ": malformed bucket rule '" + text + "'");
      }
      if (slash == std::string::npos || rule.buckets == 0 || rule.bucket >= rule.buckets) {
        throw Error(ErrorKind::ParseError, at + ": malformed bucket rule '" + text + "'");
      }
    } else {
      rule.needles.push_back(text);
    }
    return rule;
  }

  static MockScenario load(const std::filesystem::path& path) {
    std::vector<MockRule> rules;
    for (const auto& line : read_jsonl(path)) {
      rules.push_back(parse_rule(line.value, path.string() + ":" + std::to_string(line.line_no)));
    }
    return MockScenario(std::move(rules));
  }

  /// Scenario used when none is configured: a marker rule plus a default
  /// reply shaped to satisfy both the insight and the judgment parsers.
  static MockScenario builtin() {
    std::vector<MockRule> rules;
    rules.push_back({{"ALWAYS_HARMFUL"}, 0, 0, false,
                     "Thought: The meme carries an explicit harm marker.\nAnswer: harmful"});
    rules.push_back({{"ALWAYS_HARMLESS"}, 0, 0, false,
                     "Thought: The meme carries an explicit harmless marker.\nAnswer: harmless"});
    rules.push_back({{}, 0, 0, true,
                     "- Consider who the meme targets and whether it demeans them.\n"
                     "Thought: No clear sign of harm toward a person or group.\nAnswer: harmless"});
    return MockScenario(std::move(rules));
  }

 private:
  std::vector<MockRule> rules_;
  std::size_t fallback_ = 0;
};

/// Deterministic scripted backend. Also records every request and the
/// peak number of concurrent entries, for tests.
class MockBackend final : public ChatBackend {
 public:
  explicit MockBackend(MockScenario scenario = MockScenario::builtin()) : scenario_(std::move(scenario)) {}

  std::string complete(const std::vector<ChatMessage>& messages) override {
    const int now = ++inflight_;
    int seen = peak_.load();
    while (now > seen && !peak_.compare_exchange_weak(seen, now)) {
    }
    if (delay_.count() > 0) std::this_thread::sleep_for(delay_);
    const std::string prompt = render_for_matching(messages);
    std::string reply = scenario_.respond(prompt);
    {
      std::lock_guard lock(mutex_);
      history_.push_back(messages);
    }
    --inflight_;
    return reply;
  }

  void set_delay(std::chrono::milliseconds delay) { delay_ = delay; }

  [[nodiscard]] std::size_t calls() const {
    std::lock_guard lock(mutex_);
    return history_.size();
  }

  [[nodiscard]] std::vector<std::vector<ChatMessage>> history() const {
    std::lock_guard lock(mutex_);
    return history_;
  }

  [[nodiscard]] int peak_concurrency() const noexcept { return peak_.load(); }

 private:
  MockScenario scenario_;
  std::chrono::milliseconds delay_{0};
  std::atomic<int> inflight_{0};
  std::atomic<int> peak_{0};
  mutable std::mutex mutex_;
  std::vector<std::vector<ChatMessage>> history_;
};

/// Free-function form of the mock: the reply for `messages` under `scenario`.
inline std::string mock_complete(const MockScenario& scenario, const std::vector<ChatMessage>& messages) {
  return scenario.respond(render_for_matching(messages));
}

}  // namespace mind
