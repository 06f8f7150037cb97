#pragma once

#include <cctype>
#include <string>
#include <string_view>
#include <vector>

#include "mind/backend.hpp"
#include "mind/domain.hpp"
#include "mind/prompts.hpp"

namespace mind {

enum class Direction { Forward, Backward };

constexpr std::string_view to_string(Direction d) noexcept { return d == Direction::Forward ? "forward" : "backward"; }

struct InsightSet {
  std::vector<std::string> items;
  Direction direction = Direction::Forward;
  std::size_t step = 0;

  friend bool operator==(const InsightSet&, const InsightSet&) = default;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

// Returns the text after a list marker ("- ", "* ", "3. ", "3) "), or
// nullopt when the line is not a list item.
inline std::optional<std::string_view> strip_list_marker(std::string_view line) {
  line = trim(line);
  if (line.size() >= 2 && (line[0] == '-' || line[0] == '*') && (line[1] == ' ' || line[1] == '\t')) {
    return trim(line.substr(2));
  }
  std::size_t digits = 0;
  while (digits < line.size() && std::isdigit(static_cast<unsigned char>(line[digits]))) ++digits;
  if (digits > 0 && digits + 1 < line.size() && (line[digits] == '.' || line[digits] == ')') &&
      (line[digits + 1] == ' ' || line[digits + 1] == '\t')) {
    return trim(line.substr(digits + 2));
  }
  return std::nullopt;
}

}  // namespace detail

/// List items of a deriving reply, capped at `max_insights`. A reply with
/// no list items is taken whole as a single insight.
inline std::vector<std::string> parse_insights(std::string_view response, std::size_t max_insights) {
  const auto whole = detail::trim(response);
  if (whole.empty()) throw Error(ErrorKind::EmptyDerivation, "deriving agent returned no text");

  std::vector<std::string> items;
  std::size_t start = 0;
  while (start <= response.size()) {
    auto end = response.find('\n', start);
    if (end == std::string_view::npos) end = response.size();
    if (auto item = detail::strip_list_marker(response.substr(start, end - start)); item && !item->empty()) {
      if (items.size() < max_insights) items.emplace_back(*item);
    }
    start = end + 1;
  }
  if (items.empty()) items.emplace_back(whole);
  return items;
}

inline std::vector<ChatMessage> render_deriving_prompt(const PromptSet& prompts, const Meme& meme,
                                                       const InsightSet& prior) {
  ChatMessage msg;
  msg.role = Role::User;
  msg.text = prompts.deriving.render({{"MEME_TEXT", meme.text},
                                      {"PRIOR_INSIGHTS", render_bullets(prior.items)},
                                      {"MAX_INSIGHTS", std::to_string(prompts.max_insights)}});
  msg.images.push_back(meme.image_ref);
  return {msg};
}

/// One sequential derivation chain. Forward visits `similar` in retrieval
/// order, backward in exact reverse; every step sees only the previous
/// step's set.
inline InsightSet derive_pass(LmmClient& client, CallLog& log, const PromptSet& prompts,
                              const std::vector<const Meme*>& similar, Direction direction) {
  if (similar.empty()) throw Error(ErrorKind::InvalidMessage, "derivation needs at least one similar meme");
  const AgentRole role = direction == Direction::Forward ? AgentRole::DerivingFwd : AgentRole::DerivingBack;
  const std::size_t k = similar.size();

  InsightSet current{{}, direction, 0};
  for (std::size_t i = 1; i <= k; ++i) {
    const Meme& meme = direction == Direction::Forward ? *similar[i - 1] : *similar[k - i];
    try {
      const std::string reply = log.call(client, role, render_deriving_prompt(prompts, meme, current));
      current = InsightSet{parse_insights(reply, prompts.max_insights), direction, i};
    } catch (const Error& e) {
      throw Error(e.kind(), std::string(to_string(role)) + " step " + std::to_string(i) + ": " + e.detail());
    }
  }
  return current;
}

}  // namespace mind
