#pragma once

#include <algorithm>
#include <cctype>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mind/backend.hpp"
#include "mind/domain.hpp"
#include "mind/insight.hpp"
#include "mind/prompts.hpp"

namespace mind {

enum class JudgmentSource { DebaterFwd, DebaterBack, Judge, Consensus, Reasoner, Baseline };

constexpr std::string_view to_string(JudgmentSource s) noexcept {
  switch (s) {
    case JudgmentSource::DebaterFwd: return "debater_fwd";
    case JudgmentSource::DebaterBack: return "debater_back";
    case JudgmentSource::Judge: return "judge";
    case JudgmentSource::Consensus: return "consensus";
    case JudgmentSource::Reasoner: return "reasoner";
    case JudgmentSource::Baseline: return "baseline";
  }
  return "judge";
}

inline std::optional<JudgmentSource> parse_judgment_source(std::string_view s) {
  for (auto v : {JudgmentSource::DebaterFwd, JudgmentSource::DebaterBack, JudgmentSource::Judge,
                 JudgmentSource::Consensus, JudgmentSource::Reasoner, JudgmentSource::Baseline}) {
    if (to_string(v) == s) return v;
  }
  return std::nullopt;
}

struct Judgment {
  BinaryLabel decision = BinaryLabel::Harmless;
  std::string thought;
  JudgmentSource source = JudgmentSource::Judge;

  friend bool operator==(const Judgment&, const Judgment&) = default;
};

struct ParsedJudgment {
  BinaryLabel decision;
  std::string thought;
};

namespace detail {

inline std::string ascii_lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

inline std::string_view strip_answer_token(std::string_view token) {
  constexpr std::string_view junk = " \t\r\n[](){}\"'`*_.,;:!";
  const auto first = token.find_first_not_of(junk);
  if (first == std::string_view::npos) return {};
  const auto last = token.find_last_not_of(junk);
  return token.substr(first, last - first + 1);
}

}  // namespace detail

/// Reads a "Thought: ... Answer: ..." reply. The last "Answer:" (any case)
/// decides; the thought is the "Thought:" section, or else everything
/// before the answer line.
inline ParsedJudgment parse_judgment(std::string_view response) {
  const std::string lower = detail::ascii_lower(response);
  const auto answer_pos = lower.rfind("answer:");
  if (answer_pos == std::string::npos) throw Error(ErrorKind::NoAnswerLine, std::string(detail::trim(response)));

  const auto value_start = answer_pos + 7;
  auto value_end = lower.find('\n', value_start);
  if (value_end == std::string::npos) value_end = lower.size();
  const std::string token(detail::strip_answer_token(std::string_view(lower).substr(value_start, value_end - value_start)));

  ParsedJudgment out{BinaryLabel::Harmless, {}};
  if (token == "harmful") {
    out.decision = BinaryLabel::Harmful;
  } else if (token == "harmless") {
    out.decision = BinaryLabel::Harmless;
  } else {
    throw Error(ErrorKind::AmbiguousAnswer, "'" + token + "'");
  }

  const auto thought_pos = lower.find("thought:");
  if (thought_pos != std::string::npos && thought_pos < answer_pos) {
    out.thought = std::string(detail::trim(response.substr(thought_pos + 8, answer_pos - thought_pos - 8)));
  } else {
    out.thought = std::string(detail::trim(response.substr(0, answer_pos)));
  }
  return out;
}

/// Debater prompt; `note_items` become the bullet lines of the note.
inline std::vector<ChatMessage> render_debater_prompt(const PromptSet& prompts, const Meme& target,
                                                      const std::vector<std::string>& note_items) {
  ChatMessage msg;
  msg.text = prompts.debater.render({{"MEME_TEXT", target.text}, {"NOTE", "\n" + render_bullets(note_items) + "\n"}});
  msg.images.push_back(target.image_ref);
  return {msg};
}

inline std::vector<ChatMessage> render_judge_prompt(const PromptSet& prompts, const Meme& target,
                                                    const Judgment& debater1, const Judgment& debater2) {
  ChatMessage msg;
  msg.text = prompts.judge.render({{"MEME_TEXT", target.text},
                                   {"D1_ANSWER", std::string(to_string(debater1.decision))},
                                   {"D1_REASON", debater1.thought},
                                   {"D2_ANSWER", std::string(to_string(debater2.decision))},
                                   {"D2_REASON", debater2.thought}});
  msg.images.push_back(target.image_ref);
  return {msg};
}

inline std::vector<ChatMessage> render_baseline_prompt(const PromptSet& prompts, const Meme& target) {
  ChatMessage msg;
  msg.text = prompts.baseline.render({{"MEME_TEXT", target.text}});
  msg.images.push_back(target.image_ref);
  return {msg};
}

/// One agent call parsed into a Judgment. A malformed reply gets exactly
/// one retry with a format reminder; a second failure is
/// JudgmentUnparseable naming the agent.
inline Judgment ask_for_judgment(LmmClient& client, CallLog& log, AgentRole role, JudgmentSource source,
                                 const std::vector<ChatMessage>& messages) {
  const std::string first = log.call(client, role, messages);
  try {
    auto parsed = parse_judgment(first);
    return {parsed.decision, parsed.thought.empty() ? "(no reasoning given)" : parsed.thought, source};
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::NoAnswerLine && e.kind() != ErrorKind::AmbiguousAnswer) throw;
  }

  std::vector<ChatMessage> retry = messages;
  retry.push_back({Role::Assistant, first, {}});
  retry.push_back({Role::User, std::string(prompts::kFormatReminder), {}});
  const std::string second = log.call(client, role, retry, 2);
  try {
    auto parsed = parse_judgment(second);
    return {parsed.decision, parsed.thought.empty() ? "(no reasoning given)" : parsed.thought, source};
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::NoAnswerLine && e.kind() != ErrorKind::AmbiguousAnswer) throw;
    throw Error(ErrorKind::JudgmentUnparseable, std::string(to_string(role)) + ": " + e.detail());
  }
}

/// Forward-insight and backward-insight debaters, in that order.
inline std::pair<Judgment, Judgment> debate(LmmClient& client, CallLog& log, const PromptSet& prompts,
                                            const Meme& target, const InsightSet& insights_fwd,
                                            const InsightSet& insights_back) {
  Judgment fwd = ask_for_judgment(client, log, AgentRole::DebaterFwd, JudgmentSource::DebaterFwd,
                                  render_debater_prompt(prompts, target, insights_fwd.items));
  Judgment back = ask_for_judgment(client, log, AgentRole::DebaterBack, JudgmentSource::DebaterBack,
                                   render_debater_prompt(prompts, target, insights_back.items));
  return {std::move(fwd), std::move(back)};
}

/// Agreement is adopted as-is (the forward debater's judgment, relabelled
/// as consensus) without a call; disagreement goes to the judge with the
/// forward debater as Debater 1.
inline Judgment arbitrate(LmmClient& client, CallLog& log, const PromptSet& prompts, const Meme& target,
                          const Judgment& j_fwd, const Judgment& j_back) {
  if (j_fwd.decision == j_back.decision) return {j_fwd.decision, j_fwd.thought, JudgmentSource::Consensus};
  return ask_for_judgment(client, log, AgentRole::Judge, JudgmentSource::Judge,
                          render_judge_prompt(prompts, target, j_fwd, j_back));
}

}  // namespace mind
