#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "mind/error.hpp"
#include "mind/jsonl.hpp"

namespace mind {

/// Prompt text with `{NAME}` placeholders. Required placeholders must occur
/// exactly once; optional ones may occur any number of times. Substitution
/// is single-pass, so values containing braces are inserted verbatim.
class PromptTemplate {
 public:
  PromptTemplate() = default;

  PromptTemplate(std::string text, std::vector<std::string> required, std::vector<std::string> optional = {})
      : text_(std::move(text)), required_(std::move(required)), optional_(std::move(optional)) {
    for (const auto& name : required_) {
      const auto n = count(name);
      if (n == 0) throw Error(ErrorKind::MissingPlaceholder, "{" + name + "}");
      if (n > 1) throw Error(ErrorKind::DuplicatePlaceholder, "{" + name + "} occurs " + std::to_string(n) + " times");
    }
  }

  [[nodiscard]] std::string render(const std::map<std::string, std::string>& values) const {
    std::string out;
    out.reserve(text_.size() + 256);
    std::size_t i = 0;
    while (i < text_.size()) {
      if (text_[i] == '{') {
        const auto close = text_.find('}', i + 1);
        if (close != std::string::npos) {
          const std::string name = text_.substr(i + 1, close - i - 1);
          if (is_known(name)) {
            auto it = values.find(name);
            if (it == values.end()) throw Error(ErrorKind::MissingPlaceholder, "no value for {" + name + "}");
            out += it->second;
            i = close + 1;
            continue;
          }
        }
      }
      out.push_back(text_[i++]);
    }
    return out;
  }

  [[nodiscard]] const std::string& text() const noexcept { return text_; }

 private:
  [[nodiscard]] std::size_t count(const std::string& name) const {
    const std::string token = "{" + name + "}";
    std::size_t n = 0;
    for (auto pos = text_.find(token); pos != std::string::npos; pos = text_.find(token, pos + token.size())) ++n;
    return n;
  }

  [[nodiscard]] bool is_known(const std::string& name) const {
    for (const auto& r : required_) {
      if (r == name) return true;
    }
    for (const auto& o : optional_) {
      if (o == name) return true;
    }
    return false;
  }

  std::string text_;
  std::vector<std::string> required_;
  std::vector<std::string> optional_;
};

namespace prompts {

inline constexpr std::string_view kDefaultDeriving =
    R"(You are helping to build general guidelines for judging whether memes are harmful, in order to maintain the harmlessness and integrity of information on the Internet. A meme is harmful if it has the potential to cause harm to a person, an organization, a community, or society.
Given the meme, with the Text: "{MEME_TEXT}" embedded in the image.
Insights derived from previously analyzed memes:
{PRIOR_INSIGHTS}
Let's think step by step. First, describe what the meme conveys by combining the image and its text. Second, identify who or what it refers to and whether it could demean, mislead, or endanger them. Third, decide which of the previous insights this meme supports, refines, or contradicts.
Then output the updated set of insights: at most {MAX_INSIGHTS} general, self-contained guidelines that would help assess other memes on similar topics. Write each insight on its own line starting with "- ". Output only the list.)";

inline constexpr std::string_view kDefaultDebater =
    R"(Given the meme, with the Text: "{MEME_TEXT}" embedded in the image.
Is it harmful or harmless?
Note: [{NOTE}]
(Consider this note above with caution - it may contain biases or subjective interpretations that could influence judgment. Evaluate its reliability and relevance carefully)
Your output should strictly follow the format:
"Thought: [First, analyze the meme's content independently. Then, carefully consider how the provided note may inform or bias your understanding. Weigh the note's credibility and relevance before incorporating it into your final assessment.]
Answer: [harmful/harmless].")";

inline constexpr std::string_view kDefaultJudge =
    R"(Given the meme, with the Text: "{MEME_TEXT}" embedded in the image.
Is it harmful or harmless?
Regarding this meme, there are two debaters with differing opinions.
Debater 1 believes that:
The correct answer should be: {D1_ANSWER}
Debater 1's reason: [{D1_REASON}]
Debater 2 believes that:
The correct answer should be: {D2_ANSWER}
Debater 2's Reason: [{D2_REASON}]
As a judge, you need to determine who is correct based on the viewpoints of the two debaters and provide the correct answer that you believe to be true.
Your response should strictly adhere to this format:
"Thought: [Based on the meme itself and your careful consideration, whose viewpoint do you think is correct? And why?]
Answer: [Your final judgment(harmful/harmless)].")";

inline constexpr std::string_view kDefaultBaseline =
    R"(Given the meme, with the Text: "{MEME_TEXT}" embedded in the image, your task is to determine whether this meme is harmful or not, in order to maintain the harmlessness and integrity of information on the Internet. Please leverage your extensive knowledge to deeply analyze and understand this meme, and give your final judgment.
Your output should strictly follow the format: "Thought: [Your analysis]
Answer: [harmful/harmless].")";

inline constexpr std::string_view kFormatReminder =
    R"(Your previous reply did not follow the required format. Reply again and end with a final line of exactly the form "Answer: harmful" or "Answer: harmless".)";

inline PromptTemplate deriving(std::string text = std::string(kDefaultDeriving)) {
  return {std::move(text), {"MEME_TEXT", "PRIOR_INSIGHTS"}, {"MAX_INSIGHTS"}};
}

inline PromptTemplate debater(std::string text = std::string(kDefaultDebater)) {
  return {std::move(text), {"MEME_TEXT", "NOTE"}};
}

inline PromptTemplate judge(std::string text = std::string(kDefaultJudge)) {
  return {std::move(text), {"MEME_TEXT", "D1_ANSWER", "D1_REASON", "D2_ANSWER", "D2_REASON"}};
}

inline PromptTemplate baseline(std::string text = std::string(kDefaultBaseline)) {
  return {std::move(text), {"MEME_TEXT"}};
}

}  // namespace prompts

struct PromptSet {
  PromptTemplate deriving = prompts::deriving();
  PromptTemplate debater = prompts::debater();
  PromptTemplate judge = prompts::judge();
  PromptTemplate baseline = prompts::baseline();
  std::size_t max_insights = 5;
};

struct PromptPaths {
  std::filesystem::path deriving;
  std::filesystem::path debater;
  std::filesystem::path judge;
  std::filesystem::path baseline;
};

namespace detail {

// Prompt files usually end in a newline the built-ins do not have.
inline std::string read_prompt_file(const std::filesystem::path& path) {
  std::string text = read_text_file(path);
  if (text.ends_with("\r\n")) text.resize(text.size() - 2);
  else if (text.ends_with('\n')) text.pop_back();
  return text;
}

}  // namespace detail

/// Built-in defaults, each replaced by the file at the matching path when
/// one is given.
inline PromptSet load_prompts(const PromptPaths& paths, std::size_t max_insights = 5) {
  PromptSet set;
  set.max_insights = max_insights;
  if (!paths.deriving.empty()) set.deriving = prompts::deriving(detail::read_prompt_file(paths.deriving));
  if (!paths.debater.empty()) set.debater = prompts::debater(detail::read_prompt_file(paths.debater));
  if (!paths.judge.empty()) set.judge = prompts::judge(detail::read_prompt_file(paths.judge));
  if (!paths.baseline.empty()) set.baseline = prompts::baseline(detail::read_prompt_file(paths.baseline));
  return set;
}

/// "- item" lines, or "(none)" for an empty list.
inline std::string render_bullets(const std::vector<std::string>& items) {
  if (items.empty()) return "(none)";
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += '\n';
    out += "- " + items[i];
  }
  return out;
}

}  // namespace mind
