#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "mind/jsonl.hpp"
#include "mind/pipeline.hpp"

namespace mind {

inline json to_json(const InsightSet& s) {
  return {{"direction", std::string(to_string(s.direction))}, {"items", s.items}, {"step", s.step}};
}

inline json to_json(const Judgment& j) {
  return {{"decision", std::string(to_string(j.decision))},
          {"source", std::string(to_string(j.source))},
          {"thought", j.thought}};
}

inline json to_json(const CallRecord& c) {
  return {{"seq", c.sequence_no},       {"agent_role", std::string(to_string(c.agent_role))},
          {"attempt", c.attempt},       {"prompt_hash", c.prompt_hash},
          {"response", c.response_text}, {"cached", c.cached},
          {"latency_ms", c.latency_ms}};
}

template <typename T>
json optional_json(const std::optional<T>& v) {
  return v ? to_json(*v) : json(nullptr);
}

/// One transcript line. Field names are part of the report format.
inline json to_json(const SampleTranscript& t) {
  json neighbors = json::array();
  for (const auto& n : t.neighbors.items) neighbors.push_back({{"id", n.meme_id}, {"score", n.score}});
  json calls = json::array();
  for (const auto& c : t.calls) calls.push_back(to_json(c));
  json j = {{"target_id", t.target_id},
            {"mode", std::string(to_string(t.mode))},
            {"k", t.k},
            {"neighbor_source", t.neighbor_source},
            {"seed", t.seed ? json(*t.seed) : json(nullptr)},
            {"neighbors", std::move(neighbors)},
            {"insights_fwd", optional_json(t.insights_fwd)},
            {"insights_back", optional_json(t.insights_back)},
            {"judgment_fwd", optional_json(t.judgment_fwd)},
            {"judgment_back", optional_json(t.judgment_back)},
            {"final", optional_json(t.final)},
            {"calls", std::move(calls)},
            {"notes", t.notes}};
  j["error"] = t.error ? json{{"stage", t.error->stage}, {"kind", t.error->kind}, {"message", t.error->message}}
                       : json(nullptr);
  return j;
}

namespace detail {

inline InsightSet insight_set_from_json(const json& j) {
  InsightSet s;
  s.items = j.at("items").get<std::vector<std::string>>();
  s.direction = j.at("direction").get<std::string>() == "backward" ? Direction::Backward : Direction::Forward;
  s.step = j.at("step").get<std::size_t>();
  return s;
}

inline Judgment judgment_from_json(const json& j) {
  Judgment out;
  auto decision = parse_binary_label(j.at("decision").get<std::string>());
  auto source = parse_judgment_source(j.at("source").get<std::string>());
  if (!decision || !source) throw Error(ErrorKind::ParseError, "bad judgment " + j.dump());
  out.decision = *decision;
  out.source = *source;
  out.thought = j.at("thought").get<std::string>();
  return out;
}

}  // namespace detail

inline SampleTranscript transcript_from_json(const json& j) {
  SampleTranscript t;
  t.target_id = j.at("target_id").get<std::string>();
  auto mode = parse_mode(j.at("mode").get<std::string>());
  if (!mode) throw Error(ErrorKind::ParseError, "unknown mode " + j.at("mode").dump());
  t.mode = *mode;
  t.k = j.value("k", std::size_t{0});
  t.neighbor_source = j.value("neighbor_source", "none");
  if (j.contains("seed") && !j.at("seed").is_null()) t.seed = j.at("seed").get<std::uint64_t>();
  t.neighbors.target_id = t.target_id;
  for (const auto& n : j.value("neighbors", json::array())) {
    t.neighbors.items.push_back({n.at("id").get<std::string>(), n.at("score").get<double>()});
  }
  auto opt = [&](const char* key) -> const json* {
    return j.contains(key) && !j.at(key).is_null() ? &j.at(key) : nullptr;
  };
  if (auto* v = opt("insights_fwd")) t.insights_fwd = detail::insight_set_from_json(*v);
  if (auto* v = opt("insights_back")) t.insights_back = detail::insight_set_from_json(*v);
  if (auto* v = opt("judgment_fwd")) t.judgment_fwd = detail::judgment_from_json(*v);
  if (auto* v = opt("judgment_back")) t.judgment_back = detail::judgment_from_json(*v);
  if (auto* v = opt("final")) t.final = detail::judgment_from_json(*v);
  for (const auto& c : j.value("calls", json::array())) {
    CallRecord r;
    r.sequence_no = c.at("seq").get<std::size_t>();
    auto role = parse_agent_role(c.at("agent_role").get<std::string>());
    if (!role) throw Error(ErrorKind::ParseError, "unknown agent_role " + c.at("agent_role").dump());
    r.agent_role = *role;
    r.attempt = c.value("attempt", 1);
    r.prompt_hash = c.value("prompt_hash", "");
    r.response_text = c.value("response", "");
    r.cached = c.value("cached", false);
    r.latency_ms = c.value("latency_ms", 0.0);
    t.calls.push_back(std::move(r));
  }
  if (auto* v = opt("error")) {
    t.error = StageError{v->at("stage").get<std::string>(), v->at("kind").get<std::string>(),
                         v->at("message").get<std::string>()};
  }
  t.notes = j.value("notes", std::vector<std::string>{});
  return t;
}

inline std::string serialize_transcripts(const std::vector<SampleTranscript>& transcripts) {
  std::string out;
  for (const auto& t : transcripts) out += to_json(t).dump() + "\n";
  return out;
}

inline std::vector<SampleTranscript> load_transcripts(const std::filesystem::path& path) {
  std::vector<SampleTranscript> out;
  for (const auto& line : read_jsonl(path)) {
    try {
      out.push_back(transcript_from_json(line.value));
    } catch (const json::exception& e) {
      throw Error(ErrorKind::ParseError, path.string() + ":" + std::to_string(line.line_no) + ": " + e.what());
    } catch (const Error& e) {
      throw Error(e.kind(), path.string() + ":" + std::to_string(line.line_no) + ": " + e.detail());
    }
  }
  return out;
}

}  // namespace mind
