#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mind/domain.hpp"
#include "mind/jsonl.hpp"
#include "mind/pipeline.hpp"

namespace mind {

/// Binary confusion matrix with Harmful as the positive class.
struct ConfusionCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t tn = 0;
  std::size_t skipped = 0;

  [[nodiscard]] std::size_t scored() const noexcept { return tp + fp + fn + tn; }

  void add(BinaryLabel gold, BinaryLabel predicted) noexcept {
    if (gold == BinaryLabel::Harmful) {
      ++(predicted == BinaryLabel::Harmful ? tp : fn);
    } else {
      ++(predicted == BinaryLabel::Harmful ? fp : tn);
    }
  }

  friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

struct ClassScores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

namespace detail {

// 0/0 is taken as 0 throughout.
inline double ratio(double num, double den) { return den == 0.0 ? 0.0 : num / den; }

inline ClassScores class_scores(std::size_t true_pos, std::size_t false_pos, std::size_t false_neg) {
  ClassScores s;
  s.precision = ratio(static_cast<double>(true_pos), static_cast<double>(true_pos + false_pos));
  s.recall = ratio(static_cast<double>(true_pos), static_cast<double>(true_pos + false_neg));
  s.f1 = ratio(2.0 * s.precision * s.recall, s.precision + s.recall);
  return s;
}

inline void require_scored(const ConfusionCounts& c) {
  if (c.scored() == 0) throw Error(ErrorKind::NoScoredSamples, "no labeled predictions to score");
}

}  // namespace detail

inline ClassScores harmful_scores(const ConfusionCounts& c) { return detail::class_scores(c.tp, c.fp, c.fn); }

// Harmless as positive: its TP is tn, its FP is fn, its FN is fp.
inline ClassScores harmless_scores(const ConfusionCounts& c) { return detail::class_scores(c.tn, c.fn, c.fp); }

inline double accuracy(const ConfusionCounts& c) {
  detail::require_scored(c);
  return static_cast<double>(c.tp + c.tn) / static_cast<double>(c.scored());
}

inline double macro_f1(const ConfusionCounts& c) {
  detail::require_scored(c);
  return (harmful_scores(c).f1 + harmless_scores(c).f1) / 2.0;
}

/// How a sample whose pipeline failed is scored.
enum class ErrorPolicy { Incorrect, Harmless };

struct Metrics {
  double accuracy = 0.0;
  double macro_f1 = 0.0;
  ClassScores harmful;
  ClassScores harmless;
};

struct EvalResult {
  ConfusionCounts counts;  // counts.skipped = unlabeled samples
  std::size_t errored = 0;  // failed samples, scored per ErrorPolicy
  std::optional<Metrics> metrics;
  std::map<std::string, std::size_t> calls_by_role;
  std::size_t total_calls = 0;
};

/// Joins transcripts with merged gold labels. Unlabeled samples are
/// skipped; failed samples are still scored, as wrong by default.
inline EvalResult evaluate_report(const std::vector<SampleTranscript>& report, const DatasetManifest& manifest,
                                  ErrorPolicy policy = ErrorPolicy::Incorrect) {
  std::unordered_map<std::string, const Meme*> by_id;
  for (const auto& m : manifest.memes) by_id.emplace(m.id, &m);

  EvalResult r;
  for (const auto& t : report) {
    auto it = by_id.find(t.target_id);
    if (it == by_id.end()) throw Error(ErrorKind::UnknownTargetId, t.target_id);
    for (const auto& c : t.calls) {
      ++r.calls_by_role[std::string(to_string(c.agent_role))];
      ++r.total_calls;
    }
    const Meme& meme = *it->second;
    if (!meme.label) {
      ++r.counts.skipped;
      continue;
    }
    const BinaryLabel gold = merge_label(*meme.label);
    if (t.final) {
      r.counts.add(gold, t.final->decision);
    } else {
      ++r.errored;
      r.counts.add(gold, policy == ErrorPolicy::Incorrect ? flip(gold) : BinaryLabel::Harmless);
    }
  }
  if (r.counts.scored() > 0) {
    r.metrics = Metrics{accuracy(r.counts), macro_f1(r.counts), harmful_scores(r.counts), harmless_scores(r.counts)};
  }
  return r;
}

/// Run parameters echoed into the summary.
struct RunInfo {
  std::string mode = "full";
  std::size_t k = 3;
  double lambda_v = 0.8;
  double lambda_t = 0.2;
  std::uint64_t seed = 0;
};

inline json class_json(const ClassScores& s) {
  return {{"f1", s.f1}, {"precision", s.precision}, {"recall", s.recall}};
}

/// Deterministic summary body; volatile run facts (ids, timings, cache
/// hits) are added by the caller under "run".
inline json summary_json(const EvalResult& r, const RunInfo& info) {
  json j = {{"mode", info.mode},
            {"k", info.k},
            {"lambda_v", info.lambda_v},
            {"lambda_t", info.lambda_t},
            {"seed", info.seed},
            {"scored", r.counts.scored()},
            {"skipped", r.counts.skipped},
            {"errored", r.errored},
            {"confusion", {{"tp", r.counts.tp}, {"fp", r.counts.fp}, {"fn", r.counts.fn}, {"tn", r.counts.tn}}},
            {"calls", {{"total", r.total_calls}, {"by_role", r.calls_by_role}}}};
  if (r.metrics) {
    j["accuracy"] = r.metrics->accuracy;
    j["macro_f1"] = r.metrics->macro_f1;
    j["per_class"] = {{"harmful", class_json(r.metrics->harmful)}, {"harmless", class_json(r.metrics->harmless)}};
  } else {
    j["accuracy"] = nullptr;
    j["macro_f1"] = nullptr;
    j["per_class"] = nullptr;
  }
  return j;
}

}  // namespace mind
