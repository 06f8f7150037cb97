#pragma once

#include <atomic>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <thread>
#include <unordered_map>
#include <vector>

#include "mind/backend.hpp"
#include "mind/debate.hpp"
#include "mind/domain.hpp"
#include "mind/insight.hpp"
#include "mind/prompts.hpp"
#include "mind/retrieval.hpp"

namespace mind {

/// Full pipeline and its ablations.
///   full      retrieve, derive both directions, debate, arbitrate
///   no_ssr    as full, with K seeded-random reference memes
///   no_rid    retrieve, then one call seeing the neighbors' texts
///   fwd_only  forward derivation + its debater only
///   back_only backward derivation + its debater only
///   no_iai    both derivations, one call seeing both insight sets
///   baseline  one chain-of-thought call, nothing else
enum class Mode { Full, NoSsr, NoRid, FwdOnly, BackOnly, NoIai, Baseline };

inline constexpr Mode kAllModes[] = {Mode::Full,    Mode::NoSsr, Mode::NoRid,   Mode::FwdOnly,
                                     Mode::BackOnly, Mode::NoIai, Mode::Baseline};

constexpr std::string_view to_string(Mode m) noexcept {
  switch (m) {
    case Mode::Full: return "full";
    case Mode::NoSsr: return "no_ssr";
    case Mode::NoRid: return "no_rid";
    case Mode::FwdOnly: return "fwd_only";
    case Mode::BackOnly: return "back_only";
    case Mode::NoIai: return "no_iai";
    case Mode::Baseline: return "baseline";
  }
  return "full";
}

inline std::optional<Mode> parse_mode(std::string_view s) {
  for (Mode m : kAllModes) {
    if (to_string(m) == s) return m;
  }
  return std::nullopt;
}

constexpr bool uses_retrieval(Mode m) noexcept {
  return m == Mode::Full || m == Mode::NoRid || m == Mode::FwdOnly || m == Mode::BackOnly || m == Mode::NoIai;
}

struct StageError {
  std::string stage;
  std::string kind;
  std::string message;

  friend bool operator==(const StageError&, const StageError&) = default;
};

/// Everything that happened for one target meme.
struct SampleTranscript {
  std::string target_id;
  Mode mode = Mode::Full;
  std::size_t k = 0;
  std::string neighbor_source = "none";  // retrieval | random | none
  std::optional<std::uint64_t> seed;
  Neighbors neighbors;
  std::optional<InsightSet> insights_fwd;
  std::optional<InsightSet> insights_back;
  std::optional<Judgment> judgment_fwd;
  std::optional<Judgment> judgment_back;
  std::optional<Judgment> final;
  std::vector<CallRecord> calls;
  std::optional<StageError> error;
  std::vector<std::string> notes;
};

/// Read-only inputs shared by every sample of a run.
class PipelineContext {
 public:
  PipelineContext(const DatasetManifest& manifest, LmmClient& client, PromptSet prompts, std::size_t k,
                  std::uint64_t seed, const SimilarityIndex* index = nullptr, const EmbeddingMap* embeddings = nullptr)
      : manifest_(manifest),
        client_(client),
        prompts_(std::move(prompts)),
        k_(k),
        seed_(seed),
        index_(index),
        embeddings_(embeddings) {
    for (const auto& m : manifest_.memes) {
      by_id_.emplace(m.id, &m);
      if (m.split == Split::Reference) references_.push_back(&m);
    }
  }

  [[nodiscard]] const DatasetManifest& manifest() const noexcept { return manifest_; }
  [[nodiscard]] LmmClient& client() const noexcept { return client_; }
  [[nodiscard]] const PromptSet& prompts() const noexcept { return prompts_; }
  [[nodiscard]] std::size_t k() const noexcept { return k_; }
  [[nodiscard]] std::uint64_t seed() const noexcept { return seed_; }
  [[nodiscard]] const SimilarityIndex* index() const noexcept { return index_; }
  [[nodiscard]] const EmbeddingMap* embeddings() const noexcept { return embeddings_; }
  [[nodiscard]] const std::vector<const Meme*>& references() const noexcept { return references_; }

  [[nodiscard]] const Meme& meme(const std::string& id) const {
    auto it = by_id_.find(id);
    if (it == by_id_.end()) throw Error(ErrorKind::UnknownTargetId, id);
    return *it->second;
  }

 private:
  const DatasetManifest& manifest_;
  LmmClient& client_;
  PromptSet prompts_;
  std::size_t k_;
  std::uint64_t seed_;
  const SimilarityIndex* index_;
  const EmbeddingMap* embeddings_;
  std::unordered_map<std::string, const Meme*> by_id_;
  std::vector<const Meme*> references_;
};

namespace detail {

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Unbiased draw in [0, n) by rejection; mt19937_64's output sequence is
// fixed by the standard, so this is reproducible across platforms.
inline std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t n) {
  const std::uint64_t threshold = (0 - n) % n;
  for (;;) {
    const std::uint64_t r = rng();
    if (r >= threshold) return r % n;
  }
}

}  // namespace detail

/// K distinct reference memes drawn without replacement, seeded per
/// (run seed, target id) so the draw is independent of scheduling.
inline Neighbors random_neighbors(const std::vector<const Meme*>& references, const std::string& target_id,
                                  std::size_t k, std::uint64_t seed) {
  std::vector<const Meme*> pool;
  pool.reserve(references.size());
  for (const Meme* m : references) {
    if (m->id != target_id) pool.push_back(m);
  }
  detail::check_k(k, pool.size());
  std::mt19937_64 rng(detail::splitmix64(seed ^ detail::splitmix64(fnv1a64(target_id))));
  Neighbors out{target_id, {}};
  for (std::size_t i = 0; i < k; ++i) {
    const auto j = i + static_cast<std::size_t>(detail::uniform_below(rng, pool.size() - i));
    std::swap(pool[i], pool[j]);
    out.items.push_back({pool[i]->id, 0.0});
  }
  return out;
}

namespace detail {

inline Neighbors find_neighbors(const PipelineContext& ctx, const Meme& target) {
  if (ctx.index() == nullptr || ctx.embeddings() == nullptr) {
    throw Error(ErrorKind::MissingEmbedding, "retrieval requires an index and embeddings");
  }
  auto it = ctx.embeddings()->find(target.id);
  if (it == ctx.embeddings()->end()) throw Error(ErrorKind::MissingEmbedding, target.id);
  return retrieve_similar(*ctx.index(), it->second, ctx.k());
}

}  // namespace detail

/// Runs one target meme through `mode`. Stage failures do not throw; they
/// land in the transcript's `error` with the stage that raised them.
inline SampleTranscript infer_sample(const PipelineContext& ctx, const Meme& target, Mode mode) {
  SampleTranscript t;
  t.target_id = target.id;
  t.mode = mode;
  t.k = mode == Mode::Baseline ? 0 : ctx.k();
  if (target.text.empty()) t.notes.push_back("target meme text is empty; passed through unchanged");

  CallLog log;
  LmmClient& client = ctx.client();
  const PromptSet& prompts = ctx.prompts();
  std::string stage;
  try {
    if (mode == Mode::Baseline) {
      stage = "baseline";
      t.final = ask_for_judgment(client, log, AgentRole::Baseline, JudgmentSource::Baseline,
                                 render_baseline_prompt(prompts, target));
    } else {
      stage = "retrieval";
      if (mode == Mode::NoSsr) {
        t.neighbor_source = "random";
        t.seed = ctx.seed();
        t.neighbors = random_neighbors(ctx.references(), target.id, ctx.k(), ctx.seed());
      } else {
        t.neighbor_source = "retrieval";
        t.neighbors = detail::find_neighbors(ctx, target);
      }
      std::vector<const Meme*> similar;
      for (const auto& n : t.neighbors.items) {
        similar.push_back(&ctx.meme(n.meme_id));
        if (similar.back()->text.empty()) t.notes.push_back("neighbor " + n.meme_id + " has empty text");
      }

      if (mode == Mode::NoRid) {
        stage = "reasoning";
        std::vector<std::string> note;
        for (const Meme* m : similar) note.push_back("Similar meme text: \"" + m->text + "\"");
        t.final = ask_for_judgment(client, log, AgentRole::Reasoner, JudgmentSource::Reasoner,
                                   render_debater_prompt(prompts, target, note));
      } else {
        const bool want_fwd = mode != Mode::BackOnly;
        const bool want_back = mode != Mode::FwdOnly;
        if (want_fwd) {
          stage = "derivation_fwd";
          t.insights_fwd = derive_pass(client, log, prompts, similar, Direction::Forward);
        }
        if (want_back) {
          stage = "derivation_back";
          t.insights_back = derive_pass(client, log, prompts, similar, Direction::Backward);
        }

        if (mode == Mode::FwdOnly) {
          stage = "debate";
          t.judgment_fwd = ask_for_judgment(client, log, AgentRole::DebaterFwd, JudgmentSource::DebaterFwd,
                                            render_debater_prompt(prompts, target, t.insights_fwd->items));
          t.final = t.judgment_fwd;
        } else if (mode == Mode::BackOnly) {
          stage = "debate";
          t.judgment_back = ask_for_judgment(client, log, AgentRole::DebaterBack, JudgmentSource::DebaterBack,
                                             render_debater_prompt(prompts, target, t.insights_back->items));
          t.final = t.judgment_back;
        } else if (mode == Mode::NoIai) {
          stage = "reasoning";
          std::vector<std::string> note = t.insights_fwd->items;
          note.insert(note.end(), t.insights_back->items.begin(), t.insights_back->items.end());
          t.final = ask_for_judgment(client, log, AgentRole::Reasoner, JudgmentSource::Reasoner,
                                     render_debater_prompt(prompts, target, note));
        } else {
          stage = "debate";
          auto [fwd, back] = debate(client, log, prompts, target, *t.insights_fwd, *t.insights_back);
          t.judgment_fwd = std::move(fwd);
          t.judgment_back = std::move(back);
          stage = "arbitration";
          t.final = arbitrate(client, log, prompts, target, *t.judgment_fwd, *t.judgment_back);
        }
      }
    }
  } catch (const Error& e) {
    t.final.reset();
    t.error = StageError{stage, std::string(to_string(e.kind())), e.detail()};
  } catch (const std::exception& e) {
    t.final.reset();
    t.error = StageError{stage, "InternalError", e.what()};
  }
  t.calls = log.records();
  return t;
}

/// Every target through `mode` on up to `parallelism` workers. Results come
/// back in target order regardless of scheduling.
inline std::vector<SampleTranscript> run_samples(const PipelineContext& ctx, const std::vector<const Meme*>& targets,
                                                 Mode mode, std::size_t parallelism) {
  std::vector<SampleTranscript> out(targets.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < targets.size(); i = next++) out[i] = infer_sample(ctx, *targets[i], mode);
  };
  const std::size_t n = std::max<std::size_t>(1, std::min(parallelism, targets.size()));
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 1; w < n; ++w) pool.emplace_back(worker);
    worker();
  }
  return out;
}

}  // namespace mind
