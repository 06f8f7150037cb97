#pragma once

#include <cmath>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "mind/mind.hpp"

namespace mind::testing {

/// Scratch directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("mind-test-" + std::to_string(rd()) + "-" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  [[nodiscard]] const std::filesystem::path& path() const noexcept { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline std::vector<float> random_vector(std::mt19937_64& rng, std::size_t dim) {
  std::normal_distribution<float> g(0.0f, 1.0f);
  std::vector<float> v(dim);
  for (;;) {
    for (auto& x : v) x = g(rng);
    double n = 0.0;
    for (float x : v) n += static_cast<double>(x) * x;
    if (n > 1e-6) return v;
  }
}

struct SyntheticDataset {
  std::filesystem::path manifest;
  std::filesystem::path embeddings;
  DatasetManifest memes;
};

/// Writes image stubs, a manifest and an embedding file. Every third test
/// meme carries the ALWAYS_HARMFUL marker the built-in mock reacts to, and
/// gold labels alternate so metrics are non-trivial.
inline SyntheticDataset make_synthetic_dataset(const std::filesystem::path& dir, std::size_t n_ref, std::size_t n_test,
                                               std::size_t dim, std::uint64_t seed, bool labeled = true) {
  std::filesystem::create_directories(dir / "images");
  std::mt19937_64 rng(seed);
  SyntheticDataset ds;
  EmbeddingFile emb;
  emb.dim = dim;
  emb.encoder = "synthetic";
  auto add = [&](const std::string& id, Split split, std::string text, std::optional<RawLabel> label) {
    const auto image = dir / "images" / (id + ".png");
    write_text_file(image, "PNG-STUB:" + id);
    ds.memes.memes.push_back({id, image.string(), std::move(text), label, split});
    EmbeddingRecord rec{id, random_vector(rng, dim), random_vector(rng, dim)};
    emb.order.push_back(id);
    emb.records.emplace(id, std::move(rec));
  };
  for (std::size_t i = 0; i < n_ref; ++i) {
    add("ref" + std::to_string(i), Split::Reference, "reference meme number " + std::to_string(i), std::nullopt);
  }
  for (std::size_t i = 0; i < n_test; ++i) {
    std::string text = "test meme number " + std::to_string(i);
    if (i % 3 == 0) text += " ALWAYS_HARMFUL";
    std::optional<RawLabel> label;
    if (labeled) label = i % 2 == 0 ? RawLabel::VeryHarmful : RawLabel::Harmless;
    add("test" + std::to_string(i), Split::Test, std::move(text), label);
  }
  ds.memes.embedding_dim = dim;
  ds.manifest = dir / "manifest.jsonl";
  ds.embeddings = dir / "embeddings.jsonl";
  write_manifest(ds.manifest, ds.memes);
  write_embeddings(ds.embeddings, emb);
  return ds;
}

/// A synthetic dataset loaded back with its fused index, ready for a
/// PipelineContext.
struct LoadedDataset {
  SyntheticDataset files;
  DatasetManifest manifest;
  EmbeddingFile embeddings;
  SimilarityIndex index;

  [[nodiscard]] std::vector<const Meme*> targets() const { return manifest.split(Split::Test); }
};

inline LoadedDataset load_synthetic(const std::filesystem::path& dir, std::size_t n_ref, std::size_t n_test,
                                    std::size_t dim, std::uint64_t seed, bool labeled = true) {
  LoadedDataset d;
  d.files = make_synthetic_dataset(dir, n_ref, n_test, dim, seed, labeled);
  d.manifest = load_manifest(d.files.manifest);
  d.embeddings = load_embeddings(d.files.embeddings);
  d.manifest.embedding_dim = d.embeddings.dim;
  d.index = build_index(d.manifest, d.embeddings.records, FusionWeights{});
  return d;
}

/// Stateless backend whose debaters always disagree. Each deriving reply
/// echoes the prior "seen:N" items and appends the current reference's N,
/// so the forward and backward notes list the same memes in opposite
/// order; a debater answers harmful iff its note's first N is below its last.
class DisagreeingBackend final : public ChatBackend {
 public:
  std::string complete(const std::vector<ChatMessage>& messages) override {
    const std::string& p = messages.front().text;
    const auto seen = seen_numbers(p);
    if (p.find("two debaters") != std::string::npos) return "Thought: judge.\nAnswer: harmful";
    if (p.find("Consider this note") != std::string::npos) {
      const bool harmful = seen.size() >= 2 && seen.front() < seen.back();
      return std::string("Thought: note order.\nAnswer: ") + (harmful ? "harmful" : "harmless");
    }
    std::string reply;
    for (int n : seen) reply += "- seen:" + std::to_string(n) + "\n";
    const auto at = p.find("reference meme number ");
    reply += "- seen:" + std::to_string(std::stoi(p.substr(at + 22))) + "\n";
    return reply;
  }

 private:
  static std::vector<int> seen_numbers(const std::string& p) {
    std::vector<int> out;
    for (auto at = p.find("seen:"); at != std::string::npos; at = p.find("seen:", at + 5)) {
      out.push_back(std::stoi(p.substr(at + 5)));
    }
    return out;
  }
};

/// Scenario file from (match, response) pairs; "default" marks the fallback.
inline std::filesystem::path write_scenario(const std::filesystem::path& path,
                                            const std::vector<std::pair<json, std::string>>& rules) {
  std::string out;
  for (const auto& [match, response] : rules) out += json{{"match", match}, {"response", response}}.dump() + "\n";
  write_text_file(path, out);
  return path;
}

/// Direct-formula metric oracle over enumerated (gold, predicted) pairs.
/// Shares no code with mind::accuracy / mind::macro_f1.
struct MetricOracle {
  double accuracy;
  double macro_f1;
};

inline MetricOracle metric_oracle(const std::vector<int>& gold, const std::vector<int>& pred) {
  double correct = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) correct += gold[i] == pred[i];
  double f1_sum = 0;
  for (int cls : {0, 1}) {
    double tp = 0, pred_pos = 0, gold_pos = 0;
    for (std::size_t i = 0; i < gold.size(); ++i) {
      tp += gold[i] == cls && pred[i] == cls;
      pred_pos += pred[i] == cls;
      gold_pos += gold[i] == cls;
    }
    const double p = pred_pos > 0 ? tp / pred_pos : 0.0;
    const double r = gold_pos > 0 ? tp / gold_pos : 0.0;
    f1_sum += (p + r) > 0 ? 2 * p * r / (p + r) : 0.0;
  }
  return {correct / static_cast<double>(gold.size()), f1_sum / 2.0};
}

/// Drops per-call latency, which is wall-clock and not part of a run's
/// reproducible content; `cached` is dropped too when asked.
inline std::string normalized_transcripts(const std::filesystem::path& path, bool drop_cached = false) {
  std::string out;
  for (auto& line : read_jsonl(path)) {
    for (auto& c : line.value["calls"]) {
      c.erase("latency_ms");
      if (drop_cached) c.erase("cached");
    }
    out += line.value.dump() + "\n";
  }
  return out;
}

inline json normalized_summary(const std::filesystem::path& path) {
  json j = json::parse(read_text_file(path));
  j.erase("run");
  return j;
}

}  // namespace mind::testing
