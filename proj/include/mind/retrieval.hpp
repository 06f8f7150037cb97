#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "mind/domain.hpp"
#include "mind/error.hpp"

namespace mind {

/// Per-meme encoder outputs, one vector per modality, both of length D.
struct EmbeddingRecord {
  std::string meme_id;
  std::vector<float> image_vec;
  std::vector<float> text_vec;
};

using EmbeddingMap = std::unordered_map<std::string, EmbeddingRecord>;

struct FusionWeights {
  double lambda_v = 0.8;
  double lambda_t = 0.2;

  void validate() const {
    if (!std::isfinite(lambda_v) || !std::isfinite(lambda_t) || lambda_v < 0.0 || lambda_t < 0.0 ||
        lambda_v > 1.0 || lambda_t > 1.0) {
      throw Error(ErrorKind::ConfigError, "fusion weights must lie in [0,1]");
    }
    if (lambda_v == 0.0 && lambda_t == 0.0) {
      throw Error(ErrorKind::ConfigError, "fusion weights must not both be zero");
    }
  }

  friend bool operator==(const FusionWeights&, const FusionWeights&) = default;
};

struct IndexEntry {
  std::string meme_id;
  std::vector<float> fused;
  double norm = 0.0;
};

/// Fused reference embeddings in manifest order. Immutable once built.
struct SimilarityIndex {
  std::vector<IndexEntry> entries;
  FusionWeights weights;
  std::size_t dim = 0;
  std::string encoder;
};

struct Neighbor {
  std::string meme_id;
  double score = 0.0;

  friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

struct Neighbors {
  std::string target_id;
  std::vector<Neighbor> items;

  friend bool operator==(const Neighbors&, const Neighbors&) = default;
};

namespace detail {

inline double l2_norm(std::span<const float> v) {
  double sum = 0.0;
  for (float x : v) sum += static_cast<double>(x) * static_cast<double>(x);
  return std::sqrt(sum);
}

inline double dot(std::span<const float> a, std::span<const float> b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += static_cast<double>(a[i]) * static_cast<double>(b[i]);
  return sum;
}

inline double cosine_with_norms(std::span<const float> a, std::span<const float> b, double norm_a,
                                double norm_b) {
  return std::clamp(dot(a, b) / (norm_a * norm_b), -1.0, 1.0);
}

inline void require_finite(std::span<const float> v, const std::string& what) {
  for (float x : v) {
    if (!std::isfinite(x)) throw Error(ErrorKind::NonFiniteValue, what);
  }
}

}  // namespace detail

inline double cosine_similarity(std::span<const float> a, std::span<const float> b) {
  if (a.size() != b.size()) {
    throw Error(ErrorKind::DimensionMismatch,
                std::to_string(a.size()) + " vs " + std::to_string(b.size()));
  }
  const double norm_a = detail::l2_norm(a);
  const double norm_b = detail::l2_norm(b);
  if (norm_a == 0.0 || norm_b == 0.0) throw Error(ErrorKind::ZeroNormVector, "cosine of a zero vector");
  return detail::cosine_with_norms(a, b, norm_a, norm_b);
}

/// lambda_v * unit(image) + lambda_t * unit(text). Each modality is
/// normalized first so the weights mean the same thing regardless of the
/// encoder's raw output scale. The result itself is left unnormalized.
inline std::vector<float> fuse_embedding(const EmbeddingRecord& rec, const FusionWeights& w) {
  if (rec.image_vec.size() != rec.text_vec.size()) {
    throw Error(ErrorKind::DimensionMismatch, rec.meme_id + ": image and text vectors differ in length");
  }
  detail::require_finite(rec.image_vec, rec.meme_id + ": image_vec");
  detail::require_finite(rec.text_vec, rec.meme_id + ": text_vec");
  const double image_norm = detail::l2_norm(rec.image_vec);
  const double text_norm = detail::l2_norm(rec.text_vec);
  if (image_norm == 0.0) throw Error(ErrorKind::ZeroNormModality, rec.meme_id + ": image");
  if (text_norm == 0.0) throw Error(ErrorKind::ZeroNormModality, rec.meme_id + ": text");

  std::vector<float> fused(rec.image_vec.size());
  for (std::size_t i = 0; i < fused.size(); ++i) {
    fused[i] = static_cast<float>(w.lambda_v * (rec.image_vec[i] / image_norm) +
                                  w.lambda_t * (rec.text_vec[i] / text_norm));
  }
  return fused;
}

inline IndexEntry make_index_entry(std::string id, std::vector<float> fused) {
  const double norm = detail::l2_norm(fused);
  if (norm == 0.0) throw Error(ErrorKind::ZeroNormVector, id + ": fused embedding has zero norm");
  return IndexEntry{std::move(id), std::move(fused), norm};
}

inline SimilarityIndex build_index(const DatasetManifest& manifest, const EmbeddingMap& embeddings,
                                   const FusionWeights& w) {
  w.validate();
  SimilarityIndex index;
  index.weights = w;
  index.dim = manifest.embedding_dim;
  for (const auto& meme : manifest.memes) {
    if (meme.split != Split::Reference) continue;
    auto it = embeddings.find(meme.id);
    if (it == embeddings.end()) throw Error(ErrorKind::MissingEmbedding, meme.id);
    const EmbeddingRecord& rec = it->second;
    if (index.dim == 0) index.dim = rec.image_vec.size();
    if (rec.image_vec.size() != index.dim || rec.text_vec.size() != index.dim) {
      throw Error(ErrorKind::DimensionMismatch,
                  meme.id + ": expected dimension " + std::to_string(index.dim));
    }
    index.entries.push_back(make_index_entry(meme.id, fuse_embedding(rec, w)));
  }
  if (index.entries.empty()) throw Error(ErrorKind::EmptyReferenceSet, "no reference-split memes to index");
  return index;
}

namespace detail {

struct Scored {
  std::size_t position;
  double score;
};

// Higher score first; equal scores keep manifest order.
inline bool ranks_before(const Scored& a, const Scored& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.position < b.position;
}

inline std::vector<float> fuse_target(const SimilarityIndex& index, const EmbeddingRecord& target) {
  if (target.image_vec.size() != index.dim || target.text_vec.size() != index.dim) {
    throw Error(ErrorKind::DimensionMismatch, target.meme_id + ": expected dimension " +
                                                  std::to_string(index.dim));
  }
  return fuse_embedding(target, index.weights);
}

inline std::size_t eligible_count(const SimilarityIndex& index, const std::string& target_id) {
  std::size_t n = 0;
  for (const auto& e : index.entries) n += e.meme_id != target_id;
  return n;
}

inline void check_k(std::size_t k, std::size_t available) {
  if (k > available) {
    throw Error(ErrorKind::KTooLarge,
                "k=" + std::to_string(k) + " but only " + std::to_string(available) + " available");
  }
}

}  // namespace detail

/// Top-k reference memes by cosine similarity to the fused target. A target
/// that is itself in the index never appears in its own neighbor list.
inline Neighbors retrieve_similar(const SimilarityIndex& index, const EmbeddingRecord& target, std::size_t k) {
  Neighbors out{target.meme_id, {}};
  detail::check_k(k, detail::eligible_count(index, target.meme_id));
  if (k == 0) return out;

  const std::vector<float> query = detail::fuse_target(index, target);
  const double query_norm = detail::l2_norm(query);
  if (query_norm == 0.0) throw Error(ErrorKind::ZeroNormVector, target.meme_id + ": fused target");

  std::vector<detail::Scored> scored;
  scored.reserve(index.entries.size());
  for (std::size_t i = 0; i < index.entries.size(); ++i) {
    const IndexEntry& e = index.entries[i];
    if (e.meme_id == target.meme_id) continue;
    scored.push_back({i, detail::cosine_with_norms(query, e.fused, query_norm, e.norm)});
  }
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(k), scored.end(),
                    detail::ranks_before);
  out.items.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    out.items.push_back({index.entries[scored[i].position].meme_id, scored[i].score});
  }
  return out;
}

/// Reference implementation for tests: score everything with
/// cosine_similarity, stable-sort by descending score, take k.
inline Neighbors brute_force_topk(const SimilarityIndex& index, const EmbeddingRecord& target, std::size_t k) {
  Neighbors out{target.meme_id, {}};
  detail::check_k(k, detail::eligible_count(index, target.meme_id));
  if (k == 0) return out;

  const std::vector<float> query = detail::fuse_target(index, target);
  std::vector<Neighbor> all;
  for (const auto& e : index.entries) {
    if (e.meme_id == target.meme_id) continue;
    all.push_back({e.meme_id, cosine_similarity(query, e.fused)});
  }
  std::stable_sort(all.begin(), all.end(), [](const Neighbor& a, const Neighbor& b) { return a.score > b.score; });
  all.resize(k);
  out.items = std::move(all);
  return out;
}

}  // namespace mind
