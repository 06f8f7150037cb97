#pragma once

#include <algorithm>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "mind/error.hpp"
#include "mind/jsonl.hpp"

namespace mind {

/// Labels as they appear in the source datasets. HarM uses the three-way
/// scheme (very/partially harmful, harmless); FHM and MAMI are binary.
enum class RawLabel { Harmful, Harmless, VeryHarmful, PartiallyHarmful };

enum class BinaryLabel { Harmful, Harmless };

enum class Split { Reference, Test };

constexpr BinaryLabel merge_label(RawLabel raw) noexcept {
  switch (raw) {
    case RawLabel::Harmless: return BinaryLabel::Harmless;
    case RawLabel::Harmful:
    case RawLabel::VeryHarmful:
    case RawLabel::PartiallyHarmful: return BinaryLabel::Harmful;
  }
  return BinaryLabel::Harmful;
}

constexpr BinaryLabel flip(BinaryLabel label) noexcept {
  return label == BinaryLabel::Harmful ? BinaryLabel::Harmless : BinaryLabel::Harmful;
}

constexpr std::string_view to_string(RawLabel label) noexcept {
  switch (label) {
    case RawLabel::Harmful: return "harmful";
    case RawLabel::Harmless: return "harmless";
    case RawLabel::VeryHarmful: return "very harmful";
    case RawLabel::PartiallyHarmful: return "partially harmful";
  }
  return "harmful";
}

constexpr std::string_view to_string(BinaryLabel label) noexcept {
  return label == BinaryLabel::Harmful ? "harmful" : "harmless";
}

constexpr std::string_view to_string(Split split) noexcept {
  return split == Split::Reference ? "reference" : "test";
}

inline std::optional<RawLabel> parse_raw_label(std::string_view text) {
  if (text == "harmful") return RawLabel::Harmful;
  if (text == "harmless") return RawLabel::Harmless;
  if (text == "very harmful" || text == "very_harmful") return RawLabel::VeryHarmful;
  if (text == "partially harmful" || text == "partially_harmful") return RawLabel::PartiallyHarmful;
  return std::nullopt;
}

inline std::optional<BinaryLabel> parse_binary_label(std::string_view text) {
  if (text == "harmful") return BinaryLabel::Harmful;
  if (text == "harmless") return BinaryLabel::Harmless;
  return std::nullopt;
}

inline std::optional<Split> parse_split(std::string_view text) {
  if (text == "reference") return Split::Reference;
  if (text == "test") return Split::Test;
  return std::nullopt;
}

struct Meme {
  std::string id;
  std::string image_ref;
  std::string text;
  std::optional<RawLabel> label;
  Split split = Split::Test;

  friend bool operator==(const Meme&, const Meme&) = default;
};

struct DatasetManifest {
  std::vector<Meme> memes;
  // Expected embedding dimension; 0 until an embedding file has been attached.
  std::size_t embedding_dim = 0;

  [[nodiscard]] const Meme* find(std::string_view id) const {
    auto it = std::find_if(memes.begin(), memes.end(), [&](const Meme& m) { return m.id == id; });
    return it == memes.end() ? nullptr : &*it;
  }

  [[nodiscard]] std::vector<const Meme*> split(Split which) const {
    std::vector<const Meme*> out;
    for (const auto& m : memes) {
      if (m.split == which) out.push_back(&m);
    }
    return out;
  }

  /// Full runs need at least one meme on each side of the split.
  void require_runnable() const {
    bool has_ref = false;
    bool has_test = false;
    for (const auto& m : memes) {
      has_ref |= m.split == Split::Reference;
      has_test |= m.split == Split::Test;
    }
    if (!has_ref) throw Error(ErrorKind::EmptyReferenceSet, "manifest has no reference-split memes");
    if (!has_test) throw Error(ErrorKind::MissingField, "manifest has no test-split memes");
  }

  friend bool operator==(const DatasetManifest&, const DatasetManifest&) = default;
};

namespace detail {

inline std::string row_name(const JsonLine& row) { return "row " + std::to_string(row.line_no); }

inline const json& require_string_field(const JsonLine& row, const char* field) {
  if (!row.value.is_object() || !row.value.contains(field)) {
    throw Error(ErrorKind::MissingField, row_name(row) + ": missing field '" + field + "'");
  }
  const json& v = row.value.at(field);
  if (!v.is_string()) {
    throw Error(ErrorKind::MissingField, row_name(row) + ": field '" + field + "' is not a string");
  }
  return v;
}

}  // namespace detail

/// Turns parsed manifest rows into a manifest. Input order is preserved and
/// is significant downstream (retrieval tie-break).
inline DatasetManifest validate_manifest(const std::vector<JsonLine>& rows) {
  DatasetManifest manifest;
  manifest.memes.reserve(rows.size());
  std::unordered_set<std::string> seen;
  for (const auto& row : rows) {
    Meme meme;
    meme.id = detail::require_string_field(row, "id").get<std::string>();
    if (meme.id.empty()) {
      throw Error(ErrorKind::MissingField, detail::row_name(row) + ": field 'id' is empty");
    }
    meme.image_ref = detail::require_string_field(row, "image").get<std::string>();
    meme.text = detail::require_string_field(row, "text").get<std::string>();
    const auto split_text = detail::require_string_field(row, "split").get<std::string>();
    auto split = parse_split(split_text);
    if (!split) {
      throw Error(ErrorKind::BadSplit, detail::row_name(row) + ": '" + split_text + "'");
    }
    meme.split = *split;
    if (row.value.contains("label") && !row.value.at("label").is_null()) {
      const json& lv = row.value.at("label");
      auto label = lv.is_string() ? parse_raw_label(lv.get<std::string>()) : std::nullopt;
      if (!label) {
        throw Error(ErrorKind::BadLabel, detail::row_name(row) + ": '" + lv.dump() + "'");
      }
      meme.label = *label;
    }
    if (!seen.insert(meme.id).second) {
      throw Error(ErrorKind::DuplicateId, meme.id + " (" + detail::row_name(row) + ")");
    }
    manifest.memes.push_back(std::move(meme));
  }
  return manifest;
}

inline json to_json(const Meme& meme) {
  json j = {{"id", meme.id}, {"image", meme.image_ref}, {"text", meme.text}};
  if (meme.label) j["label"] = std::string(to_string(*meme.label));
  j["split"] = std::string(to_string(meme.split));
  return j;
}

/// Inverse of validate_manifest: the manifest rendered back as rows.
inline std::vector<JsonLine> to_rows(const DatasetManifest& manifest) {
  std::vector<JsonLine> rows;
  rows.reserve(manifest.memes.size());
  std::size_t line_no = 0;
  for (const auto& meme : manifest.memes) rows.push_back({++line_no, to_json(meme)});
  return rows;
}

/// Relative local image paths are taken relative to the manifest's
/// directory; URLs and absolute paths are kept as written.
inline DatasetManifest load_manifest(const std::filesystem::path& path) {
  DatasetManifest manifest;
  try {
    manifest = validate_manifest(read_jsonl(path));
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::IoError || e.kind() == ErrorKind::ParseError) throw;
    throw Error(e.kind(), path.string() + ": " + e.detail());
  }
  const auto base = path.parent_path();
  for (auto& meme : manifest.memes) {
    const std::string_view ref = meme.image_ref;
    if (ref.find("://") != std::string_view::npos || ref.starts_with("data:")) continue;
    if (std::filesystem::path(meme.image_ref).is_relative() && !base.empty()) {
      meme.image_ref = (base / meme.image_ref).string();
    }
  }
  return manifest;
}

inline void write_manifest(const std::filesystem::path& path, const DatasetManifest& manifest) {
  std::string out;
  for (const auto& meme : manifest.memes) out += to_json(meme).dump() + "\n";
  write_text_file(path, out);
}

}  // namespace mind
