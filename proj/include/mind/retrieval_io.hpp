#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "mind/jsonl.hpp"
#include "mind/retrieval.hpp"

namespace mind {

struct EmbeddingFile {
  std::size_t dim = 0;
  std::string encoder;
  EmbeddingMap records;
  std::vector<std::string> order;  // ids in file order
};

namespace detail {

inline std::string where(const std::filesystem::path& path, std::size_t line_no) {
  return path.string() + ":" + std::to_string(line_no);
}

inline std::vector<float> read_vector(const json& v, std::size_t dim, const std::string& at, const char* field) {
  if (!v.is_array()) throw Error(ErrorKind::ParseError, at + ": '" + field + "' is not an array");
  if (v.size() != dim) {
    throw Error(ErrorKind::DimensionMismatch, at + ": '" + field + "' has length " + std::to_string(v.size()) +
                                                  ", header dim is " + std::to_string(dim));
  }
  std::vector<float> out;
  out.reserve(dim);
  for (const auto& x : v) {
    if (!x.is_number()) throw Error(ErrorKind::ParseError, at + ": non-numeric entry in '" + field + "'");
    const double d = x.get<double>();
    if (!std::isfinite(d)) throw Error(ErrorKind::NonFiniteValue, at + ": '" + field + "'");
    out.push_back(static_cast<float>(d));
  }
  return out;
}

inline std::size_t read_header_dim(const JsonLine& header, const std::filesystem::path& path) {
  const json& h = header.value;
  if (!h.is_object() || !h.contains("dim") || !h.at("dim").is_number_unsigned() || h.at("dim").get<std::size_t>() == 0) {
    throw Error(ErrorKind::ParseError, where(path, header.line_no) + ": header must carry a positive 'dim'");
  }
  return h.at("dim").get<std::size_t>();
}

inline json vector_json(const std::vector<float>& v) {
  json arr = json::array();
  for (float x : v) arr.push_back(x);
  return arr;
}

}  // namespace detail

inline EmbeddingFile load_embeddings(const std::filesystem::path& path) {
  const auto lines = read_jsonl(path);
  if (lines.empty()) throw Error(ErrorKind::ParseError, path.string() + ": empty embedding file");
  EmbeddingFile file;
  file.dim = detail::read_header_dim(lines.front(), path);
  file.encoder = lines.front().value.value("encoder", "");
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto at = detail::where(path, lines[i].line_no);
    const json& row = lines[i].value;
    if (!row.is_object() || !row.contains("id") || !row.at("id").is_string()) {
      throw Error(ErrorKind::MissingField, at + ": missing string 'id'");
    }
    if (!row.contains("image_vec") || !row.contains("text_vec")) {
      throw Error(ErrorKind::MissingField, at + ": record needs image_vec and text_vec");
    }
    EmbeddingRecord rec;
    rec.meme_id = row.at("id").get<std::string>();
    rec.image_vec = detail::read_vector(row.at("image_vec"), file.dim, at, "image_vec");
    rec.text_vec = detail::read_vector(row.at("text_vec"), file.dim, at, "text_vec");
    if (file.records.contains(rec.meme_id)) throw Error(ErrorKind::DuplicateId, at + ": " + rec.meme_id);
    file.order.push_back(rec.meme_id);
    file.records.emplace(rec.meme_id, std::move(rec));
  }
  return file;
}

inline void write_embeddings(const std::filesystem::path& path, const EmbeddingFile& file) {
  std::string out = json{{"dim", file.dim}, {"encoder", file.encoder}}.dump() + "\n";
  for (const auto& id : file.order) {
    const auto& rec = file.records.at(id);
    out += json{{"id", id}, {"image_vec", detail::vector_json(rec.image_vec)},
                {"text_vec", detail::vector_json(rec.text_vec)}}
               .dump() +
           "\n";
  }
  write_text_file(path, out);
}

/// Index files reuse the embedding-file layout: a header line (now also
/// carrying the fusion weights) followed by one fused vector per line.
inline std::string serialize_index(const SimilarityIndex& index) {
  json header = {{"dim", index.dim},
                 {"encoder", index.encoder},
                 {"kind", "fused-index"},
                 {"lambda_t", index.weights.lambda_t},
                 {"lambda_v", index.weights.lambda_v}};
  std::string out = header.dump() + "\n";
  for (const auto& e : index.entries) {
    out += json{{"id", e.meme_id}, {"fused_vec", detail::vector_json(e.fused)}}.dump() + "\n";
  }
  return out;
}

inline void write_index(const std::filesystem::path& path, const SimilarityIndex& index) {
  write_text_file(path, serialize_index(index));
}

inline SimilarityIndex load_index(const std::filesystem::path& path) {
  const auto lines = read_jsonl(path);
  if (lines.empty()) throw Error(ErrorKind::ParseError, path.string() + ": empty index file");
  SimilarityIndex index;
  const json& h = lines.front().value;
  index.dim = detail::read_header_dim(lines.front(), path);
  index.encoder = h.value("encoder", "");
  if (!h.contains("lambda_v") || !h.contains("lambda_t")) {
    throw Error(ErrorKind::ParseError, path.string() + ": index header lacks fusion weights");
  }
  index.weights = {h.at("lambda_v").get<double>(), h.at("lambda_t").get<double>()};
  index.weights.validate();
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto at = detail::where(path, lines[i].line_no);
    const json& row = lines[i].value;
    if (!row.is_object() || !row.contains("id") || !row.contains("fused_vec")) {
      throw Error(ErrorKind::MissingField, at + ": index entry needs id and fused_vec");
    }
    index.entries.push_back(make_index_entry(row.at("id").get<std::string>(),
                                             detail::read_vector(row.at("fused_vec"), index.dim, at, "fused_vec")));
  }
  if (index.entries.empty()) throw Error(ErrorKind::EmptyReferenceSet, path.string() + ": index has no entries");
  return index;
}

}  // namespace mind
