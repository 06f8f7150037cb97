#pragma once

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iomanip>
#include <memory>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "mind/config.hpp"
#include "mind/evaluation.hpp"
#include "mind/http_backend.hpp"
#include "mind/mock_backend.hpp"
#include "mind/pipeline.hpp"
#include "mind/retrieval_io.hpp"
#include "mind/transcript_io.hpp"

namespace mind {

/// Process exit codes of the `mind` command.
enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 2,
  kExitIo = 3,
  kExitBackend = 4,
  kExitData = 5,
};

inline int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::ConfigError:
    case ErrorKind::MissingPlaceholder:
    case ErrorKind::DuplicatePlaceholder:
    case ErrorKind::NoDefaultRule:
    case ErrorKind::EmptySweep: return kExitConfig;
    case ErrorKind::IoError:
    case ErrorKind::ParseError: return kExitIo;
    case ErrorKind::Timeout:
    case ErrorKind::TransportError:
    case ErrorKind::BadStatus: return kExitBackend;
    default: return kExitData;
  }
}

inline std::string fixed4(double v) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(4) << v;
  return os.str();
}

namespace detail {

struct LoadedData {
  DatasetManifest manifest;
  std::optional<EmbeddingFile> embeddings;
  std::optional<SimilarityIndex> index;
};

inline LoadedData load_data(const RunConfig& cfg, bool need_index) {
  if (cfg.manifest.empty()) throw Error(ErrorKind::ConfigError, "no manifest configured");
  LoadedData data{load_manifest(cfg.manifest), std::nullopt, std::nullopt};
  if (need_index) {
    if (cfg.embeddings.empty()) throw Error(ErrorKind::ConfigError, "no embeddings file configured");
    data.embeddings = load_embeddings(cfg.embeddings);
    data.manifest.embedding_dim = data.embeddings->dim;
    data.index = build_index(data.manifest, data.embeddings->records, cfg.weights);
    data.index->encoder = data.embeddings->encoder;
  }
  return data;
}

inline std::shared_ptr<ChatBackend> make_backend(const RunConfig& cfg) {
  if (cfg.backend.kind == BackendKind::Http) return std::make_shared<HttpBackend>(cfg.backend);
  if (cfg.backend.mock_scenario.empty()) return std::make_shared<MockBackend>();
  return std::make_shared<MockBackend>(MockScenario::load(cfg.backend.mock_scenario));
}

}  // namespace detail

inline std::filesystem::path index_path(const RunConfig& cfg) { return cfg.out / "index" / "index.jsonl"; }

/// Builds the fused reference index and writes it under <out>/index/.
inline std::filesystem::path cmd_index(const RunConfig& cfg, std::ostream& out) {
  validate(cfg);
  auto data = detail::load_data(cfg, true);
  const auto path = index_path(cfg);
  write_index(path, *data.index);
  out << "indexed " << data.index->entries.size() << " reference memes (dim " << data.index->dim << ") -> "
      << path.string() << "\n";
  return path;
}

/// Top-K neighbors of one embedded meme, printed as rank/id/score rows.
inline Neighbors cmd_retrieve(const RunConfig& cfg, const std::string& target_id, std::ostream& out) {
  validate(cfg);
  if (cfg.embeddings.empty()) throw Error(ErrorKind::ConfigError, "no embeddings file configured");
  const EmbeddingFile embeddings = load_embeddings(cfg.embeddings);
  auto target = embeddings.records.find(target_id);
  if (target == embeddings.records.end()) throw Error(ErrorKind::UnknownTargetId, target_id);

  SimilarityIndex index;
  if (!cfg.index.empty()) {
    index = load_index(cfg.index);
  } else {
    DatasetManifest manifest = load_manifest(cfg.manifest);
    manifest.embedding_dim = embeddings.dim;
    index = build_index(manifest, embeddings.records, cfg.weights);
  }
  Neighbors n = retrieve_similar(index, target->second, cfg.k);
  for (std::size_t i = 0; i < n.items.size(); ++i) {
    out << (i + 1) << "\t" << n.items[i].meme_id << "\t" << std::fixed << std::setprecision(6) << n.items[i].score
        << "\n";
  }
  return n;
}

struct RunOutput {
  std::filesystem::path report_dir;
  std::vector<SampleTranscript> transcripts;
  EvalResult eval;
  json summary;
  std::size_t backend_calls = 0;
  std::size_t cache_hits = 0;
};

inline RunInfo run_info(const RunConfig& cfg) {
  return {std::string(to_string(cfg.mode)), cfg.mode == Mode::Baseline ? 0 : cfg.k, cfg.weights.lambda_v,
          cfg.weights.lambda_t, cfg.seed};
}

/// Every test-split meme through the configured mode. Writes
/// reports/<run-id>/transcripts.jsonl and reports/<run-id>/summary.json.
/// `backend` overrides the configured one (tests inject instrumented mocks).
inline RunOutput cmd_run(const RunConfig& cfg, std::ostream& out, std::shared_ptr<ChatBackend> backend = nullptr) {
  validate(cfg);
  const auto started = std::chrono::steady_clock::now();
  auto data = detail::load_data(cfg, uses_retrieval(cfg.mode));
  if (cfg.mode == Mode::Baseline) {
    if (data.manifest.split(Split::Test).empty()) throw Error(ErrorKind::MissingField, "manifest has no test-split memes");
  } else {
    data.manifest.require_runnable();
  }

  if (!backend) backend = detail::make_backend(cfg);
  std::shared_ptr<ResponseCache> cache;
  if (cfg.cache) cache = std::make_shared<ResponseCache>(cfg.effective_cache_dir());
  LmmClient client(backend, cfg.backend, cache);

  PipelineContext ctx(data.manifest, client, load_prompts(cfg.prompts, cfg.max_insights), cfg.k, cfg.seed,
                      data.index ? &*data.index : nullptr, data.embeddings ? &data.embeddings->records : nullptr);
  RunOutput result;
  result.transcripts = run_samples(ctx, data.manifest.split(Split::Test), cfg.mode, cfg.sample_parallelism);
  result.eval = evaluate_report(result.transcripts, data.manifest, cfg.error_policy);
  result.backend_calls = client.backend_calls();
  result.cache_hits = client.cache_hits();

  const std::string run_id = resolve_run_id(cfg);
  result.report_dir = cfg.out / "reports" / run_id;
  write_text_file(result.report_dir / "transcripts.jsonl", serialize_transcripts(result.transcripts));
  result.summary = summary_json(result.eval, run_info(cfg));
  result.summary["run"] = {
      {"run_id", run_id},
      {"generated_at", utc_timestamp("%Y-%m-%dT%H:%M:%SZ")},
      {"backend", cfg.backend.kind == BackendKind::Http ? "http" : "mock"},
      {"model", cfg.backend.model_name},
      {"backend_calls", result.backend_calls},
      {"cache_hits", result.cache_hits},
      {"elapsed_ms",
       std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count()}};
  write_text_file(result.report_dir / "summary.json", result.summary.dump(2) + "\n");

  std::size_t failed = 0;
  std::size_t unreachable = 0;
  for (const auto& t : result.transcripts) {
    if (!t.error) continue;
    ++failed;
    unreachable += t.error->kind == "TransportError" || t.error->kind == "Timeout";
  }
  out << "processed " << result.transcripts.size() << " samples (" << failed << " failed), "
      << result.eval.total_calls << " agent calls, " << result.backend_calls << " backend requests\n";
  if (result.eval.metrics) {
    out << "accuracy " << fixed4(result.eval.metrics->accuracy) << "\nmacro_f1 " << fixed4(result.eval.metrics->macro_f1)
        << "\n";
  }
  out << "report: " << result.report_dir.string() << "\n";
  if (!result.transcripts.empty() && unreachable == result.transcripts.size()) {
    throw Error(ErrorKind::TransportError, "backend unreachable for every sample");
  }
  return result;
}

/// Scores an existing transcripts file against a manifest; prints the
/// metrics and writes eval_summary.json beside the report.
inline EvalResult cmd_eval(const std::filesystem::path& report_path, const std::filesystem::path& manifest_path,
                           std::ostream& out, ErrorPolicy policy = ErrorPolicy::Incorrect) {
  const auto transcripts = load_transcripts(report_path);
  if (transcripts.empty()) throw Error(ErrorKind::NoScoredSamples, report_path.string() + " has no transcripts");
  const auto manifest = load_manifest(manifest_path);
  EvalResult r = evaluate_report(transcripts, manifest, policy);

  RunInfo info;
  info.mode = std::string(to_string(transcripts.front().mode));
  info.k = transcripts.front().k;
  json summary = summary_json(r, info);
  summary.erase("lambda_v");
  summary.erase("lambda_t");
  summary.erase("seed");
  write_text_file(report_path.parent_path() / "eval_summary.json", summary.dump(2) + "\n");

  out << "scored " << r.counts.scored() << "  skipped " << r.counts.skipped << "  errored " << r.errored << "\n";
  out << "tp " << r.counts.tp << "  fp " << r.counts.fp << "  fn " << r.counts.fn << "  tn " << r.counts.tn << "\n";
  if (r.metrics) {
    out << "accuracy " << fixed4(r.metrics->accuracy) << "\nmacro_f1 " << fixed4(r.metrics->macro_f1) << "\n";
  } else {
    out << "no labeled samples; metrics not computed\n";
  }
  return r;
}

struct SweepRow {
  std::size_t k = 0;
  std::optional<double> accuracy;
  std::optional<double> macro_f1;
  std::size_t total_calls = 0;
};

/// cmd_run + evaluation for each K; writes <out>/sweep_k.tsv.
inline std::vector<SweepRow> cmd_sweep_k(const RunConfig& cfg, const std::vector<std::size_t>& k_values,
                                         std::ostream& out, std::ostream& warn,
                                         std::shared_ptr<ChatBackend> backend = nullptr) {
  if (k_values.empty()) throw Error(ErrorKind::EmptySweep, "no K values given");
  std::vector<std::size_t> ks;
  std::set<std::size_t> seen;
  for (auto k : k_values) {
    if (seen.insert(k).second) {
      ks.push_back(k);
    } else {
      warn << "warning: duplicate K=" << k << " ignored\n";
    }
  }

  const std::string base_id = resolve_run_id(cfg);
  std::vector<SweepRow> rows;
  std::ostringstream sink;
  for (auto k : ks) {
    RunConfig run = cfg;
    run.k = k;
    run.run_id = base_id + "-k" + std::to_string(k);
    RunOutput r = cmd_run(run, sink, backend);
    SweepRow row{k, std::nullopt, std::nullopt, r.eval.total_calls};
    if (r.eval.metrics) {
      row.accuracy = r.eval.metrics->accuracy;
      row.macro_f1 = r.eval.metrics->macro_f1;
    }
    rows.push_back(row);
  }

  std::string table = "K\taccuracy\tmacro_f1\ttotal_calls\n";
  for (const auto& row : rows) {
    table += std::to_string(row.k) + "\t" + (row.accuracy ? fixed4(*row.accuracy) : "-") + "\t" +
             (row.macro_f1 ? fixed4(*row.macro_f1) : "-") + "\t" + std::to_string(row.total_calls) + "\n";
  }
  write_text_file(cfg.out / "sweep_k.tsv", table);
  out << table;
  return rows;
}

}  // namespace mind
