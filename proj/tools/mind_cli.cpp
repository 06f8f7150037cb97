// mind: harmful-meme detection over retrieved references, derived insights
// and a two-debater + judge protocol.
//
//   mind index    --config run.cfg
//   mind retrieve --config run.cfg <meme-id>
//   mind run      --config run.cfg [--mode no_iai] [--seed 7]
//   mind eval     --report reports/<id>/transcripts.jsonl --manifest memes.jsonl
//   mind sweep-k  --config run.cfg --k-values 1,3,5
//
// Exit codes: 0 ok, 2 config, 3 I/O, 4 backend, 5 data/validation.

#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "mind/mind.hpp"

namespace {

struct SharedFlags {
  std::string config;
  std::vector<std::pair<std::string, std::string*>> values;  // config key -> flag storage
  std::vector<std::string> sets;
  bool no_cache = false;

  std::string manifest, embeddings, index, k, mode, backend, mock_scenario, seed, out, endpoint, model, run_id,
      parallelism, error_policy;

  void attach(CLI::App* cmd) {
    cmd->add_option("--config", config, "Flat key = value config file");
    auto add = [&](const char* flag, const char* key, std::string* slot, const char* help) {
      cmd->add_option(flag, *slot, help);
      values.emplace_back(key, slot);
    };
    add("--manifest", "manifest", &manifest, "Manifest JSONL");
    add("--embeddings", "embeddings", &embeddings, "Embedding JSONL");
    add("--index", "index", &index, "Prebuilt index file (retrieve)");
    add("--k", "k", &k, "Number of similar memes (default 3)");
    add("--mode", "mode", &mode, "full|no_ssr|no_rid|fwd_only|back_only|no_iai|baseline");
    add("--backend", "backend", &backend, "mock|http");
    add("--mock-scenario", "mock_scenario", &mock_scenario, "Mock rule file");
    add("--seed", "seed", &seed, "Seed for no_ssr draws");
    add("--out", "out", &out, "Output directory");
    add("--endpoint", "endpoint", &endpoint, "Chat-completions URL (http backend)");
    add("--model", "model", &model, "Model name sent to the backend");
    add("--run-id", "run_id", &run_id, "Fixed run id instead of hash+timestamp");
    add("--parallelism", "sample_parallelism", &parallelism, "Concurrent samples");
    add("--error-policy", "error_policy", &error_policy, "incorrect|harmless");
    cmd->add_option("--set", sets, "Extra key=value overrides")->take_all();
    cmd->add_flag("--no-cache", no_cache, "Disable the response cache");
  }

  [[nodiscard]] mind::RunConfig resolve() const {
    mind::RunConfig cfg;
    if (!config.empty()) mind::load_config_file(cfg, config);
    for (const auto& s : sets) {
      const auto eq = s.find('=');
      if (eq == std::string::npos) throw mind::Error(mind::ErrorKind::ConfigError, "--set expects key=value: " + s);
      mind::apply_setting(cfg, s.substr(0, eq), s.substr(eq + 1));
    }
    for (const auto& [key, slot] : values) {
      if (!slot->empty()) mind::apply_setting(cfg, key, *slot);
    }
    if (no_cache) cfg.cache = false;
    return cfg;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mind - zero-shot harmful meme detection"};
  app.require_subcommand(1);

  SharedFlags index_flags, retrieve_flags, run_flags, sweep_flags;

  auto* index_cmd = app.add_subcommand("index", "Build and persist the fused reference index");
  index_flags.attach(index_cmd);

  auto* retrieve_cmd = app.add_subcommand("retrieve", "Print the top-K similar reference memes for one meme");
  retrieve_flags.attach(retrieve_cmd);
  std::string target_id;
  retrieve_cmd->add_option("target", target_id, "Meme id")->required();

  auto* run_cmd = app.add_subcommand("run", "Run the pipeline over every test meme");
  run_flags.attach(run_cmd);

  auto* eval_cmd = app.add_subcommand("eval", "Score a transcripts file against a manifest");
  std::string report_path, eval_manifest, eval_policy = "incorrect";
  eval_cmd->add_option("--report", report_path, "transcripts.jsonl")->required();
  eval_cmd->add_option("--manifest", eval_manifest, "Manifest JSONL")->required();
  eval_cmd->add_option("--error-policy", eval_policy, "incorrect|harmless");

  auto* sweep_cmd = app.add_subcommand("sweep-k", "Run and evaluate once per K value");
  sweep_flags.attach(sweep_cmd);
  std::vector<std::size_t> k_values;
  sweep_cmd->add_option("--k-values", k_values, "K values, e.g. 1,3,5")->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : mind::kExitConfig;
  }

  try {
    if (*index_cmd) {
      mind::cmd_index(index_flags.resolve(), std::cout);
    } else if (*retrieve_cmd) {
      mind::cmd_retrieve(retrieve_flags.resolve(), target_id, std::cout);
    } else if (*run_cmd) {
      mind::cmd_run(run_flags.resolve(), std::cout);
    } else if (*eval_cmd) {
      mind::RunConfig policy_holder;
      mind::apply_setting(policy_holder, "error_policy", eval_policy);
      mind::cmd_eval(report_path, eval_manifest, std::cout, policy_holder.error_policy);
    } else if (*sweep_cmd) {
      mind::cmd_sweep_k(sweep_flags.resolve(), k_values, std::cout, std::cerr);
    }
  } catch (const mind::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return mind::exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return mind::kExitIo;
  }
  return mind::kExitOk;
}
