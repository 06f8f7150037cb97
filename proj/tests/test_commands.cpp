#include <gtest/gtest.h>

#include <cstdlib>
#include <sstream>
#include <sys/wait.h>

#include "support.hpp"

namespace mind {
namespace {

class Commands : public ::testing::Test {
 protected:
  void SetUp() override { ds = testing::make_synthetic_dataset(dir / "data", 20, 10, 8, 3); }

  RunConfig config(const std::string& out = "out") const {
    RunConfig cfg;
    cfg.manifest = ds.manifest;
    cfg.embeddings = ds.embeddings;
    cfg.out = dir / out;
    cfg.run_id = "r1";
    return cfg;
  }

  testing::TempDir dir;
  testing::SyntheticDataset ds;
  std::ostringstream sink;
};

TEST_F(Commands, IndexRebuildIsByteIdentical) {
  const auto cfg = config();
  const auto path = cmd_index(cfg, sink);
  const std::string first = read_text_file(path);
  cmd_index(cfg, sink);
  EXPECT_EQ(read_text_file(path), first);
  const auto loaded = load_index(path);
  EXPECT_EQ(loaded.entries.size(), 20u);
  EXPECT_EQ(loaded.dim, 8u);
}

TEST_F(Commands, IndexReportsDimensionMismatchLine) {
  auto lines = read_jsonl(ds.embeddings);
  std::string text;
  for (auto& l : lines) {
    if (l.line_no == 4) l.value["text_vec"] = json::array({1.0, 2.0});
    text += l.value.dump() + "\n";
  }
  write_text_file(ds.embeddings, text);
  try {
    cmd_index(config(), sink);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DimensionMismatch);
    EXPECT_NE(e.detail().find("embeddings.jsonl:4"), std::string::npos) << e.detail();
  }
}

TEST_F(Commands, RetrievePrintsRankedRows) {
  auto cfg = config();
  std::ostringstream out;
  const auto n = cmd_retrieve(cfg, "test0", out);
  ASSERT_EQ(n.items.size(), 3u);
  std::istringstream lines(out.str());
  std::string line;
  int rows = 0;
  while (std::getline(lines, line)) {
    ++rows;
    EXPECT_EQ(line.rfind(std::to_string(rows) + "\t" + n.items[rows - 1].meme_id + "\t", 0), 0u) << line;
  }
  EXPECT_EQ(rows, 3);

  // Same answer from a prebuilt index.
  cfg.index = cmd_index(cfg, sink);
  EXPECT_EQ(cmd_retrieve(cfg, "test0", sink), n);
}

TEST_F(Commands, RetrieveEdgeCases) {
  auto cfg = config();
  try {
    cmd_retrieve(cfg, "nope", sink);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::UnknownTargetId);
  }
  cfg.k = 0;
  std::ostringstream out;
  EXPECT_TRUE(cmd_retrieve(cfg, "test0", out).items.empty());
  EXPECT_EQ(out.str(), "");
  cfg.k = 21;
  EXPECT_THROW(cmd_retrieve(cfg, "test0", sink), Error);
}

TEST_F(Commands, RunWritesReportAndSummary) {
  const auto r = cmd_run(config(), sink);
  EXPECT_EQ(r.report_dir, dir / "out" / "reports" / "r1");
  EXPECT_EQ(load_transcripts(r.report_dir / "transcripts.jsonl").size(), 10u);
  const json summary = json::parse(read_text_file(r.report_dir / "summary.json"));
  EXPECT_EQ(summary["mode"], "full");
  EXPECT_EQ(summary["k"], 3);
  EXPECT_EQ(summary["scored"], 10);
  EXPECT_EQ(summary["run"]["run_id"], "r1");
  EXPECT_EQ(summary["calls"]["total"].get<std::size_t>(), r.backend_calls + r.cache_hits);
}

TEST_F(Commands, CallAccountingIdentity) {
  auto cfg = config();
  cfg.cache = false;
  auto mock = std::make_shared<MockBackend>();
  const auto r = cmd_run(cfg, sink, mock);
  std::size_t consensus = 0, judged = 0, calls = 0;
  for (const auto& t : r.transcripts) {
    ASSERT_TRUE(t.final);
    consensus += t.final->source == JudgmentSource::Consensus;
    judged += t.final->source == JudgmentSource::Judge;
    calls += t.calls.size();
  }
  EXPECT_EQ(consensus + judged, 10u);
  EXPECT_EQ(calls, 8 * consensus + 9 * judged);
  EXPECT_EQ(calls, mock->calls());
  EXPECT_EQ(r.eval.total_calls, calls);
}

TEST_F(Commands, RerunIsServedFromCache) {
  const auto cfg = config();
  const auto first = cmd_run(cfg, sink);
  const std::string report1 = testing::normalized_transcripts(first.report_dir / "transcripts.jsonl", true);
  const json summary1 = testing::normalized_summary(first.report_dir / "summary.json");

  auto mock = std::make_shared<MockBackend>();
  auto cfg2 = cfg;
  cfg2.run_id = "r2";
  const auto second = cmd_run(cfg2, sink, mock);
  EXPECT_EQ(mock->calls(), 0u);
  EXPECT_EQ(second.backend_calls, 0u);
  EXPECT_EQ(testing::normalized_transcripts(second.report_dir / "transcripts.jsonl", true), report1);
  EXPECT_EQ(testing::normalized_summary(second.report_dir / "summary.json"), summary1);
  for (const auto& t : second.transcripts) {
    for (const auto& c : t.calls) EXPECT_TRUE(c.cached);
  }
}

TEST_F(Commands, NoSsrSeedReproducibility) {
  auto cfg = config();
  cfg.mode = Mode::NoSsr;
  cfg.seed = 7;
  cfg.cache = false;
  const auto a = cmd_run(cfg, sink);
  cfg.run_id = "r2";
  const auto b = cmd_run(cfg, sink);
  cfg.run_id = "r3";
  cfg.seed = 8;
  const auto c = cmd_run(cfg, sink);
  bool any_diff = false;
  for (std::size_t i = 0; i < a.transcripts.size(); ++i) {
    EXPECT_EQ(a.transcripts[i].neighbors, b.transcripts[i].neighbors);
    any_diff |= a.transcripts[i].neighbors != c.transcripts[i].neighbors;
  }
  EXPECT_TRUE(any_diff);
}

TEST_F(Commands, BaselineNeedsNoEmbeddings) {
  auto cfg = config();
  cfg.mode = Mode::Baseline;
  cfg.embeddings.clear();
  const auto r = cmd_run(cfg, sink);
  EXPECT_EQ(r.eval.total_calls, 10u);
  EXPECT_EQ(r.summary["k"], 0);
}

TEST_F(Commands, EvalMatchesRunSummary) {
  const auto r = cmd_run(config(), sink);
  std::ostringstream out;
  const auto report = r.report_dir / "transcripts.jsonl";
  const auto e = cmd_eval(report, ds.manifest, out);
  EXPECT_EQ(e.counts, r.eval.counts);
  EXPECT_DOUBLE_EQ(e.metrics->macro_f1, r.eval.metrics->macro_f1);
  EXPECT_NE(out.str().find("accuracy " + fixed4(r.eval.metrics->accuracy)), std::string::npos);
  const json written = json::parse(read_text_file(r.report_dir / "eval_summary.json"));
  EXPECT_EQ(written["confusion"], r.summary["confusion"]);

  write_text_file(dir / "empty.jsonl", "");
  try {
    cmd_eval(dir / "empty.jsonl", ds.manifest, out);
    FAIL();
  } catch (const Error& e2) {
    EXPECT_EQ(e2.kind(), ErrorKind::NoScoredSamples);
  }
}

TEST_F(Commands, SweepK) {
  const auto cfg = config();
  std::ostringstream out, warn;
  const auto rows = cmd_sweep_k(cfg, {1, 3, 3}, out, warn);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].k, 1u);
  EXPECT_EQ(rows[1].k, 3u);
  EXPECT_EQ(rows[0].total_calls, 10u * 4);
  EXPECT_NE(warn.str().find("duplicate K=3"), std::string::npos);
  const std::string tsv = read_text_file(dir / "out" / "sweep_k.tsv");
  EXPECT_EQ(tsv.rfind("K\taccuracy\tmacro_f1\ttotal_calls\n1\t", 0), 0u);
  EXPECT_TRUE(std::filesystem::exists(dir / "out" / "reports" / "r1-k1" / "summary.json"));

  try {
    cmd_sweep_k(cfg, {}, out, warn);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::EmptySweep);
  }
}

TEST(Config, FileParsingAndRelativePaths) {
  testing::TempDir dir;
  write_text_file(dir / "sub" / "run.cfg",
                  "# demo\n"
                  "manifest = data/memes.jsonl\n"
                  "k = 5   # neighbors\n"
                  "mode = no_iai\n"
                  "lambda_v = 0.7\n"
                  "lambda_t = 0.3\n"
                  "\n"
                  "cache = false\n");
  RunConfig cfg;
  load_config_file(cfg, dir / "sub" / "run.cfg");
  EXPECT_EQ(cfg.manifest, dir / "sub" / "data" / "memes.jsonl");
  EXPECT_EQ(cfg.k, 5u);
  EXPECT_EQ(cfg.mode, Mode::NoIai);
  EXPECT_DOUBLE_EQ(cfg.weights.lambda_v, 0.7);
  EXPECT_FALSE(cfg.cache);

  write_text_file(dir / "bad.cfg", "k = 3\ncolour = red\n");
  try {
    load_config_file(cfg, dir / "bad.cfg");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ConfigError);
    EXPECT_NE(e.detail().find("bad.cfg:2"), std::string::npos);
  }
  EXPECT_THROW(apply_setting(cfg, "k", "-1"), Error);
  EXPECT_THROW(apply_setting(cfg, "mode", "turbo"), Error);
}

TEST(Config, DefaultsAndValidation) {
  RunConfig cfg;
  EXPECT_EQ(cfg.k, 3u);
  EXPECT_DOUBLE_EQ(cfg.weights.lambda_v, 0.8);
  EXPECT_DOUBLE_EQ(cfg.weights.lambda_t, 0.2);
  EXPECT_DOUBLE_EQ(cfg.backend.temperature, 0.0);
  EXPECT_EQ(cfg.mode, Mode::Full);
  EXPECT_NO_THROW(validate(cfg));
  cfg.weights.lambda_v = 1.5;
  EXPECT_THROW(validate(cfg), Error);
  cfg.weights = {0.0, 0.0};
  EXPECT_THROW(validate(cfg), Error);
  cfg = RunConfig{};
  cfg.backend.kind = BackendKind::Http;
  EXPECT_THROW(validate(cfg), Error);
}

TEST(Config, HashTracksOutputAffectingFields) {
  RunConfig a, b;
  EXPECT_EQ(config_hash(a), config_hash(b));
  b.sample_parallelism = 9;
  EXPECT_EQ(config_hash(a), config_hash(b));
  b.seed = 1;
  EXPECT_NE(config_hash(a), config_hash(b));
  EXPECT_EQ(resolve_run_id(a).substr(0, 13), config_hash(a).substr(0, 12) + "-");
}

// Runs the built `mind` binary and returns its exit status.
int mind_cli(const std::string& args, const std::filesystem::path& log) {
  const std::string cmd = std::string(MIND_CLI_PATH) + " " + args + " >" + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

TEST_F(Commands, CliExitCodesAndPrecedence) {
  const auto log = dir / "cli.log";
  write_text_file(dir / "run.cfg", "manifest = data/manifest.jsonl\nembeddings = data/embeddings.jsonl\nk = 2\n"
                                   "out = cli-out\nrun_id = cli\n");
  const std::string cfg = "--config " + (dir / "run.cfg").string();

  EXPECT_EQ(mind_cli("retrieve " + cfg + " test0", log), 0);
  {
    const auto text = read_text_file(log);
    EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 2);
  }
  EXPECT_EQ(mind_cli("retrieve " + cfg + " --set k=4 test0", log), 0);
  {
    const auto text = read_text_file(log);
    EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 4);
  }
  EXPECT_EQ(mind_cli("retrieve " + cfg + " --set k=4 --k 1 test0", log), 0);
  {
    const auto text = read_text_file(log);
    EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 1);
  }

  EXPECT_EQ(mind_cli("run " + cfg, log), 0);
  EXPECT_TRUE(std::filesystem::exists(dir / "cli-out" / "reports" / "cli" / "transcripts.jsonl"));
  EXPECT_EQ(mind_cli("eval --report " + (dir / "cli-out" / "reports" / "cli" / "transcripts.jsonl").string() +
                         " --manifest " + ds.manifest.string(),
                     log),
            0);
  EXPECT_NE(read_text_file(log).find("macro_f1"), std::string::npos);

  EXPECT_EQ(mind_cli("retrieve " + cfg + " nope", log), kExitData);
  EXPECT_EQ(mind_cli("run " + cfg + " --mode turbo", log), kExitConfig);
  EXPECT_EQ(mind_cli("run --config " + (dir / "missing.cfg").string(), log), kExitIo);
  EXPECT_EQ(mind_cli("frobnicate", log), kExitConfig);
  EXPECT_EQ(mind_cli("sweep-k " + cfg, log), kExitConfig);
  EXPECT_EQ(mind_cli("run " + cfg + " --no-cache --backend http --endpoint http://127.0.0.1:9/v1/chat/completions"
                                    " --set max_attempts=1 --set backoff_ms=1",
                     log),
            kExitBackend);
}

}  // namespace
}  // namespace mind
