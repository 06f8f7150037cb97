#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "support.hpp"

namespace mind {
namespace {

ConfusionCounts counts_of(const std::vector<int>& gold, const std::vector<int>& pred) {
  ConfusionCounts c;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    c.add(gold[i] ? BinaryLabel::Harmful : BinaryLabel::Harmless, pred[i] ? BinaryLabel::Harmful : BinaryLabel::Harmless);
  }
  return c;
}

TEST(Metrics, WorkedExample) {
  const ConfusionCounts c{3, 1, 1, 5, 0};
  EXPECT_NEAR(accuracy(c), 0.8, 1e-12);
  // Harmful F1 = 0.75, Harmless F1 = 5/6.
  EXPECT_NEAR(harmful_scores(c).f1, 0.75, 1e-12);
  EXPECT_NEAR(harmless_scores(c).f1, 5.0 / 6.0, 1e-12);
  EXPECT_NEAR(macro_f1(c), 0.79166667, 1e-8);
}

TEST(Metrics, AllPredictedHarmless) {
  // Five harmful, five harmless gold; every prediction harmless.
  const ConfusionCounts c{0, 0, 5, 5, 0};
  EXPECT_DOUBLE_EQ(accuracy(c), 0.5);
  EXPECT_DOUBLE_EQ(harmful_scores(c).precision, 0.0);
  EXPECT_DOUBLE_EQ(harmful_scores(c).f1, 0.0);
  EXPECT_NEAR(harmless_scores(c).f1, 2.0 / 3.0, 1e-12);
  EXPECT_NEAR(macro_f1(c), 1.0 / 3.0, 1e-12);
}

TEST(Metrics, NothingScored) {
  const ConfusionCounts c{};
  try {
    accuracy(c);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NoScoredSamples);
  }
  EXPECT_THROW(macro_f1(c), Error);
}

TEST(Metrics, AgreeWithOracleOnRandomVectors) {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 1 + rng() % 200;
    const double p_gold = (rng() % 101) / 100.0;
    const double p_pred = (rng() % 101) / 100.0;
    std::bernoulli_distribution g(p_gold), p(p_pred);
    std::vector<int> gold(n), pred(n);
    for (std::size_t i = 0; i < n; ++i) {
      gold[i] = g(rng);
      pred[i] = p(rng);
    }
    const auto oracle = testing::metric_oracle(gold, pred);
    const auto c = counts_of(gold, pred);
    ASSERT_NEAR(accuracy(c), oracle.accuracy, 1e-9);
    ASSERT_NEAR(macro_f1(c), oracle.macro_f1, 1e-9);
  }
}

TEST(Metrics, PermutationAndClassSwapInvariance) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng() % 60;
    std::vector<int> gold(n), pred(n);
    for (std::size_t i = 0; i < n; ++i) {
      gold[i] = static_cast<int>(rng() % 2);
      pred[i] = static_cast<int>(rng() % 2);
    }
    const auto base = counts_of(gold, pred);

    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<int> pg(n), pp(n);
    for (std::size_t i = 0; i < n; ++i) {
      pg[i] = gold[perm[i]];
      pp[i] = pred[perm[i]];
    }
    EXPECT_EQ(counts_of(pg, pp), base);

    std::vector<int> sg(n), sp(n);
    for (std::size_t i = 0; i < n; ++i) {
      sg[i] = 1 - gold[i];
      sp[i] = 1 - pred[i];
    }
    const auto swapped = counts_of(sg, sp);
    EXPECT_NEAR(macro_f1(swapped), macro_f1(base), 1e-12);
    EXPECT_NEAR(accuracy(swapped), accuracy(base), 1e-12);
  }
}

SampleTranscript predicted(const std::string& id, std::optional<BinaryLabel> decision) {
  SampleTranscript t;
  t.target_id = id;
  if (decision) {
    t.final = Judgment{*decision, "x", JudgmentSource::Consensus};
  } else {
    t.error = StageError{"debate", "JudgmentUnparseable", "x"};
  }
  t.calls.push_back(CallRecord{1, AgentRole::DebaterFwd, 1, "h", "r", false, 0.0});
  return t;
}

DatasetManifest labeled_manifest() {
  DatasetManifest m;
  m.memes = {{"a", "a.png", "", RawLabel::VeryHarmful, Split::Test},
             {"b", "b.png", "", RawLabel::PartiallyHarmful, Split::Test},
             {"c", "c.png", "", RawLabel::Harmless, Split::Test},
             {"d", "d.png", "", std::nullopt, Split::Test}};
  return m;
}

TEST(EvaluateReport, JoinsMergedGoldLabels) {
  const auto r = evaluate_report({predicted("a", BinaryLabel::Harmful), predicted("b", BinaryLabel::Harmless),
                                  predicted("c", BinaryLabel::Harmless), predicted("d", BinaryLabel::Harmful)},
                                 labeled_manifest());
  EXPECT_EQ(r.counts, (ConfusionCounts{1, 0, 1, 1, 1}));
  EXPECT_EQ(r.errored, 0u);
  ASSERT_TRUE(r.metrics);
  EXPECT_NEAR(r.metrics->accuracy, 2.0 / 3.0, 1e-12);
  EXPECT_EQ(r.total_calls, 4u);
  EXPECT_EQ(r.calls_by_role.at("debater_fwd"), 4u);
}

TEST(EvaluateReport, UnlabeledOnlyHasNoMetrics) {
  const auto r = evaluate_report({predicted("d", BinaryLabel::Harmful)}, labeled_manifest());
  EXPECT_EQ(r.counts.skipped, 1u);
  EXPECT_EQ(r.counts.scored(), 0u);
  EXPECT_FALSE(r.metrics);
  const json s = summary_json(r, RunInfo{});
  EXPECT_TRUE(s["accuracy"].is_null());
  EXPECT_TRUE(s["macro_f1"].is_null());
}

TEST(EvaluateReport, UnknownTarget) {
  try {
    evaluate_report({predicted("zzz", BinaryLabel::Harmful)}, labeled_manifest());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::UnknownTargetId);
  }
}

TEST(EvaluateReport, ErrorPolicy) {
  const std::vector<SampleTranscript> report = {predicted("a", std::nullopt), predicted("c", std::nullopt)};
  const auto wrong = evaluate_report(report, labeled_manifest(), ErrorPolicy::Incorrect);
  EXPECT_EQ(wrong.errored, 2u);
  EXPECT_EQ(wrong.counts, (ConfusionCounts{0, 1, 1, 0, 0}));
  EXPECT_DOUBLE_EQ(wrong.metrics->accuracy, 0.0);

  const auto harmless = evaluate_report(report, labeled_manifest(), ErrorPolicy::Harmless);
  EXPECT_EQ(harmless.errored, 2u);
  EXPECT_EQ(harmless.counts, (ConfusionCounts{0, 0, 1, 1, 0}));
  EXPECT_DOUBLE_EQ(harmless.metrics->accuracy, 0.5);
}

TEST(SummaryJson, CarriesRunParameters) {
  const auto r = evaluate_report({predicted("a", BinaryLabel::Harmful)}, labeled_manifest());
  const json s = summary_json(r, RunInfo{"no_iai", 5, 0.8, 0.2, 11});
  EXPECT_EQ(s["mode"], "no_iai");
  EXPECT_EQ(s["k"], 5);
  EXPECT_EQ(s["seed"], 11);
  EXPECT_EQ(s["confusion"]["tp"], 1);
  EXPECT_EQ(s["calls"]["by_role"]["debater_fwd"], 1);
  EXPECT_DOUBLE_EQ(s["per_class"]["harmful"]["f1"].get<double>(), 1.0);
}

}  // namespace
}  // namespace mind
