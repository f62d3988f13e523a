// Copyright 2026 The arsrank Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <string>

#include "arsrank/checkpoint.hpp"
#include "arsrank/errors.hpp"
#include "arsrank/gradcheck.hpp"
#include "arsrank/trainer.hpp"

using namespace arsrank;

namespace {

TrainConfig small_config() {
  TrainConfig c;
  c.epochs = 2;
  c.batch_size = 16;
  c.seed = 11;
  c.vocab_size = 4096;
  c.latent_dim = 32;
  c.embed_dim = 16;
  return c;
}

std::string metrics_of(const TrainResult& r) {
  std::ostringstream ss;
  write_metrics_jsonl(r, ss);
  return ss.str();
}

}  // namespace

TEST(Train, SecondEpochLossIsLower) {
  const auto items = synthesize_toy_dataset(64, 1);
  TrainConfig c = small_config();
  c.latent_dim = kDefaultLatentDim;
  c.embed_dim = kDefaultToyDim;
  const auto r = train(c, items);
  ASSERT_EQ(r.epochs.size(), 2u);
  EXPECT_LT(r.epochs[1].mean_loss, r.epochs[0].mean_loss);
  EXPECT_EQ(r.steps.size(), 8u);
  for (const auto& s : r.steps) EXPECT_TRUE(std::isfinite(s.loss));
}

TEST(Train, ZeroLearningRateLeavesParametersUnchanged) {
  const auto items = synthesize_toy_dataset(40, 2);
  TrainConfig c = small_config();
  c.lr = 0.0;
  const auto r = train(c, items);
  EXPECT_TRUE(r.checkpoint.model == init_model(c));
  EXPECT_EQ(r.checkpoint.step, 6u);
}

TEST(Train, SameSeedIsBitwiseReproducible) {
  const auto items = synthesize_toy_dataset(48, 3);
  const auto a = train(small_config(), items);
  const auto b = train(small_config(), items);
  EXPECT_EQ(serialize_checkpoint(a.checkpoint), serialize_checkpoint(b.checkpoint));
  EXPECT_EQ(metrics_of(a), metrics_of(b));
  TrainConfig other = small_config();
  other.seed = 12;
  EXPECT_NE(serialize_checkpoint(train(other, items).checkpoint), serialize_checkpoint(a.checkpoint));
}

TEST(Train, ResumeMatchesUninterruptedRun) {
  const auto items = synthesize_toy_dataset(40, 4);
  TrainConfig c = small_config();
  c.epochs = 4;
  const auto full = train(c, items);

  TrainOptions first;
  first.stop_after_epoch = 2;
  const auto half = train(c, items, first);
  EXPECT_EQ(half.checkpoint.epochs_completed, 2u);
  const auto restored = deserialize_checkpoint(serialize_checkpoint(half.checkpoint));
  TrainOptions second;
  second.resume = &restored;
  const auto rest = train(c, items, second);
  EXPECT_EQ(serialize_checkpoint(rest.checkpoint), serialize_checkpoint(full.checkpoint));
  ASSERT_EQ(half.steps.size() + rest.steps.size(), full.steps.size());
  for (std::size_t i = 0; i < rest.steps.size(); ++i) {
    EXPECT_EQ(rest.steps[i].loss, full.steps[half.steps.size() + i].loss);
  }
}

TEST(Train, NonFiniteLossAbortsWithBatchIds) {
  const auto items = synthesize_toy_dataset(8, 5);
  TrainConfig c = small_config();
  TrainOptions stop;
  stop.stop_after_epoch = 1;
  auto ckpt = train(c, items, stop).checkpoint;
  ckpt.model.ars.w_att[0] = std::numeric_limits<double>::quiet_NaN();
  TrainOptions resume;
  resume.resume = &ckpt;
  try {
    train(c, items, resume);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kNonFiniteLoss);
    EXPECT_NE(std::string(e.what()).find("syn5-"), std::string::npos) << e.what();
  }
}

TEST(Train, MetricsLogHasStepAndEpochLines) {
  const auto items = synthesize_toy_dataset(20, 6);
  const auto r = train(small_config(), items);
  std::istringstream in(metrics_of(r));
  std::size_t lines = 0, epochs = 0;
  for (std::string line; std::getline(in, line);) {
    ++lines;
    if (line.find("\"mean_loss\"") != std::string::npos) ++epochs;
  }
  EXPECT_EQ(epochs, 2u);
  EXPECT_EQ(lines, r.steps.size() + 2);
}

TEST(Evaluate, ZeroAttentionAlwaysPredictsA) {
  auto items = synthesize_toy_dataset(60, 7);
  Checkpoint ckpt;
  ckpt.config = small_config();
  ckpt.model = init_model(ckpt.config);
  const auto report = evaluate(ckpt, items);
  std::size_t label_a = 0;
  for (const auto& it : items) label_a += *it.label == 'A';
  for (const auto& p : report.items) {
    EXPECT_EQ(p.predicted, 'A');
    for (const auto& s : p.scores) EXPECT_EQ(s.score, 0.5);
  }
  EXPECT_EQ(report.correct, label_a);
  EXPECT_DOUBLE_EQ(report.accuracy, static_cast<double>(label_a) / 60.0);
}

TEST(Evaluate, SingleItemScoredCorrectly) {
  McqItem item{"one", "q", {{'A', "a"}, {'B', "b"}}, 'B', Level::kAdvanced};
  auto store = EmbeddingStore::from_records(
      {{"one:q", {1.0, 0.0}}, {"one:A", {0.0, 1.0}}, {"one:B", {1.0, 0.0}}});
  Checkpoint ckpt;
  ckpt.config.backend = Backend::kPrecomputed;
  ckpt.model.backend = Backend::kPrecomputed;
  ckpt.model.ars = ArsParams{Matrix(2, 2, {1, 0, 0, 1}), Matrix(2, 2, {1, 0, 0, 1}), {1.0, 1.0}};
  const std::vector<McqItem> items = {item};
  const auto report = evaluate(ckpt, items, &store);
  EXPECT_EQ(report.accuracy, 1.0);
  EXPECT_EQ(report.per_level.at(Level::kAdvanced).correct, 1u);

  auto wide = EmbeddingStore::from_records({{"one:q", {1.0, 0.0, 0.0}}});
  try {
    evaluate(ckpt, items, &wide);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kDimensionMismatch);
  }
}

TEST(Evaluate, PerLevelRecombinesAndPredictionsAgree) {
  const auto train_items = synthesize_toy_dataset(90, 8);
  const auto eval_items = synthesize_toy_dataset(61, 9);
  TrainConfig c = small_config();
  c.lr = 3e-3;
  const auto r = train(c, train_items);
  const auto report = evaluate(r.checkpoint, eval_items);
  std::size_t correct = 0, total = 0;
  for (const auto& [level, acc] : report.per_level) {
    correct += acc.correct;
    total += acc.total;
  }
  EXPECT_EQ(total, 61u);
  EXPECT_EQ(correct, report.correct);
  // Exact rational check: sum_l acc_l * n_l == overall * n.
  std::size_t lhs = 0;
  for (const auto& [level, acc] : report.per_level) lhs += acc.correct;
  EXPECT_EQ(lhs * 61, report.correct * total);
  for (const auto& p : report.items) {
    EXPECT_EQ(argmax_logit(p.scores), argmax_score(p.scores));
  }
  EXPECT_NE(format_eval_table(report).find("overall"), std::string::npos);
  EXPECT_NE(eval_report_json(report).find("\"per_level\""), std::string::npos);
}

TEST(Predict, CsvLeavesAbsentOptionsBlank) {
  McqItem a{"u1", "q", {{'A', "x"}, {'B', "y"}, {'C', "z"}}, std::nullopt, Level::kBeginner};
  Checkpoint ckpt;
  ckpt.config = small_config();
  ckpt.model = init_model(ckpt.config);
  const std::vector<McqItem> items = {a};
  std::ostringstream out;
  write_predictions_csv(score_items(ckpt.model, items), out);
  EXPECT_EQ(out.str(),
            "id,prediction,score_A,score_B,score_C,score_D,score_E,score_F\n"
            "u1,A,0.5,0.5,0.5,,,\n");
}

TEST(Gradcheck, PassesAcrossSeeds) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    GradcheckConfig cfg;
    cfg.seed = seed;
    const auto r = gradcheck(cfg);
    EXPECT_TRUE(r.passed) << "seed " << seed << " " << r.worst_parameter << " " << r.max_rel_error;
    EXPECT_GT(r.checked, 100u);
  }
}

TEST(SampleDynamicNegatives, AlwaysIncorrectAndSeeded) {
  const auto items = synthesize_toy_dataset(30, 10);
  const auto batches = make_batches(items, 30, 1);
  Rng a(3), b(3);
  const auto na = sample_dynamic_negatives(items, batches[0], a);
  EXPECT_EQ(na, sample_dynamic_negatives(items, batches[0], b));
  for (std::size_t k = 0; k < na.size(); ++k) {
    EXPECT_NE(na[k], batches[0].examples[k].positive);
    EXPECT_LT(na[k], 6u);
  }
}
