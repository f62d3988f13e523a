// Copyright 2026 The arsrank Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "arsrank/ars_head.hpp"
#include "arsrank/checkpoint.hpp"
#include "arsrank/dataset.hpp"
#include "arsrank/encoder.hpp"
#include "arsrank/losses.hpp"
#include "arsrank/model.hpp"

namespace arsrank {

/// Composite objective on one batch, with gradients in the parameter
/// namespace (param_names::*). `dynamic_negatives[k]` is the option index used
/// as the dynamic-loss negative of example k; its logits also form s-.
struct BatchObjective {
  TotalLoss loss;
  GradientSet grads;
  std::size_t correct = 0;  // examples whose positive has the top logit
};

BatchObjective batch_objective(const Model& model, std::span<const McqItem> items,
                               const TrainBatch& batch,
                               std::span<const std::size_t> dynamic_negatives,
                               const LossWeights& weights, const EmbeddingStore* store = nullptr);

/// Uniform pick among each example's incorrect options.
std::vector<std::size_t> sample_dynamic_negatives(std::span<const McqItem> items,
                                                  const TrainBatch& batch, Rng& rng);

struct StepRecord {
  std::size_t epoch = 0;
  std::size_t step = 0;
  double lr = 0.0;
  double loss = 0.0;
  double contrastive = 0.0;
  double dynamic = 0.0;
  double regularization = 0.0;
  double grad_norm = 0.0;  // before clipping
};

struct EpochRecord {
  std::size_t epoch = 0;
  double mean_loss = 0.0;
  double train_accuracy = 0.0;  // computed on the fly, pre-update
};

struct TrainResult {
  Checkpoint checkpoint;
  std::vector<StepRecord> steps;
  std::vector<EpochRecord> epochs;
};

struct TrainOptions {
  const EmbeddingStore* store = nullptr;       // required for the precomputed backend
  const Checkpoint* resume = nullptr;          // continue from this state
  std::optional<std::size_t> stop_after_epoch;  // stop once this many epochs are done
  std::function<void(const StepRecord&)> on_step;
  std::function<void(const EpochRecord&)> on_epoch;
};

/// Seeded, single-threaded training loop: composite loss, global-norm clipping,
/// scheduled AdamW. Throws NonFiniteLoss naming the offending batch ids.
TrainResult train(const TrainConfig& config, std::span<const McqItem> items,
                  const TrainOptions& options = {});

/// One JSON object per line: steps of each epoch followed by its summary.
void write_metrics_jsonl(const TrainResult& result, std::ostream& out);

struct ItemPrediction {
  std::string id;
  Level level = Level::kBeginner;
  std::optional<char> label;
  char predicted = 'A';
  std::vector<char> letters;
  std::vector<CandidateScore> scores;
};

/// Scores every option of every item; the prediction is the highest logit,
/// earliest letter on ties. Throws DimensionMismatch when the backend
/// dimension differs from the model's.
std::vector<ItemPrediction> score_items(const Model& model, std::span<const McqItem> items,
                                        const EmbeddingStore* store = nullptr);

struct LevelAccuracy {
  std::size_t correct = 0;
  std::size_t total = 0;
  double accuracy() const noexcept {
    return total == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(total);
  }
};

struct EvalReport {
  double accuracy = 0.0;
  std::size_t correct = 0;
  std::size_t total = 0;
  std::map<Level, LevelAccuracy> per_level;
  std::vector<ItemPrediction> items;
};

EvalReport evaluate(const Checkpoint& checkpoint, std::span<const McqItem> items,
                    const EmbeddingStore* store = nullptr);

std::string format_eval_table(const EvalReport& report);
std::string eval_report_json(const EvalReport& report);

/// CSV "id,prediction,score_A,...,score_F"; absent options are blank and
/// scores use the shortest round-trip decimal form.
void write_predictions_csv(std::span<const ItemPrediction> predictions, std::ostream& out);
void predict(const Checkpoint& checkpoint, std::span<const McqItem> items,
             const std::filesystem::path& output, const EmbeddingStore* store = nullptr);

}  // namespace arsrank
