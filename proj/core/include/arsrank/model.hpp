// Copyright 2026 The arsrank Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "arsrank/ars_head.hpp"
#include "arsrank/encoder.hpp"
#include "arsrank/losses.hpp"
#include "arsrank/optimizer.hpp"

namespace arsrank {

enum class Backend { kToy, kPrecomputed };

std::string_view to_string(Backend backend) noexcept;
/// Accepts "toy" or "precomputed"; throws Config otherwise.
Backend parse_backend(std::string_view text);

struct TrainConfig {
  std::size_t epochs = 10;
  std::size_t batch_size = 32;
  std::uint64_t seed = 0;
  LossWeights weights;
  std::size_t latent_dim = kDefaultLatentDim;
  std::size_t embed_dim = kDefaultToyDim;
  std::size_t vocab_size = kDefaultVocabSize;
  Backend backend = Backend::kToy;
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.01;
  double warmup_fraction = 0.10;
  double min_lr = 0.0;
  double max_grad_norm = kDefaultMaxGradNorm;
  double init_temperature = kDefaultTemperature;

  /// Throws Config naming the offending field.
  void validate() const;
  AdamWConfig adamw() const { return {beta1, beta2, eps, weight_decay}; }

  bool operator==(const TrainConfig&) const = default;
};

/// JSON object with one key per field (see train_config_keys()).
std::string train_config_to_json(const TrainConfig& config);
/// Missing keys keep their defaults; unknown keys and ill-typed values throw
/// Config.
TrainConfig train_config_from_json(std::string_view json_text);
/// Field names in declaration order.
const std::vector<std::string>& train_config_keys();

namespace param_names {
inline constexpr std::string_view kEncoderTable = "encoder.table";
inline constexpr std::string_view kWq = "ars.w_q";
inline constexpr std::string_view kWc = "ars.w_c";
inline constexpr std::string_view kWatt = "ars.w_att";
inline constexpr std::string_view kLogTau = "loss.log_tau";
}  // namespace param_names

/// Everything that is trained: the optional toy encoder table, the relevance
/// head, and the contrastive temperature.
struct Model {
  Backend backend = Backend::kToy;
  std::optional<ToyEncoderParams> encoder;
  ArsParams ars;
  Temperature temperature;

  std::size_t dim() const noexcept { return ars.input_dim(); }
  /// Trainable tensors in manifest order. Views stay valid while the model
  /// is neither moved nor resized.
  std::vector<ParamRef> parameters();

  bool operator==(const Model&) const;
};

/// Seeded initialization from the "init" sub-stream of config.seed.
Model init_model(const TrainConfig& config);

}  // namespace arsrank
