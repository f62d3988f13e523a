// Copyright 2026 The arsrank Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "arsrank/encoder.hpp"
#include "arsrank/gradients.hpp"

namespace arsrank {

inline constexpr std::size_t kContrastiveNegatives = 5;
inline constexpr double kDynamicLossEpsilon = 1e-7;
inline constexpr double kStdGradientFloor = 1e-8;
inline constexpr double kDefaultTemperature = 0.07;
inline constexpr double kMinTemperature = 1e-3;
inline constexpr double kMaxTemperature = 10.0;

struct LossWeights {
  double alpha = 0.4;  // contrastive
  double beta = 0.4;   // dynamic relevance
  double gamma = 0.2;  // logit regularization

  /// Throws Config if any weight is negative or non-finite.
  void validate() const;

  bool operator==(const LossWeights&) const = default;
};

/// Trainable temperature, tau = exp(log_tau).
struct Temperature {
  double log_tau = std::log(kDefaultTemperature);

  static Temperature from_tau(double tau) { return Temperature{std::log(tau)}; }
  double tau() const { return std::exp(log_tau); }
  /// Clamps tau into [kMinTemperature, kMaxTemperature].
  void clamp();
};

struct ContrastiveLoss {
  double value = 0.0;
  std::vector<std::vector<double>> d_query;                  // B x d
  std::vector<std::vector<double>> d_positive;               // B x d
  std::vector<std::vector<std::vector<double>>> d_negative;  // B x 5 x d
  double d_log_tau = 0.0;
};

/// InfoNCE with cosine similarity over unit-norm inputs, sim = a.b / tau,
/// averaged over the batch. Each row needs exactly kContrastiveNegatives
/// negatives (NegativeCountMismatch otherwise).
ContrastiveLoss contrastive_loss(std::span<const Embedding> queries,
                                 std::span<const Embedding> positives,
                                 std::span<const std::vector<Embedding>> negatives,
                                 const Temperature& temperature);

struct PairLoss {
  double value = 0.0;
  std::vector<double> d_positive;
  std::vector<double> d_negative;
};

/// -(1/B) sum [log(r+ + eps) + log(1 - r- + eps)], eps = kDynamicLossEpsilon.
/// Throws ScoreOutOfRange for scores outside [0, 1] and DimensionMismatch
/// for unequal lengths.
PairLoss dynamic_loss(std::span<const double> r_pos, std::span<const double> r_neg);

/// -(Std(s+) + Std(s-)) with population standard deviation. A set with fewer
/// than two entries contributes nothing; below kStdGradientFloor its gradient
/// is zero.
PairLoss reg_loss(std::span<const double> logits_pos, std::span<const double> logits_neg);

struct LossComponent {
  double value = 0.0;
  GradientSet grads;
};

struct TotalLoss {
  double value = 0.0;
  double contrastive = 0.0;
  double dynamic = 0.0;
  double regularization = 0.0;
  GradientSet grads;
};

/// alpha * L_cons + beta * L_dyn + gamma * L_reg, gradients merged with the
/// same weights over the union of gradient names.
TotalLoss total_loss(const LossComponent& contrastive, const LossComponent& dynamic,
                     const LossComponent& regularization, const LossWeights& weights);

}  // namespace arsrank
