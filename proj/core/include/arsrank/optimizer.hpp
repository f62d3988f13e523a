// Copyright 2026 The arsrank Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "arsrank/gradients.hpp"

namespace arsrank {

inline constexpr double kDefaultMaxGradNorm = 0.5;

/// Scales every gradient by max_norm / g when the global l2 norm g exceeds
/// max_norm. Returns the pre-clip norm. Throws NonFiniteGradient.
double clip_global_norm(GradientSet& grads, double max_norm = kDefaultMaxGradNorm);

struct ScheduleConfig {
  std::size_t total_steps = 1;
  double warmup_fraction = 0.10;
  double base_lr = 1e-4;
  double min_lr = 0.0;

  /// round(warmup_fraction * total_steps), at least 1.
  std::size_t warmup_steps() const;
  void validate() const;
};

/// Linear warmup to base_lr over warmup_steps, then half-cosine decay to
/// min_lr at total_steps. Throws StepOutOfRange for step > total_steps.
double lr_at(std::size_t step, const ScheduleConfig& cfg);

struct AdamWConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.01;
};

struct Moments {
  std::vector<double> m;
  std::vector<double> v;
};

struct AdamWState {
  AdamWConfig config;
  std::size_t step = 0;
  std::map<std::string, Moments, std::less<>> moments;
};

/// A trainable tensor viewed as a flat buffer.
struct ParamRef {
  std::string name;
  std::span<double> values;
  bool decay = true;  // decoupled weight decay applies
};

/// One AdamW update with bias correction and decoupled weight decay
/// (theta -= lr * wd * theta before the adaptive step). Parameters without a
/// gradient entry are treated as having a zero gradient.
/// Throws ShapeMismatch.
void adamw_step(std::span<const ParamRef> params, const GradientSet& grads, AdamWState& state,
                double lr);

}  // namespace arsrank
