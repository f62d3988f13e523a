// Copyright 2026 The arsrank Authors
// SPDX-License-Identifier: Apache-2.0

#include "arsrank/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "arsrank/errors.hpp"

namespace arsrank {

double clip_global_norm(GradientSet& grads, double max_norm) {
  if (!grads.all_finite()) fail(ErrorKind::kNonFiniteGradient, "gradient contains NaN or Inf");
  const double norm = grads.global_norm();
  if (norm > max_norm) grads.scale(max_norm / norm);
  return norm;
}

std::size_t ScheduleConfig::warmup_steps() const {
  const auto w = static_cast<std::size_t>(
      std::llround(warmup_fraction * static_cast<double>(total_steps)));
  return std::max<std::size_t>(w, 1);
}

void ScheduleConfig::validate() const {
  if (total_steps == 0) fail(ErrorKind::kConfig, "schedule needs at least one step");
  if (!(warmup_fraction > 0.0 && warmup_fraction < 1.0)) {
    fail(ErrorKind::kConfig, "warmup_fraction must be in (0, 1)");
  }
  if (!(base_lr >= 0.0) || !(min_lr >= 0.0) || min_lr > base_lr) {
    fail(ErrorKind::kConfig, "require 0 <= min_lr <= lr");
  }
}

double lr_at(std::size_t step, const ScheduleConfig& cfg) {
  if (step > cfg.total_steps) {
    fail(ErrorKind::kStepOutOfRange, "step " + std::to_string(step) + " beyond total " +
                                         std::to_string(cfg.total_steps));
  }
  const std::size_t warmup = cfg.warmup_steps();
  if (step < warmup) {
    return cfg.base_lr * static_cast<double>(step + 1) / static_cast<double>(warmup);
  }
  if (cfg.total_steps <= warmup) return step == cfg.total_steps ? cfg.min_lr : cfg.base_lr;
  const double progress =
      static_cast<double>(step - warmup) / static_cast<double>(cfg.total_steps - warmup);
  return cfg.min_lr +
         0.5 * (cfg.base_lr - cfg.min_lr) * (1.0 + std::cos(std::numbers::pi * progress));
}

void adamw_step(std::span<const ParamRef> params, const GradientSet& grads, AdamWState& state,
                double lr) {
  const auto& cfg = state.config;
  for (const auto& p : params) {
    if (grads.contains(p.name) && grads.at(p.name).size() != p.values.size()) {
      fail(ErrorKind::kShapeMismatch, "gradient for '" + p.name + "' does not match parameter");
    }
    const auto it = state.moments.find(p.name);
    if (it != state.moments.end() && it->second.m.size() != p.values.size()) {
      fail(ErrorKind::kShapeMismatch, "optimizer state for '" + p.name + "' has wrong size");
    }
  }

  ++state.step;
  const double t = static_cast<double>(state.step);
  const double bias1 = 1.0 - std::pow(cfg.beta1, t);
  const double bias2 = 1.0 - std::pow(cfg.beta2, t);

  for (const auto& p : params) {
    auto it = state.moments.find(p.name);
    if (it == state.moments.end()) {
      it = state.moments
               .emplace(p.name, Moments{std::vector<double>(p.values.size(), 0.0),
                                        std::vector<double>(p.values.size(), 0.0)})
               .first;
    }
    auto& [m, v] = it->second;
    const std::span<const double> g =
        grads.contains(p.name) ? grads.at(p.name) : std::span<const double>{};
    const double decay = p.decay ? lr * cfg.weight_decay : 0.0;
    for (std::size_t i = 0; i < p.values.size(); ++i) {
      const double gi = g.empty() ? 0.0 : g[i];
      double& theta = p.values[i];
      theta -= decay * theta;
      m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * gi;
      v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * gi * gi;
      const double m_hat = m[i] / bias1;
      const double v_hat = v[i] / bias2;
      theta -= lr * m_hat / (std::sqrt(v_hat) + cfg.eps);
    }
  }
}

}  // namespace arsrank
