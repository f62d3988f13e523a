// Copyright 2026 The arsrank Authors
// SPDX-License-Identifier: Apache-2.0

#include "arsrank/losses.hpp"

#include <algorithm>
#include <array>
#include <string>

#include "arsrank/errors.hpp"
#include "arsrank/linalg.hpp"

namespace arsrank {

void LossWeights::validate() const {
  for (double w : {alpha, beta, gamma}) {
    if (!std::isfinite(w) || w < 0.0) {
      fail(ErrorKind::kConfig, "loss weights must be finite and nonnegative");
    }
  }
}

void Temperature::clamp() {
  log_tau = std::clamp(log_tau, std::log(kMinTemperature), std::log(kMaxTemperature));
}

ContrastiveLoss contrastive_loss(std::span<const Embedding> queries,
                                 std::span<const Embedding> positives,
                                 std::span<const std::vector<Embedding>> negatives,
                                 const Temperature& temperature) {
  const std::size_t batch = queries.size();
  if (batch == 0) fail(ErrorKind::kEmptyInput, "contrastive loss over an empty batch");
  if (positives.size() != batch || negatives.size() != batch) {
    fail(ErrorKind::kDimensionMismatch, "queries, positives and negatives differ in batch size");
  }
  const std::size_t d = queries[0].dim();
  const double tau = temperature.tau();
  const double inv_batch = 1.0 / static_cast<double>(batch);

  ContrastiveLoss out;
  out.d_query.assign(batch, std::vector<double>(d, 0.0));
  out.d_positive.assign(batch, std::vector<double>(d, 0.0));
  out.d_negative.assign(batch, std::vector<std::vector<double>>(
                                   kContrastiveNegatives, std::vector<double>(d, 0.0)));

  constexpr std::size_t kEntries = kContrastiveNegatives + 1;
  for (std::size_t i = 0; i < batch; ++i) {
    if (negatives[i].size() != kContrastiveNegatives) {
      fail(ErrorKind::kNegativeCountMismatch,
           "row " + std::to_string(i) + " has " + std::to_string(negatives[i].size()) +
               " negatives, expected " + std::to_string(kContrastiveNegatives));
    }
    std::array<const Embedding*, kEntries> cands{};
    cands[0] = &positives[i];
    for (std::size_t j = 0; j < kContrastiveNegatives; ++j) cands[j + 1] = &negatives[i][j];
    const Embedding& q = queries[i];
    for (const auto* c : cands) {
      if (c->dim() != d || q.dim() != d) {
        fail(ErrorKind::kDimensionMismatch, "embedding dimensions differ in contrastive batch");
      }
    }

    std::array<double, kEntries> z{};
    for (std::size_t k = 0; k < kEntries; ++k) z[k] = dot(q.values(), cands[k]->values()) / tau;
    const double z_max = *std::max_element(z.begin(), z.end());
    double sum = 0.0;
    for (double zk : z) sum += std::exp(zk - z_max);
    const double lse = z_max + std::log(sum);
    out.value += (lse - z[0]) * inv_batch;

    // dL/dz_k = softmax_k - [k == 0]; z_k = q.c_k / tau, dz_k/dlog_tau = -z_k.
    for (std::size_t k = 0; k < kEntries; ++k) {
      const double p = std::exp(z[k] - lse);
      const double dz = (p - (k == 0 ? 1.0 : 0.0)) * inv_batch;
      if (dz == 0.0) continue;
      const double coeff = dz / tau;
      auto& dc = k == 0 ? out.d_positive[i] : out.d_negative[i][k - 1];
      const auto cv = cands[k]->values();
      const auto qv = q.values();
      for (std::size_t m = 0; m < d; ++m) {
        out.d_query[i][m] += coeff * cv[m];
        dc[m] += coeff * qv[m];
      }
      out.d_log_tau -= dz * z[k];
    }
  }
  return out;
}

PairLoss dynamic_loss(std::span<const double> r_pos, std::span<const double> r_neg) {
  const std::size_t batch = r_pos.size();
  if (r_neg.size() != batch) {
    fail(ErrorKind::kDimensionMismatch, "positive and negative score counts differ");
  }
  if (batch == 0) fail(ErrorKind::kEmptyInput, "dynamic loss over an empty batch");
  auto check = [](double r) {
    if (!(r >= 0.0 && r <= 1.0)) {
      fail(ErrorKind::kScoreOutOfRange, "score " + std::to_string(r) + " outside [0, 1]");
    }
  };
  const double inv_batch = 1.0 / static_cast<double>(batch);
  PairLoss out{0.0, std::vector<double>(batch), std::vector<double>(batch)};
  for (std::size_t i = 0; i < batch; ++i) {
    check(r_pos[i]);
    check(r_neg[i]);
    const double pos = r_pos[i] + kDynamicLossEpsilon;
    const double neg = 1.0 - r_neg[i] + kDynamicLossEpsilon;
    out.value -= (std::log(pos) + std::log(neg)) * inv_batch;
    out.d_positive[i] = -inv_batch / pos;
    out.d_negative[i] = inv_batch / neg;
  }
  return out;
}

namespace {

// Population std of one set, accumulating -dStd/ds into `grad`. Deviations are
// taken about the first element; a constant set gives exactly zero.
double negative_std(std::span<const double> s, std::span<double> grad) {
  const std::size_t n = s.size();
  if (n < 2) return 0.0;
  const double inv_n = 1.0 / static_cast<double>(n);
  double shift_mean = 0.0;
  for (double x : s) shift_mean += (x - s[0]);
  shift_mean *= inv_n;
  double var = 0.0;
  for (double x : s) {
    const double dev = (x - s[0]) - shift_mean;
    var += dev * dev;
  }
  var *= inv_n;
  const double std_dev = std::sqrt(var);
  if (std_dev >= kStdGradientFloor) {
    for (std::size_t i = 0; i < n; ++i) {
      const double dev = (s[i] - s[0]) - shift_mean;
      grad[i] = -dev * inv_n / std_dev;
    }
  }
  return std_dev == 0.0 ? 0.0 : -std_dev;
}

}  // namespace

PairLoss reg_loss(std::span<const double> logits_pos, std::span<const double> logits_neg) {
  PairLoss out{0.0, std::vector<double>(logits_pos.size(), 0.0),
               std::vector<double>(logits_neg.size(), 0.0)};
  out.value = negative_std(logits_pos, out.d_positive) + negative_std(logits_neg, out.d_negative);
  return out;
}

TotalLoss total_loss(const LossComponent& contrastive, const LossComponent& dynamic,
                     const LossComponent& regularization, const LossWeights& weights) {
  TotalLoss out;
  out.contrastive = contrastive.value;
  out.dynamic = dynamic.value;
  out.regularization = regularization.value;
  out.value = weights.alpha * contrastive.value + weights.beta * dynamic.value +
              weights.gamma * regularization.value;
  out.grads.add_scaled(contrastive.grads, weights.alpha);
  out.grads.add_scaled(dynamic.grads, weights.beta);
  out.grads.add_scaled(regularization.grads, weights.gamma);
  return out;
}

}  // namespace arsrank
