// Copyright 2026 The arsrank Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "arsrank/encoder.hpp"
#include "arsrank/linalg.hpp"
#include "arsrank/random.hpp"

namespace arsrank {

inline constexpr std::size_t kDefaultLatentDim = 256;

/// Learnable state of the relevance head: two h x d projections into a shared
/// latent space and an attention vector of length h. No bias terms.
struct ArsParams {
  Matrix w_q;
  Matrix w_c;
  std::vector<double> w_att;

  std::size_t latent_dim() const noexcept { return w_q.rows(); }
  std::size_t input_dim() const noexcept { return w_q.cols(); }

  /// Glorot-uniform projections (fan_in = d, fan_out = h), zero attention.
  static ArsParams init(std::size_t input_dim, std::size_t latent_dim, Rng& rng);

  /// Throws ShapeMismatch on inconsistent shapes.
  void validate() const;
};

struct ArsTrace {
  std::vector<double> h_q;
  std::vector<double> h_c;
  std::vector<double> v_int;
  double logit = 0.0;
  double score = 0.5;
};

struct ArsGradients {
  Matrix d_w_q;
  Matrix d_w_c;
  std::vector<double> d_w_att;
  std::vector<double> d_q;
  std::vector<double> d_c;
};

struct CandidateScore {
  double logit = 0.0;
  double score = 0.5;
};

/// Logistic function evaluated without overflow for any finite input.
double stable_sigmoid(double x) noexcept;

/// h_q = W_q q, h_c = W_c c, v = tanh(h_q * h_c), s = w_att . v, r = sigmoid(s).
/// Throws DimensionMismatch.
ArsTrace ars_forward(const ArsParams& params, const Embedding& q, const Embedding& c);

/// Backward pass for an upstream gradient on the score r.
ArsGradients ars_backward(const ArsParams& params, const Embedding& q, const Embedding& c,
                          const ArsTrace& trace, double upstream_dr);

/// Backward pass for an upstream gradient on the logit s.
ArsGradients ars_backward_logit(const ArsParams& params, const Embedding& q,
                                const Embedding& c, const ArsTrace& trace,
                                double upstream_ds);

/// ars_forward over each candidate, order preserved.
/// Throws EmptyCandidates, DimensionMismatch.
std::vector<CandidateScore> score_candidates(const ArsParams& params, const Embedding& q,
                                             std::span<const Embedding> candidates);

/// Index of the highest logit; ties go to the earliest index.
std::size_t argmax_logit(std::span<const CandidateScore> scores);
/// Index of the highest score; ties go to the earliest index.
std::size_t argmax_score(std::span<const CandidateScore> scores);

}  // namespace arsrank
