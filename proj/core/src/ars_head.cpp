// Copyright 2026 The arsrank Authors
// SPDX-License-Identifier: Apache-2.0

#include "arsrank/ars_head.hpp"

#include <cmath>
#include <string>

#include "arsrank/errors.hpp"

namespace arsrank {
namespace {

void check_inputs(const ArsParams& params, const Embedding& q, const Embedding& c) {
  if (q.dim() != params.input_dim() || c.dim() != params.input_dim()) {
    fail(ErrorKind::kDimensionMismatch,
         "head expects d=" + std::to_string(params.input_dim()) + ", got q.d=" +
             std::to_string(q.dim()) + " c.d=" + std::to_string(c.dim()));
  }
}

template <typename Pick>
std::size_t argmax_by(std::span<const CandidateScore> scores, Pick pick) {
  if (scores.empty()) fail(ErrorKind::kEmptyCandidates, "argmax over no candidates");
  std::size_t best = 0;
  for (std::size_t i = 1; i < scores.size(); ++i) {
    if (pick(scores[i]) > pick(scores[best])) best = i;
  }
  return best;
}

}  // namespace

ArsParams ArsParams::init(std::size_t input_dim, std::size_t latent_dim, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(input_dim + latent_dim));
  ArsParams p{Matrix(latent_dim, input_dim), Matrix(latent_dim, input_dim),
              std::vector<double>(latent_dim, 0.0)};
  for (double& v : p.w_q.values()) v = rng.uniform(-limit, limit);
  for (double& v : p.w_c.values()) v = rng.uniform(-limit, limit);
  return p;
}

void ArsParams::validate() const {
  if (w_q.rows() != w_c.rows() || w_q.cols() != w_c.cols() || w_att.size() != w_q.rows() ||
      w_q.rows() == 0 || w_q.cols() == 0) {
    fail(ErrorKind::kShapeMismatch,
         "inconsistent head shapes: W_q " + std::to_string(w_q.rows()) + "x" +
             std::to_string(w_q.cols()) + ", W_c " + std::to_string(w_c.rows()) + "x" +
             std::to_string(w_c.cols()) + ", w_att " + std::to_string(w_att.size()));
  }
}

double stable_sigmoid(double x) noexcept {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

ArsTrace ars_forward(const ArsParams& params, const Embedding& q, const Embedding& c) {
  check_inputs(params, q, c);
  const std::size_t h = params.latent_dim();
  ArsTrace t{std::vector<double>(h), std::vector<double>(h), std::vector<double>(h)};
  matvec(params.w_q, q.values(), t.h_q);
  matvec(params.w_c, c.values(), t.h_c);
  for (std::size_t k = 0; k < h; ++k) t.v_int[k] = std::tanh(t.h_q[k] * t.h_c[k]);
  t.logit = dot(params.w_att, t.v_int);
  t.score = stable_sigmoid(t.logit);
  return t;
}

ArsGradients ars_backward_logit(const ArsParams& params, const Embedding& q,
                                const Embedding& c, const ArsTrace& trace,
                                double upstream_ds) {
  check_inputs(params, q, c);
  const std::size_t h = params.latent_dim();
  const std::size_t d = params.input_dim();
  if (trace.v_int.size() != h) fail(ErrorKind::kDimensionMismatch, "trace does not match head");

  ArsGradients g{Matrix(h, d), Matrix(h, d), std::vector<double>(h), std::vector<double>(d, 0.0),
                 std::vector<double>(d, 0.0)};
  std::vector<double> dz(h);
  std::vector<double> dh_q(h);
  std::vector<double> dh_c(h);
  for (std::size_t k = 0; k < h; ++k) {
    g.d_w_att[k] = upstream_ds * trace.v_int[k];
    const double dv = upstream_ds * params.w_att[k];
    dz[k] = dv * (1.0 - trace.v_int[k] * trace.v_int[k]);
    dh_q[k] = dz[k] * trace.h_c[k];
    dh_c[k] = dz[k] * trace.h_q[k];
  }
  outer_add(dh_q, q.values(), g.d_w_q);
  outer_add(dh_c, c.values(), g.d_w_c);
  matvec_transposed_add(params.w_q, dh_q, g.d_q);
  matvec_transposed_add(params.w_c, dh_c, g.d_c);
  return g;
}

ArsGradients ars_backward(const ArsParams& params, const Embedding& q, const Embedding& c,
                          const ArsTrace& trace, double upstream_dr) {
  const double ds = upstream_dr * trace.score * (1.0 - trace.score);
  return ars_backward_logit(params, q, c, trace, ds);
}

std::vector<CandidateScore> score_candidates(const ArsParams& params, const Embedding& q,
                                             std::span<const Embedding> candidates) {
  if (candidates.empty()) fail(ErrorKind::kEmptyCandidates, "no candidates to score");
  std::vector<CandidateScore> out;
  out.reserve(candidates.size());
  for (const auto& c : candidates) {
    const auto t = ars_forward(params, q, c);
    out.push_back({t.logit, t.score});
  }
  return out;
}

std::size_t argmax_logit(std::span<const CandidateScore> scores) {
  return argmax_by(scores, [](const CandidateScore& s) { return s.logit; });
}

std::size_t argmax_score(std::span<const CandidateScore> scores) {
  return argmax_by(scores, [](const CandidateScore& s) { return s.score; });
}

}  // namespace arsrank
