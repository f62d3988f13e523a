// Copyright 2026 The arsrank Authors
// SPDX-License-Identifier: Apache-2.0

#include "arsrank/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "arsrank/dataset.hpp"
#include "arsrank/errors.hpp"
#include "arsrank/model.hpp"
#include "arsrank/trainer.hpp"

namespace arsrank {

GradcheckReport gradcheck(const GradcheckConfig& config) {
  if (config.batch_size == 0 || config.embed_dim == 0 || config.latent_dim == 0) {
    fail(ErrorKind::kConfig, "gradcheck dimensions must be positive");
  }
  TrainConfig tc;
  tc.seed = config.seed;
  tc.embed_dim = config.embed_dim;
  tc.latent_dim = config.latent_dim;
  tc.vocab_size = config.vocab_size;
  tc.batch_size = config.batch_size;
  Model model = init_model(tc);

  // Random parameters away from the zero-attention start.
  Rng rng(config.seed, "gradcheck");
  for (double& v : model.ars.w_q.values()) v = rng.uniform(-1.0, 1.0);
  for (double& v : model.ars.w_c.values()) v = rng.uniform(-1.0, 1.0);
  for (double& v : model.ars.w_att) v = rng.uniform(-1.0, 1.0);
  for (double& v : model.encoder->table.values()) v = rng.uniform(-1.0, 1.0);
  model.temperature = Temperature::from_tau(rng.uniform(0.2, 1.0));

  auto words = [&](std::size_t count) {
    std::string text;
    for (std::size_t k = 0; k < count; ++k) {
      text += (k ? " g" : "g") + std::to_string(rng.below(64));
    }
    return text;
  };
  std::vector<McqItem> items;
  for (std::size_t i = 0; i < config.batch_size; ++i) {
    McqItem item;
    item.id = "gc" + std::to_string(i);
    item.question = words(5);
    // The last item has three options and exercises negative padding.
    const std::size_t n_options = (i + 1 == config.batch_size && i > 0) ? 3 : kMaxOptions;
    for (std::size_t o = 0; o < n_options; ++o) {
      item.options.push_back({static_cast<char>('A' + o), words(4)});
    }
    item.label = static_cast<char>('A' + rng.below(n_options));
    items.push_back(std::move(item));
  }
  const auto batch = make_batches(items, config.batch_size, config.seed).front();
  Rng neg_rng(config.seed, "negatives");
  const auto dyn_neg = sample_dynamic_negatives(items, batch, neg_rng);

  const auto analytic = batch_objective(model, items, batch, dyn_neg, tc.weights);
  GradcheckReport report;
  report.loss = analytic.loss.value;

  for (auto& param : model.parameters()) {
    const auto grad = analytic.grads.contains(param.name) ? analytic.grads.at(param.name)
                                                          : std::span<const double>{};
    for (std::size_t i = 0; i < param.values.size(); ++i) {
      const double saved = param.values[i];
      param.values[i] = saved + config.step;
      const double up = batch_objective(model, items, batch, dyn_neg, tc.weights).loss.value;
      param.values[i] = saved - config.step;
      const double down = batch_objective(model, items, batch, dyn_neg, tc.weights).loss.value;
      param.values[i] = saved;

      const double numeric = (up - down) / (2.0 * config.step);
      const double a = grad.empty() ? 0.0 : grad[i];
      const double scale = std::max({std::abs(a), std::abs(numeric), config.scale_floor});
      const double rel = std::abs(a - numeric) / scale;
      ++report.checked;
      if (!(rel <= report.max_rel_error)) {
        report.max_rel_error = rel;
        report.worst_parameter = param.name;
        report.worst_index = i;
        report.worst_analytic = a;
        report.worst_numeric = numeric;
      }
    }
  }
  report.passed = report.max_rel_error < config.tolerance;
  return report;
}

}  // namespace arsrank
