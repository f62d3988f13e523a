// Copyright 2026 The arsrank Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

namespace arsrank {

struct GradcheckConfig {
  std::uint64_t seed = 7;
  std::size_t embed_dim = 4;
  std::size_t latent_dim = 4;
  std::size_t batch_size = 2;
  std::size_t vocab_size = 31;
  double step = 1e-4;
  double tolerance = 1e-4;
  /// Denominator floor of the relative error.
  double scale_floor = 1e-6;
};

struct GradcheckReport {
  double max_rel_error = 0.0;
  std::string worst_parameter;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  std::size_t checked = 0;
  double loss = 0.0;
  bool passed = false;
};

/// Compares every analytic gradient of the composite loss (encoder table, head,
/// temperature) with central finite differences on a small random problem.
GradcheckReport gradcheck(const GradcheckConfig& config);

}  // namespace arsrank
