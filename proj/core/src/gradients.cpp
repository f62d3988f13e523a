// Copyright 2026 The arsrank Authors
// SPDX-License-Identifier: Apache-2.0

#include "arsrank/gradients.hpp"

#include <algorithm>
#include <cmath>

#include "arsrank/errors.hpp"
#include "arsrank/linalg.hpp"

namespace arsrank {

std::span<double> GradientSet::get_or_add(std::string_view name, std::size_t size) {
  auto it = entries_.find(name);
  if (it == entries_.end()) {
    it = entries_.emplace(std::string(name), std::vector<double>(size, 0.0)).first;
  } else if (it->second.size() != size) {
    fail(ErrorKind::kShapeMismatch,
         "gradient '" + std::string(name) + "' has size " +
             std::to_string(it->second.size()) + ", requested " +
             std::to_string(size));
  }
  return it->second;
}

bool GradientSet::contains(std::string_view name) const {
  return entries_.find(name) != entries_.end();
}

std::span<const double> GradientSet::at(std::string_view name) const {
  const auto it = entries_.find(name);
  if (it == entries_.end()) {
    fail(ErrorKind::kKeyNotFound, "no gradient named '" + std::string(name) + "'");
  }
  return it->second;
}

std::span<double> GradientSet::at(std::string_view name) {
  const auto it = entries_.find(name);
  if (it == entries_.end()) {
    fail(ErrorKind::kKeyNotFound, "no gradient named '" + std::string(name) + "'");
  }
  return it->second;
}

void GradientSet::add_scaled(const GradientSet& other, double weight) {
  for (const auto& [name, values] : other.entries_) {
    auto dst = get_or_add(name, values.size());
    for (std::size_t i = 0; i < values.size(); ++i) dst[i] += weight * values[i];
  }
}

void GradientSet::scale(double factor) {
  for (auto& [name, values] : entries_) {
    for (double& v : values) v *= factor;
  }
}

void GradientSet::set_zero() {
  for (auto& [name, values] : entries_) std::fill(values.begin(), values.end(), 0.0);
}

double GradientSet::global_norm() const {
  // Scaled by the largest magnitude; finite even for entries near DBL_MAX.
  double max_abs = 0.0;
  for (const auto& [name, values] : entries_) {
    for (double v : values) max_abs = std::max(max_abs, std::abs(v));
  }
  if (max_abs == 0.0 || !std::isfinite(max_abs)) return max_abs;
  double sq = 0.0;
  for (const auto& [name, values] : entries_) {
    for (double v : values) {
      const double x = v / max_abs;
      sq += x * x;
    }
  }
  return max_abs * std::sqrt(sq);
}

bool GradientSet::all_finite() const {
  return std::all_of(entries_.begin(), entries_.end(),
                     [](const auto& kv) { return arsrank::all_finite(kv.second); });
}

}  // namespace arsrank
