// Copyright 2026 The arsrank Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace arsrank {

/// Named collection of flat gradient buffers. Iteration order is by name, so
/// reductions over a set (norms, merges) are order-fixed and deterministic.
class GradientSet {
 public:
  using Map = std::map<std::string, std::vector<double>, std::less<>>;

  /// Returns the buffer for `name`, creating it zero-filled when absent.
  /// Throws ShapeMismatch when it exists with a different size.
  std::span<double> get_or_add(std::string_view name, std::size_t size);

  bool contains(std::string_view name) const;
  /// Throws KeyNotFound.
  std::span<const double> at(std::string_view name) const;
  std::span<double> at(std::string_view name);

  /// this += weight * other, over the union of names.
  void add_scaled(const GradientSet& other, double weight);
  void scale(double factor);
  void set_zero();

  double global_norm() const;
  bool all_finite() const;
  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }

  Map::const_iterator begin() const { return entries_.begin(); }
  Map::const_iterator end() const { return entries_.end(); }

 private:
  Map entries_;
};

}  // namespace arsrank
