// Copyright 2026 The arsrank Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "arsrank/model.hpp"
#include "arsrank/optimizer.hpp"

namespace arsrank {

inline constexpr std::string_view kCheckpointMagic = "ARSCKPT1";
inline constexpr std::uint32_t kCheckpointVersion = 1;

/// Model, optimizer state, and where the seeded run stands. Per-epoch random
/// streams are derived from (config.seed, epoch); seed and epochs_completed
/// together fix the RNG state on resume.
struct Checkpoint {
  TrainConfig config;
  Model model;
  AdamWState optimizer;
  std::size_t step = 0;
  std::size_t epochs_completed = 0;
};

/// Layout: magic "ARSCKPT1", u64 LE metadata length, metadata JSON (shapes,
/// names, config, RNG state, checksum), tensors as LE binary64 row-major in
/// manifest order. The checksum (FNV-1a 64) covers every byte except itself.
std::string serialize_checkpoint(const Checkpoint& ckpt);
/// Throws ChecksumMismatch, VersionMismatch, ShapeMismatch, FormatError.
Checkpoint deserialize_checkpoint(std::string_view bytes);

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
/// Throws Io when the file cannot be read, then as deserialize_checkpoint.
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace arsrank
