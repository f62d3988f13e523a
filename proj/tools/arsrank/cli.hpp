// Copyright 2026 The arsrank Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "arsrank/model.hpp"

namespace arsrank::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitNumerical = 3;

inline constexpr std::string_view kSeedEnv = "ARSRANK_SEED";

/// TrainConfig plus everything a command needs to find its inputs and outputs.
/// Empty path fields fall back to locations under checkpoint_dir.
struct RunConfig {
  TrainConfig train;
  std::string train_data;
  std::string eval_data;
  std::string predict_data;
  std::string embeddings;
  std::string checkpoint_dir = "checkpoints";
  std::string checkpoint;
  std::string resume;
  std::string metrics;
  std::string report;
  std::string output;
  std::size_t n_items = 500;
  int verbosity = 1;

  std::filesystem::path checkpoint_path() const;
  std::filesystem::path metrics_path() const;
  std::filesystem::path report_path() const;
  std::filesystem::path predictions_path() const;
};

struct ConfigKey {
  std::string name;
  std::string default_value;  // JSON text
  std::string help;
};

/// Every accepted key, in the order shown by --help.
const std::vector<ConfigKey>& config_keys();

/// Layers, lowest to highest precedence: defaults, the ARSRANK_SEED value
/// (when given), the JSON config file text (when given), flag overrides
/// (raw command-line strings keyed by config name). Throws Config.
RunConfig resolve_config(std::optional<std::string_view> env_seed,
                         std::optional<std::string_view> file_text,
                         const std::vector<std::pair<std::string, std::string>>& flags);

/// Runs one command line (without the program name). Returns the exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace arsrank::cli
