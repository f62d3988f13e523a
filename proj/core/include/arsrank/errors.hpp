// Copyright 2026 The arsrank Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace arsrank {

enum class ErrorKind {
  kEmptyInput,
  kDegenerateNorm,
  kFormat,
  kDimensionMismatch,
  kDuplicateKey,
  kKeyNotFound,
  kEmptyCandidates,
  kNegativeCountMismatch,
  kScoreOutOfRange,
  kNonFiniteGradient,
  kNonFiniteLoss,
  kStepOutOfRange,
  kShapeMismatch,
  kValidation,
  kEmptyDataset,
  kChecksumMismatch,
  kVersionMismatch,
  kIo,
  kConfig,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Single exception type for the library; callers dispatch on kind().
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& message);

}  // namespace arsrank
