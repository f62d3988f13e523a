// Copyright 2026 The arsrank Authors
// SPDX-License-Identifier: Apache-2.0

#include "arsrank/errors.hpp"

namespace arsrank {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::kEmptyInput: return "EmptyInput";
    case ErrorKind::kDegenerateNorm: return "DegenerateNorm";
    case ErrorKind::kFormat: return "FormatError";
    case ErrorKind::kDimensionMismatch: return "DimensionMismatch";
    case ErrorKind::kDuplicateKey: return "DuplicateKey";
    case ErrorKind::kKeyNotFound: return "KeyNotFound";
    case ErrorKind::kEmptyCandidates: return "EmptyCandidates";
    case ErrorKind::kNegativeCountMismatch: return "NegativeCountMismatch";
    case ErrorKind::kScoreOutOfRange: return "ScoreOutOfRange";
    case ErrorKind::kNonFiniteGradient: return "NonFiniteGradient";
    case ErrorKind::kNonFiniteLoss: return "NonFiniteLoss";
    case ErrorKind::kStepOutOfRange: return "StepOutOfRange";
    case ErrorKind::kShapeMismatch: return "ShapeMismatch";
    case ErrorKind::kValidation: return "ValidationError";
    case ErrorKind::kEmptyDataset: return "EmptyDataset";
    case ErrorKind::kChecksumMismatch: return "ChecksumMismatch";
    case ErrorKind::kVersionMismatch: return "VersionMismatch";
    case ErrorKind::kIo: return "IoError";
    case ErrorKind::kConfig: return "ConfigError";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message),
      kind_(kind) {}

void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace arsrank
