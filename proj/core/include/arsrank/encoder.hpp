// Copyright 2026 The arsrank Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "arsrank/linalg.hpp"
#include "arsrank/random.hpp"

namespace arsrank {

inline constexpr std::size_t kDefaultVocabSize = 65536;
inline constexpr std::size_t kDefaultToyDim = 64;
inline constexpr double kUnitNormTolerance = 1e-5;
inline constexpr double kMinPoolNorm = 1e-12;

/// Pooled text representation. Backends always emit unit-norm values; the
/// raw constructor exists for callers that build probes by hand.
class Embedding {
 public:
  Embedding() = default;
  explicit Embedding(std::vector<double> values) : values_(std::move(values)) {}

  /// l2-normalizes `raw`; throws DegenerateNorm when ||raw|| < kMinPoolNorm.
  static Embedding normalized(std::span<const double> raw);

  std::size_t dim() const noexcept { return values_.size(); }
  std::span<const double> values() const noexcept { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  double norm() const { return l2_norm(values_); }
  bool is_unit(double tolerance = kUnitNormTolerance) const;

  bool operator==(const Embedding&) const = default;

 private:
  std::vector<double> values_;
};

/// Splits on Unicode whitespace, lowercases, and hashes each token with
/// FNV-1a 64 into [0, vocab_size). Total over any byte string.
std::vector<std::size_t> tokenize(std::string_view text,
                                  std::size_t vocab_size = kDefaultVocabSize);

/// Lowercase form of one whitespace-free token, as hashed by tokenize().
/// Case mapping covers ASCII, Latin-1, Greek and Cyrillic; other scripts
/// (Arabic included) are caseless and pass through unchanged.
std::string fold_case(std::string_view token);

/// Token table of the trainable reference encoder: V x d.
struct ToyEncoderParams {
  Matrix table;

  std::size_t vocab_size() const noexcept { return table.rows(); }
  std::size_t dim() const noexcept { return table.cols(); }

  /// uniform(-0.05, 0.05) entries.
  static ToyEncoderParams init(std::size_t vocab_size, std::size_t dim, Rng& rng);
};

/// Mean of the token rows, l2-normalized.
/// Throws EmptyInput for no tokens and DegenerateNorm for a vanishing mean.
Embedding embed_toy(const ToyEncoderParams& params, std::span<const std::size_t> tokens);

struct RowGradient {
  std::size_t row = 0;
  std::vector<double> grad;
};

/// Gradient of <upstream, embed_toy(tokens)> w.r.t. the table, restricted to
/// the rows `tokens` touches (sorted by row, repeated tokens accumulated).
std::vector<RowGradient> embed_toy_backward(const ToyEncoderParams& params,
                                            std::span<const std::size_t> tokens,
                                            std::span<const double> upstream);

struct EmbeddingRecord {
  std::string key;
  std::vector<double> vector;
};

/// Read-only store of precomputed embeddings keyed by text-role identifier
/// ("<item_id>:q", "<item_id>:<letter>").
class EmbeddingStore {
 public:
  EmbeddingStore() = default;

  /// Throws DimensionMismatch, DuplicateKey. Vectors off the unit sphere by
  /// more than kUnitNormTolerance are renormalized.
  static EmbeddingStore from_records(std::vector<EmbeddingRecord> records);

  /// Throws KeyNotFound.
  const Embedding& get(std::string_view key) const;
  bool contains(std::string_view key) const;

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return entries_.size(); }
  /// Number of records renormalized at construction.
  std::size_t renormalized() const noexcept { return renormalized_; }

 private:
  std::map<std::string, Embedding, std::less<>> entries_;
  std::size_t dim_ = 0;
  std::size_t renormalized_ = 0;
};

/// Parses the JSON Lines store format: {"key": str, "vector": [numbers]}.
/// Throws FormatError (with line number), DimensionMismatch, DuplicateKey.
/// A warning goes to `log` (when given) if any vector was renormalized.
EmbeddingStore load_precomputed(std::istream& in, std::ostream* log);
EmbeddingStore load_precomputed(const std::filesystem::path& path);

/// Throws KeyNotFound.
const Embedding& get_embedding(const EmbeddingStore& store, std::string_view key);

/// A text together with its role identifier; backends use whichever they need.
struct TextRef {
  std::string_view key;
  std::string_view text;
};

class EncoderBackend {
 public:
  virtual ~EncoderBackend() = default;
  virtual std::size_t dim() const = 0;
  virtual Embedding encode(const TextRef& text) const = 0;
};

class ToyEncoder final : public EncoderBackend {
 public:
  explicit ToyEncoder(const ToyEncoderParams& params) : params_(&params) {}
  std::size_t dim() const override { return params_->dim(); }
  Embedding encode(const TextRef& text) const override;

 private:
  const ToyEncoderParams* params_;
};

class PrecomputedEncoder final : public EncoderBackend {
 public:
  explicit PrecomputedEncoder(const EmbeddingStore& store) : store_(&store) {}
  std::size_t dim() const override { return store_->dim(); }
  Embedding encode(const TextRef& text) const override { return store_->get(text.key); }

 private:
  const EmbeddingStore* store_;
};

}  // namespace arsrank
