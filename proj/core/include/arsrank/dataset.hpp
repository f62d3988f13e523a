// Copyright 2026 The arsrank Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace arsrank {

enum class Level { kBeginner, kIntermediate, kAdvanced };

inline constexpr std::array<Level, 3> kAllLevels = {Level::kBeginner, Level::kIntermediate,
                                                    Level::kAdvanced};
inline constexpr std::size_t kMinOptions = 2;
inline constexpr std::size_t kMaxOptions = 6;

std::string_view to_string(Level level) noexcept;
/// Throws Validation for anything but "Beginner", "Intermediate", "Advanced".
Level parse_level(std::string_view text);

struct McqOption {
  char letter = 'A';
  std::string text;

  bool operator==(const McqOption&) const = default;
};

struct McqItem {
  std::string id;
  std::string question;
  std::vector<McqOption> options;  // strictly increasing letters in A..F
  std::optional<char> label;
  Level level = Level::kBeginner;

  /// Index of the labeled option; throws Validation when unlabeled.
  std::size_t label_index() const;
  /// Throws Validation naming the violated invariant and the item id.
  void validate(bool require_label) const;

  bool operator==(const McqItem&) const = default;
};

/// Encoder key of the question text: "<id>:q".
std::string question_key(const McqItem& item);
/// Encoder key of an option text: "<id>:<letter>".
std::string option_key(const McqItem& item, std::size_t option_index);

struct LevelCounts {
  std::size_t beginner = 0;
  std::size_t intermediate = 0;
  std::size_t advanced = 0;

  std::size_t total() const noexcept { return beginner + intermediate + advanced; }
  std::size_t of(Level level) const noexcept;
  bool operator==(const LevelCounts&) const = default;
};

LevelCounts count_levels(std::span<const McqItem> items);

/// Parses canonical JSON Lines. Labeled mode requires a label on every item;
/// the permissive mode (for unlabeled test splits) accepts a missing label.
/// Throws FormatError with line number, ValidationError with item id.
std::vector<McqItem> parse_dataset(std::istream& in, bool require_label = true);
std::vector<McqItem> load_dataset(const std::filesystem::path& path);
std::vector<McqItem> load_unlabeled_dataset(const std::filesystem::path& path);

/// Canonical JSON Lines; parse_dataset(write_dataset(x)) == x.
void write_dataset(std::span<const McqItem> items, std::ostream& out);
void save_dataset(std::span<const McqItem> items, const std::filesystem::path& path);

/// One item prepared for the composite objective: the positive option and
/// exactly kContrastiveNegatives incorrect options (resampled with
/// replacement when the item has fewer).
struct TrainExample {
  std::size_t item = 0;      // index into the source item list
  std::size_t positive = 0;  // option index
  std::vector<std::size_t> negatives;  // option indices

  bool operator==(const TrainExample&) const = default;
};

struct TrainBatch {
  std::vector<TrainExample> examples;

  bool operator==(const TrainBatch&) const = default;
};

/// Seeded shuffle into batches of `batch_size` (last batch may be short).
/// Throws EmptyDataset, Config (batch_size == 0), Validation (unlabeled item).
std::vector<TrainBatch> make_batches(std::span<const McqItem> items, std::size_t batch_size,
                                     std::uint64_t seed);

/// Items whose correct option repeats the question's topic word while each
/// distractor carries a different topic; six options, levels round-robin.
std::vector<McqItem> synthesize_toy_dataset(std::size_t n_items, std::uint64_t seed);

/// Mapping from third-party record fields onto McqItem. Option fields are
/// listed per letter in order A, B, ...; empty field names are skipped.
struct FieldMapping {
  std::string id = "id";
  std::string question = "question";
  std::vector<std::string> options = {"A", "B", "C", "D", "E", "F"};
  std::string label = "label";
  std::string level = "level";
};

/// Converts a JSON array of flat objects, or JSON Lines of flat objects.
std::vector<McqItem> adapt_json_records(std::string_view json_text, const FieldMapping& mapping,
                                        bool require_label = true);
/// Converts RFC 4180 CSV with a header row.
std::vector<McqItem> adapt_csv(std::istream& in, const FieldMapping& mapping,
                               bool require_label = true);

}  // namespace arsrank
