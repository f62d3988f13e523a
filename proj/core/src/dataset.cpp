// Copyright 2026 The arsrank Authors
// SPDX-License-Identifier: Apache-2.0

#include "arsrank/dataset.hpp"

#include <fstream>
#include <set>
#include <string>
#include <unordered_set>

#include <json.hpp>

#include "arsrank/errors.hpp"
#include "arsrank/losses.hpp"
#include "arsrank/random.hpp"

namespace arsrank {
namespace {

using ordered_json = nlohmann::ordered_json;

[[noreturn]] void invalid(const std::string& id, const std::string& what) {
  fail(ErrorKind::kValidation, "item '" + id + "': " + what);
}

std::string line_tag(std::size_t line_no) { return "line " + std::to_string(line_no); }

char parse_letter(const ordered_json& j, const std::string& where, const char* field) {
  if (!j.is_string() || j.get_ref<const std::string&>().size() != 1) {
    fail(ErrorKind::kFormat, where + ": '" + field + "' must be a single letter");
  }
  return j.get_ref<const std::string&>()[0];
}

McqItem item_from_json(const ordered_json& j, const std::string& where) {
  static const std::set<std::string> kKnown = {"id", "question", "options", "label", "level"};
  if (!j.is_object()) fail(ErrorKind::kFormat, where + ": expected a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (!kKnown.contains(key)) fail(ErrorKind::kFormat, where + ": unknown field '" + key + "'");
  }
  auto require_string = [&](const char* field) -> const std::string& {
    if (!j.contains(field) || !j[field].is_string()) {
      fail(ErrorKind::kFormat, where + ": missing string field '" + field + "'");
    }
    return j[field].get_ref<const std::string&>();
  };
  McqItem item;
  item.id = require_string("id");
  item.question = require_string("question");
  if (!j.contains("options") || !j["options"].is_object()) {
    fail(ErrorKind::kFormat, where + ": 'options' must be an object of letter -> text");
  }
  for (const auto& [letter, text] : j["options"].items()) {
    if (letter.size() != 1) {
      fail(ErrorKind::kFormat, where + ": option key '" + letter + "' is not a single letter");
    }
    if (!text.is_string()) fail(ErrorKind::kFormat, where + ": option text must be a string");
    item.options.push_back({letter[0], text.get<std::string>()});
  }
  if (j.contains("label") && !j["label"].is_null()) {
    item.label = parse_letter(j["label"], where, "label");
  }
  try {
    item.level = parse_level(require_string("level"));
  } catch (const Error& e) {
    invalid(item.id, e.what());
  }
  return item;
}

ordered_json item_to_json(const McqItem& item) {
  ordered_json j;
  j["id"] = item.id;
  j["question"] = item.question;
  ordered_json options = ordered_json::object();
  for (const auto& opt : item.options) options[std::string(1, opt.letter)] = opt.text;
  j["options"] = std::move(options);
  if (item.label) j["label"] = std::string(1, *item.label);
  j["level"] = std::string(to_string(item.level));
  return j;
}

void check_unique_ids(std::span<const McqItem> items) {
  std::unordered_set<std::string_view> seen;
  for (const auto& item : items) {
    if (!seen.insert(item.id).second) invalid(item.id, "duplicate item id");
  }
}

std::vector<McqItem> load_file(const std::filesystem::path& path, bool require_label) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::kIo, "cannot open dataset " + path.string());
  return parse_dataset(in, require_label);
}

}  // namespace

std::string_view to_string(Level level) noexcept {
  switch (level) {
    case Level::kBeginner: return "Beginner";
    case Level::kIntermediate: return "Intermediate";
    case Level::kAdvanced: return "Advanced";
  }
  return "Beginner";
}

Level parse_level(std::string_view text) {
  for (Level level : kAllLevels) {
    if (text == to_string(level)) return level;
  }
  fail(ErrorKind::kValidation, "unknown level '" + std::string(text) + "'");
}

std::size_t McqItem::label_index() const {
  if (!label) invalid(id, "item has no label");
  for (std::size_t i = 0; i < options.size(); ++i) {
    if (options[i].letter == *label) return i;
  }
  invalid(id, std::string("label '") + *label + "' is not among the options");
}

void McqItem::validate(bool require_label) const {
  if (id.empty()) invalid(id, "empty id");
  if (options.size() < kMinOptions || options.size() > kMaxOptions) {
    invalid(id, "needs between 2 and 6 options, has " + std::to_string(options.size()));
  }
  for (std::size_t i = 0; i < options.size(); ++i) {
    const char letter = options[i].letter;
    if (letter < 'A' || letter > 'F') invalid(id, std::string("option letter '") + letter + "' outside A-F");
    if (i > 0 && letter <= options[i - 1].letter) {
      invalid(id, "option letters must be strictly increasing without duplicates");
    }
  }
  if (label) {
    label_index();
  } else if (require_label) {
    invalid(id, "missing label");
  }
}

std::string question_key(const McqItem& item) { return item.id + ":q"; }

std::string option_key(const McqItem& item, std::size_t option_index) {
  return item.id + ":" + item.options.at(option_index).letter;
}

std::size_t LevelCounts::of(Level level) const noexcept {
  switch (level) {
    case Level::kBeginner: return beginner;
    case Level::kIntermediate: return intermediate;
    case Level::kAdvanced: return advanced;
  }
  return 0;
}

LevelCounts count_levels(std::span<const McqItem> items) {
  LevelCounts c;
  for (const auto& item : items) {
    switch (item.level) {
      case Level::kBeginner: ++c.beginner; break;
      case Level::kIntermediate: ++c.intermediate; break;
      case Level::kAdvanced: ++c.advanced; break;
    }
  }
  return c;
}

std::vector<McqItem> parse_dataset(std::istream& in, bool require_label) {
  std::vector<McqItem> items;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    const auto where = line_tag(line_no);

    // Duplicate keys would otherwise be collapsed silently by the parser.
    std::set<std::string> top_keys;
    std::set<std::string> option_keys;
    std::string current_top;
    std::string duplicate;
    auto on_event = [&](int depth, nlohmann::json::parse_event_t event, ordered_json& parsed) {
      if (event == nlohmann::json::parse_event_t::key) {
        const auto& key = parsed.get_ref<const std::string&>();
        if (depth == 1) {
          if (!top_keys.insert(key).second) duplicate = key;
          current_top = key;
        } else if (depth == 2 && current_top == "options") {
          if (!option_keys.insert(key).second) duplicate = "options." + key;
        }
      }
      return true;
    };
    ordered_json j;
    try {
      j = ordered_json::parse(line, on_event);
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorKind::kFormat, where + ": " + e.what());
    }
    if (!duplicate.empty()) fail(ErrorKind::kFormat, where + ": duplicate key '" + duplicate + "'");
    McqItem item = item_from_json(j, where);
    item.validate(require_label);
    items.push_back(std::move(item));
  }
  check_unique_ids(items);
  return items;
}

std::vector<McqItem> load_dataset(const std::filesystem::path& path) {
  return load_file(path, true);
}

std::vector<McqItem> load_unlabeled_dataset(const std::filesystem::path& path) {
  return load_file(path, false);
}

void write_dataset(std::span<const McqItem> items, std::ostream& out) {
  for (const auto& item : items) out << item_to_json(item).dump() << '\n';
}

void save_dataset(std::span<const McqItem> items, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::kIo, "cannot write dataset " + path.string());
  write_dataset(items, out);
  if (!out) fail(ErrorKind::kIo, "write failed for " + path.string());
}

std::vector<TrainBatch> make_batches(std::span<const McqItem> items, std::size_t batch_size,
                                     std::uint64_t seed) {
  if (items.empty()) fail(ErrorKind::kEmptyDataset, "no items to batch");
  if (batch_size == 0) fail(ErrorKind::kConfig, "batch_size must be >= 1");

  std::vector<std::size_t> order(items.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng shuffle_rng(seed, "shuffle");
  shuffle_rng.shuffle(std::span<std::size_t>(order));
  Rng pad_rng(seed, "pad");

  std::vector<TrainBatch> batches;
  for (std::size_t start = 0; start < order.size(); start += batch_size) {
    TrainBatch batch;
    const std::size_t end = std::min(order.size(), start + batch_size);
    for (std::size_t k = start; k < end; ++k) {
      const McqItem& item = items[order[k]];
      TrainExample ex{order[k], item.label_index(), {}};
      for (std::size_t o = 0; o < item.options.size(); ++o) {
        if (o != ex.positive) ex.negatives.push_back(o);
      }
      const std::size_t distinct = ex.negatives.size();
      while (ex.negatives.size() < kContrastiveNegatives) {
        ex.negatives.push_back(ex.negatives[pad_rng.below(distinct)]);
      }
      batch.examples.push_back(std::move(ex));
    }
    batches.push_back(std::move(batch));
  }
  return batches;
}

std::vector<McqItem> synthesize_toy_dataset(std::size_t n_items, std::uint64_t seed) {
  if (n_items == 0) fail(ErrorKind::kConfig, "n_items must be >= 1");
  constexpr std::size_t kTopics = 16;
  constexpr std::size_t kFillers = 32;
  auto topic = [](std::size_t k) { return "topic" + std::to_string(k); };
  auto filler = [](std::size_t k) { return "w" + std::to_string(k); };

  Rng rng(seed, "synth");
  std::vector<McqItem> items;
  items.reserve(n_items);
  for (std::size_t i = 0; i < n_items; ++i) {
    McqItem item;
    item.id = "syn" + std::to_string(seed) + "-" + std::to_string(i);
    item.level = kAllLevels[i % kAllLevels.size()];
    const std::size_t t = rng.below(kTopics);
    item.question = filler(rng.below(kFillers)) + " " + topic(t);

    // Distractor topics: distinct and different from t.
    std::vector<std::size_t> others;
    for (std::size_t k = 0; k < kTopics; ++k) {
      if (k != t) others.push_back(k);
    }
    rng.shuffle(std::span<std::size_t>(others));

    const auto correct = static_cast<std::size_t>(rng.below(kMaxOptions));
    std::size_t next_other = 0;
    for (std::size_t o = 0; o < kMaxOptions; ++o) {
      const std::size_t tk = (o == correct) ? t : others[next_other++];
      item.options.push_back(
          {static_cast<char>('A' + o), filler(rng.below(kFillers)) + " " + topic(tk)});
    }
    item.label = static_cast<char>('A' + correct);
    items.push_back(std::move(item));
  }
  return items;
}

}  // namespace arsrank
