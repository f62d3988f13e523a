// Copyright 2026 The arsrank Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <set>
#include <sstream>
#include <string>

#include "arsrank/dataset.hpp"
#include "arsrank/errors.hpp"

using namespace arsrank;

namespace {

const char* kThree =
    R"({"id": "a1", "question": "ما نصيب الزوجة؟", "options": {"A": "الربع", "B": "الثمن", "C": "النصف"}, "label": "B", "level": "Beginner"})"
    "\n"
    R"({"id": "a2", "question": "q2", "options": {"A": "x", "B": "y"}, "label": "A", "level": "Advanced"})"
    "\n"
    R"({"id": "a3", "question": "q3", "options": {"A": "x", "B": "y", "C": "z", "D": "w", "E": "v", "F": "u"}, "label": "F", "level": "Beginner"})"
    "\n";

std::vector<McqItem> parse(const std::string& text, bool labeled = true) {
  std::istringstream in(text);
  return parse_dataset(in, labeled);
}

ErrorKind parse_error(const std::string& text, std::string* message = nullptr) {
  try {
    parse(text);
  } catch (const Error& e) {
    if (message) *message = e.what();
    return e.kind();
  }
  ADD_FAILURE() << "accepted: " << text;
  return ErrorKind::kIo;
}

McqItem item_with_options(std::size_t n, std::size_t label) {
  McqItem it;
  it.id = "it";
  it.question = "q";
  for (std::size_t o = 0; o < n; ++o) {
    it.options.push_back({static_cast<char>('A' + o), "opt" + std::to_string(o)});
  }
  it.label = static_cast<char>('A' + label);
  return it;
}

}  // namespace

TEST(LoadDataset, ThreeLinesAndLevelCounts) {
  const auto items = parse(kThree);
  ASSERT_EQ(items.size(), 3u);
  EXPECT_EQ(items[0].question, "ما نصيب الزوجة؟");
  EXPECT_EQ(items[0].label_index(), 1u);
  EXPECT_EQ(items[2].options.size(), 6u);
  const auto c = count_levels(items);
  EXPECT_EQ(c.beginner, 2u);
  EXPECT_EQ(c.intermediate, 0u);
  EXPECT_EQ(c.advanced, 1u);
  EXPECT_EQ(c.total(), 3u);
}

TEST(LoadDataset, LabelAbsentFromOptionsIsValidationError) {
  std::string msg;
  EXPECT_EQ(parse_error(R"({"id": "z9", "question": "q", "options": {"A": "x", "B": "y"}, "label": "D", "level": "Beginner"})", &msg),
            ErrorKind::kValidation);
  EXPECT_NE(msg.find("z9"), std::string::npos) << msg;
}

TEST(LoadDataset, FormatErrorsCarryLineNumbers) {
  std::string msg;
  const std::string text = std::string(kThree) + "{not json\n";
  EXPECT_EQ(parse_error(text, &msg), ErrorKind::kFormat);
  EXPECT_NE(msg.find("line 4"), std::string::npos) << msg;
}

TEST(LoadDataset, RejectsStructuralProblems) {
  EXPECT_EQ(parse_error(R"({"id": "x", "question": "q", "options": {"A": "x"}, "label": "A", "level": "Beginner"})"),
            ErrorKind::kValidation);
  EXPECT_EQ(parse_error(R"({"id": "x", "question": "q", "options": {"B": "x", "A": "y"}, "label": "A", "level": "Beginner"})"),
            ErrorKind::kValidation);
  EXPECT_EQ(parse_error(R"({"id": "x", "question": "q", "options": {"A": "x", "G": "y"}, "label": "A", "level": "Beginner"})"),
            ErrorKind::kValidation);
  EXPECT_EQ(parse_error(R"({"id": "x", "question": "q", "options": {"A": "x", "B": "y"}, "label": "A", "level": "Expert"})"),
            ErrorKind::kValidation);
  EXPECT_EQ(parse_error(R"({"id": "x", "question": "q", "options": {"A": "x", "B": "y"}, "level": "Beginner"})"),
            ErrorKind::kValidation);
  const std::string dup_id =
      R"({"id": "x", "question": "q", "options": {"A": "x", "B": "y"}, "label": "A", "level": "Beginner"})"
      "\n"
      R"({"id": "x", "question": "q", "options": {"A": "x", "B": "y"}, "label": "A", "level": "Beginner"})";
  EXPECT_EQ(parse_error(dup_id), ErrorKind::kValidation);
}

TEST(LoadDataset, PermissiveModeAcceptsMissingLabel) {
  const auto items = parse(R"({"id": "t1", "question": "q", "options": {"A": "x", "B": "y"}, "level": "Advanced"})", false);
  ASSERT_EQ(items.size(), 1u);
  EXPECT_FALSE(items[0].label.has_value());
}

TEST(LoadDataset, RoundTripIsIdentity) {
  auto items = parse(kThree);
  auto synth = synthesize_toy_dataset(30, 4);
  items.insert(items.end(), synth.begin(), synth.end());
  std::ostringstream out;
  write_dataset(items, out);
  EXPECT_EQ(parse(out.str()), items);
}

TEST(MakeBatches, DeterministicAndCoversEveryItemOnce) {
  const auto items = synthesize_toy_dataset(70, 1);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto a = make_batches(items, 16, seed);
    EXPECT_EQ(a, make_batches(items, 16, seed));
    ASSERT_EQ(a.size(), 5u);
    EXPECT_EQ(a.back().examples.size(), 6u);
    std::multiset<std::size_t> seen;
    for (const auto& b : a)
      for (const auto& ex : b.examples) {
        seen.insert(ex.item);
        EXPECT_EQ(ex.negatives.size(), 5u);
        for (auto n : ex.negatives) {
          EXPECT_NE(n, ex.positive);
          EXPECT_NE(items[ex.item].options[n].text, items[ex.item].options[ex.positive].text);
        }
      }
    std::multiset<std::size_t> all;
    for (std::size_t i = 0; i < items.size(); ++i) all.insert(i);
    EXPECT_EQ(seen, all);
  }
  EXPECT_NE(make_batches(items, 16, 0), make_batches(items, 16, 1));
}

TEST(MakeBatches, SixOptionsUseEveryIncorrectOption) {
  const std::vector<McqItem> items = {item_with_options(6, 2)};
  const auto b = make_batches(items, 4, 0);
  auto neg = b[0].examples[0].negatives;
  std::sort(neg.begin(), neg.end());
  EXPECT_EQ(neg, (std::vector<std::size_t>{0, 1, 3, 4, 5}));
}

TEST(MakeBatches, ThreeOptionsPadWithBothIncorrectTexts) {
  const std::vector<McqItem> items = {item_with_options(3, 0)};
  std::size_t both = 0;
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    const auto neg = make_batches(items, 1, seed)[0].examples[0].negatives;
    ASSERT_EQ(neg.size(), 5u);
    const auto ones = std::count(neg.begin(), neg.end(), 1u);
    const auto twos = std::count(neg.begin(), neg.end(), 2u);
    ASSERT_EQ(ones + twos, 5);
    if (ones >= 1 && twos >= 1) ++both;
  }
  EXPECT_EQ(both, 1000u);
}

TEST(MakeBatches, Errors) {
  try {
    make_batches(std::vector<McqItem>{}, 4, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kEmptyDataset);
  }
}

TEST(Synthesize, PlantedTopicOnlyInCorrectOption) {
  const auto items = synthesize_toy_dataset(90, 12);
  ASSERT_EQ(items.size(), 90u);
  std::map<char, int> labels;
  for (std::size_t i = 0; i < items.size(); ++i) {
    const auto& it = items[i];
    EXPECT_NO_THROW(it.validate(true));
    EXPECT_EQ(it.options.size(), 6u);
    EXPECT_EQ(it.level, kAllLevels[i % 3]);
    ++labels[*it.label];
    std::set<std::string> qwords;
    std::istringstream qs(it.question);
    for (std::string w; qs >> w;) qwords.insert(w);
    for (std::size_t o = 0; o < it.options.size(); ++o) {
      std::istringstream os(it.options[o].text);
      bool shares_topic = false;
      for (std::string w; os >> w;) {
        if (w.rfind("topic", 0) == 0 && qwords.contains(w)) shares_topic = true;
      }
      EXPECT_EQ(shares_topic, o == it.label_index());
    }
  }
  EXPECT_GT(labels.size(), 3u);
  EXPECT_EQ(synthesize_toy_dataset(90, 12), items);
}

TEST(Adapter, CsvAndJsonRecords) {
  FieldMapping m;
  m.id = "qid";
  m.question = "text";
  m.options = {"opt1", "opt2", "opt3"};
  m.label = "answer";
  m.level = "difficulty";
  std::istringstream csv(
      "qid,text,opt1,opt2,opt3,answer,difficulty\n"
      "c1,\"Who, inherits?\",\"the \"\"son\"\"\",daughter,,A,Intermediate\n");
  const auto a = adapt_csv(csv, m);
  ASSERT_EQ(a.size(), 1u);
  EXPECT_EQ(a[0].question, "Who, inherits?");
  EXPECT_EQ(a[0].options.size(), 2u);
  EXPECT_EQ(a[0].options[0].text, "the \"son\"");
  EXPECT_EQ(a[0].level, Level::kIntermediate);

  const auto j = adapt_json_records(
      R"([{"qid": "j1", "text": "q", "opt1": "x", "opt2": "y", "opt3": "z", "answer": "C", "difficulty": "Advanced"}])", m);
  ASSERT_EQ(j.size(), 1u);
  EXPECT_EQ(*j[0].label, 'C');
  EXPECT_EQ(j[0].options[2].text, "z");
}
