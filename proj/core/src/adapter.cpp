// Copyright 2026 The arsrank Authors
// SPDX-License-Identifier: Apache-2.0

// Conversion of third-party record layouts into McqItem via FieldMapping.

#include <cctype>
#include <istream>
#include <map>
#include <sstream>
#include <string>

#include <json.hpp>

#include "arsrank/dataset.hpp"
#include "arsrank/errors.hpp"

namespace arsrank {
namespace {

using Record = std::map<std::string, std::string, std::less<>>;

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

McqItem item_from_record(const Record& rec, const FieldMapping& mapping, const std::string& where,
                         bool require_label) {
  auto field = [&](const std::string& name) -> std::string {
    if (name.empty()) return {};
    const auto it = rec.find(name);
    return it == rec.end() ? std::string{} : it->second;
  };
  McqItem item;
  item.id = field(mapping.id);
  if (item.id.empty()) fail(ErrorKind::kFormat, where + ": missing id field '" + mapping.id + "'");
  item.question = field(mapping.question);
  if (mapping.options.size() > kMaxOptions) {
    fail(ErrorKind::kConfig, "mapping lists more than six option fields");
  }
  for (std::size_t k = 0; k < mapping.options.size(); ++k) {
    const auto text = field(mapping.options[k]);
    if (text.empty()) continue;
    item.options.push_back({static_cast<char>('A' + k), text});
  }
  const auto label = trim(field(mapping.label));
  if (!label.empty()) {
    if (label.size() != 1) fail(ErrorKind::kFormat, where + ": label '" + label + "' is not a letter");
    item.label = static_cast<char>(std::toupper(static_cast<unsigned char>(label[0])));
  }
  item.level = parse_level(trim(field(mapping.level)));
  item.validate(require_label);
  return item;
}

std::string json_scalar_to_string(const nlohmann::json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_null()) return {};
  return v.dump();
}

Record record_from_json(const nlohmann::json& obj, const std::string& where) {
  if (!obj.is_object()) fail(ErrorKind::kFormat, where + ": expected a flat object");
  Record rec;
  for (const auto& [key, value] : obj.items()) {
    if (value.is_structured()) continue;
    rec.emplace(key, json_scalar_to_string(value));
  }
  return rec;
}

// RFC 4180: quoted fields may contain separators, doubled quotes and newlines.
bool read_csv_row(std::istream& in, std::vector<std::string>& row) {
  row.clear();
  std::string cell;
  bool quoted = false;
  bool any = false;
  char ch;
  while (in.get(ch)) {
    any = true;
    if (quoted) {
      if (ch == '"') {
        if (in.peek() == '"') {
          in.get(ch);
          cell.push_back('"');
        } else {
          quoted = false;
        }
      } else {
        cell.push_back(ch);
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      row.push_back(std::move(cell));
      cell.clear();
    } else if (ch == '\n') {
      if (!cell.empty() && cell.back() == '\r') cell.pop_back();
      row.push_back(std::move(cell));
      return true;
    } else {
      cell.push_back(ch);
    }
  }
  if (quoted) fail(ErrorKind::kFormat, "unterminated quoted CSV field");
  if (!any) return false;
  if (!cell.empty() && cell.back() == '\r') cell.pop_back();
  row.push_back(std::move(cell));
  return true;
}

}  // namespace

std::vector<McqItem> adapt_json_records(std::string_view json_text, const FieldMapping& mapping,
                                        bool require_label) {
  std::vector<McqItem> items;
  const auto first = json_text.find_first_not_of(" \t\r\n");
  if (first != std::string_view::npos && json_text[first] == '[') {
    nlohmann::json arr;
    try {
      arr = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorKind::kFormat, e.what());
    }
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const auto where = "record " + std::to_string(i);
      items.push_back(item_from_record(record_from_json(arr[i], where), mapping, where, require_label));
    }
    return items;
  }
  std::istringstream in{std::string(json_text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto where = "line " + std::to_string(line_no);
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorKind::kFormat, where + ": " + e.what());
    }
    items.push_back(item_from_record(record_from_json(obj, where), mapping, where, require_label));
  }
  return items;
}

std::vector<McqItem> adapt_csv(std::istream& in, const FieldMapping& mapping, bool require_label) {
  std::vector<std::string> header;
  if (!read_csv_row(in, header)) fail(ErrorKind::kFormat, "CSV input has no header row");
  if (!header.empty() && header[0].starts_with("\xEF\xBB\xBF")) header[0].erase(0, 3);
  std::vector<McqItem> items;
  std::vector<std::string> row;
  std::size_t row_no = 1;
  while (read_csv_row(in, row)) {
    ++row_no;
    if (row.size() == 1 && trim(row[0]).empty()) continue;
    const auto where = "row " + std::to_string(row_no);
    if (row.size() != header.size()) {
      fail(ErrorKind::kFormat, where + ": expected " + std::to_string(header.size()) +
                                   " fields, got " + std::to_string(row.size()));
    }
    Record rec;
    for (std::size_t i = 0; i < header.size(); ++i) rec.emplace(header[i], row[i]);
    items.push_back(item_from_record(rec, mapping, where, require_label));
  }
  return items;
}

}  // namespace arsrank
