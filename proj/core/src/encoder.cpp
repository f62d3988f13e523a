// Copyright 2026 The arsrank Authors
// SPDX-License-Identifier: Apache-2.0

#include "arsrank/encoder.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include <json.hpp>

#include "arsrank/errors.hpp"
#include "arsrank/hash.hpp"

namespace arsrank {
namespace {

struct DecodedCodePoint {
  char32_t value;
  std::size_t length;  // bytes consumed
  bool valid;
};

DecodedCodePoint decode_utf8(std::string_view s, std::size_t pos) {
  const auto b0 = static_cast<unsigned char>(s[pos]);
  auto invalid = [&] { return DecodedCodePoint{b0, 1, false}; };
  if (b0 < 0x80) return {b0, 1, true};
  std::size_t len = 0;
  char32_t cp = 0;
  if ((b0 & 0xE0) == 0xC0) {
    len = 2;
    cp = b0 & 0x1F;
  } else if ((b0 & 0xF0) == 0xE0) {
    len = 3;
    cp = b0 & 0x0F;
  } else if ((b0 & 0xF8) == 0xF0) {
    len = 4;
    cp = b0 & 0x07;
  } else {
    return invalid();
  }
  if (pos + len > s.size()) return invalid();
  for (std::size_t i = 1; i < len; ++i) {
    const auto b = static_cast<unsigned char>(s[pos + i]);
    if ((b & 0xC0) != 0x80) return invalid();
    cp = (cp << 6) | (b & 0x3F);
  }
  return {cp, len, true};
}

void append_utf8(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

// Unicode White_Space property.
constexpr bool is_unicode_space(char32_t cp) {
  return (cp >= 0x09 && cp <= 0x0D) || cp == 0x20 || cp == 0x85 || cp == 0xA0 ||
         cp == 0x1680 || (cp >= 0x2000 && cp <= 0x200A) || cp == 0x2028 ||
         cp == 0x2029 || cp == 0x202F || cp == 0x205F || cp == 0x3000;
}

constexpr char32_t to_lower(char32_t cp) {
  if (cp >= 'A' && cp <= 'Z') return cp + 32;
  if ((cp >= 0xC0 && cp <= 0xDE) && cp != 0xD7) return cp + 32;  // Latin-1
  if (cp >= 0x391 && cp <= 0x3AB && cp != 0x3A2) return cp + 32;  // Greek
  if (cp >= 0x410 && cp <= 0x42F) return cp + 32;                 // Cyrillic
  if (cp >= 0x400 && cp <= 0x40F) return cp + 80;
  return cp;
}

}  // namespace

Embedding Embedding::normalized(std::span<const double> raw) {
  const double n = l2_norm(raw);
  if (!(n >= kMinPoolNorm)) {
    fail(ErrorKind::kDegenerateNorm, "cannot normalize a vector of norm " + std::to_string(n));
  }
  std::vector<double> out(raw.begin(), raw.end());
  for (double& v : out) v /= n;
  return Embedding(std::move(out));
}

bool Embedding::is_unit(double tolerance) const {
  return all_finite(values_) && std::abs(norm() - 1.0) <= tolerance;
}

std::string fold_case(std::string_view token) {
  std::string out;
  out.reserve(token.size());
  std::size_t pos = 0;
  while (pos < token.size()) {
    const auto cp = decode_utf8(token, pos);
    if (cp.valid) {
      append_utf8(out, to_lower(cp.value));
    } else {
      out.push_back(token[pos]);
    }
    pos += cp.length;
  }
  return out;
}

std::vector<std::size_t> tokenize(std::string_view text, std::size_t vocab_size) {
  std::vector<std::size_t> ids;
  std::size_t pos = 0;
  std::size_t start = std::string_view::npos;
  auto flush = [&](std::size_t end) {
    if (start == std::string_view::npos) return;
    const std::string folded = fold_case(text.substr(start, end - start));
    ids.push_back(static_cast<std::size_t>(fnv1a64(folded) % vocab_size));
    start = std::string_view::npos;
  };
  while (pos < text.size()) {
    const auto cp = decode_utf8(text, pos);
    if (cp.valid && is_unicode_space(cp.value)) {
      flush(pos);
    } else if (start == std::string_view::npos) {
      start = pos;
    }
    pos += cp.length;
  }
  flush(text.size());
  return ids;
}

ToyEncoderParams ToyEncoderParams::init(std::size_t vocab_size, std::size_t dim, Rng& rng) {
  ToyEncoderParams p{Matrix(vocab_size, dim)};
  for (double& v : p.table.values()) v = rng.uniform(-0.05, 0.05);
  return p;
}

namespace {

std::vector<double> mean_pool(const ToyEncoderParams& params,
                              std::span<const std::size_t> tokens) {
  if (tokens.empty()) fail(ErrorKind::kEmptyInput, "cannot embed an empty token sequence");
  std::vector<double> pooled(params.dim(), 0.0);
  for (std::size_t t : tokens) {
    if (t >= params.vocab_size()) {
      fail(ErrorKind::kDimensionMismatch,
           "token " + std::to_string(t) + " outside vocabulary of " +
               std::to_string(params.vocab_size()));
    }
    const auto row = params.table.row(t);
    for (std::size_t k = 0; k < pooled.size(); ++k) pooled[k] += row[k];
  }
  const double inv = 1.0 / static_cast<double>(tokens.size());
  for (double& v : pooled) v *= inv;
  return pooled;
}

}  // namespace

Embedding embed_toy(const ToyEncoderParams& params, std::span<const std::size_t> tokens) {
  return Embedding::normalized(mean_pool(params, tokens));
}

std::vector<RowGradient> embed_toy_backward(const ToyEncoderParams& params,
                                            std::span<const std::size_t> tokens,
                                            std::span<const double> upstream) {
  const auto pooled = mean_pool(params, tokens);
  if (upstream.size() != params.dim()) {
    fail(ErrorKind::kDimensionMismatch, "upstream gradient has wrong dimension");
  }
  const double norm = l2_norm(pooled);
  if (!(norm >= kMinPoolNorm)) {
    fail(ErrorKind::kDegenerateNorm, "pooled vector norm below threshold");
  }
  // d(x/|x|)/dx = (I - y y^T) / |x|
  std::vector<double> unit(pooled);
  for (double& v : unit) v /= norm;
  const double radial = dot(unit, upstream);
  std::vector<double> d_pooled(params.dim());
  for (std::size_t k = 0; k < d_pooled.size(); ++k) {
    d_pooled[k] = (upstream[k] - radial * unit[k]) / norm;
  }

  std::map<std::size_t, std::size_t> counts;
  for (std::size_t t : tokens) ++counts[t];
  const double inv = 1.0 / static_cast<double>(tokens.size());
  std::vector<RowGradient> grads;
  grads.reserve(counts.size());
  for (const auto& [row, count] : counts) {
    RowGradient g{row, std::vector<double>(params.dim())};
    const double w = static_cast<double>(count) * inv;
    for (std::size_t k = 0; k < d_pooled.size(); ++k) g.grad[k] = w * d_pooled[k];
    grads.push_back(std::move(g));
  }
  return grads;
}

EmbeddingStore EmbeddingStore::from_records(std::vector<EmbeddingRecord> records) {
  EmbeddingStore store;
  for (auto& rec : records) {
    if (store.entries_.empty()) {
      store.dim_ = rec.vector.size();
    } else if (rec.vector.size() != store.dim_) {
      fail(ErrorKind::kDimensionMismatch,
           "record '" + rec.key + "' has dimension " + std::to_string(rec.vector.size()) +
               ", expected " + std::to_string(store.dim_));
    }
    if (store.entries_.contains(rec.key)) {
      fail(ErrorKind::kDuplicateKey, "duplicate embedding key '" + rec.key + "'");
    }
    if (!all_finite(rec.vector)) {
      fail(ErrorKind::kFormat, "record '" + rec.key + "' has non-finite entries");
    }
    Embedding e(std::move(rec.vector));
    if (!e.is_unit()) {
      e = Embedding::normalized(e.values());
      ++store.renormalized_;
    }
    store.entries_.emplace(std::move(rec.key), std::move(e));
  }
  return store;
}

const Embedding& EmbeddingStore::get(std::string_view key) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) {
    fail(ErrorKind::kKeyNotFound, "no embedding for key '" + std::string(key) + "'");
  }
  return it->second;
}

bool EmbeddingStore::contains(std::string_view key) const {
  return entries_.find(key) != entries_.end();
}

EmbeddingStore load_precomputed(std::istream& in, std::ostream* log) {
  std::vector<EmbeddingRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto where = "line " + std::to_string(line_no);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      fail(ErrorKind::kFormat, where + ": " + e.what());
    }
    if (!j.is_object() || !j.contains("key") || !j["key"].is_string() ||
        !j.contains("vector") || !j["vector"].is_array() || j.size() != 2) {
      fail(ErrorKind::kFormat, where + ": expected {\"key\": string, \"vector\": [numbers]}");
    }
    EmbeddingRecord rec{j["key"].get<std::string>(), {}};
    rec.vector.reserve(j["vector"].size());
    for (const auto& v : j["vector"]) {
      if (!v.is_number()) fail(ErrorKind::kFormat, where + ": vector entries must be numbers");
      rec.vector.push_back(v.get<double>());
    }
    if (rec.vector.empty()) fail(ErrorKind::kFormat, where + ": empty vector");
    records.push_back(std::move(rec));
  }
  auto store = EmbeddingStore::from_records(std::move(records));
  if (store.renormalized() > 0 && log != nullptr) {
    *log << "warning: renormalized " << store.renormalized()
         << " embedding(s) that were not unit-norm\n";
  }
  return store;
}

EmbeddingStore load_precomputed(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::kIo, "cannot open embedding store " + path.string());
  return load_precomputed(in, &std::clog);
}

const Embedding& get_embedding(const EmbeddingStore& store, std::string_view key) {
  return store.get(key);
}

Embedding ToyEncoder::encode(const TextRef& text) const {
  return embed_toy(*params_, tokenize(text.text, params_->vocab_size()));
}

}  // namespace arsrank
