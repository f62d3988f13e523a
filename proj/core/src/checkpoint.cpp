// Copyright 2026 The arsrank Authors
// SPDX-License-Identifier: Apache-2.0

#include "arsrank/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <span>
#include <sstream>
#include <vector>

#include <json.hpp>

#include "arsrank/errors.hpp"
#include "arsrank/hash.hpp"

namespace arsrank {
namespace {

using nlohmann::json;

constexpr std::string_view kMagicPrefix = "ARSCKPT";
constexpr std::string_view kMomentM = "adamw.m/";
constexpr std::string_view kMomentV = "adamw.v/";

struct TensorEntry {
  std::string name;
  std::size_t rows;
  std::size_t cols;
  std::span<const double> values;
};

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

std::uint64_t get_u64(std::string_view in, std::size_t pos) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) {
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[pos + i])) << (8 * i);
  }
  return v;
}

std::string checksum_hex(std::string_view magic, std::string_view meta, std::string_view payload) {
  std::uint64_t h = fnv1a64(magic);
  h = fnv1a64(meta, h);
  h = fnv1a64(payload, h);
  std::ostringstream os;
  os << "fnv1a64:" << std::hex;
  os.width(16);
  os.fill('0');
  os << h;
  return os.str();
}

std::vector<TensorEntry> manifest(const Checkpoint& ckpt) {
  const Model& m = ckpt.model;
  std::vector<TensorEntry> tensors;
  auto add = [&](std::string_view name, std::size_t rows, std::size_t cols,
                 std::span<const double> values) {
    tensors.push_back({std::string(name), rows, cols, values});
  };
  if (m.encoder) {
    add(param_names::kEncoderTable, m.encoder->table.rows(), m.encoder->table.cols(),
        m.encoder->table.values());
  }
  add(param_names::kWq, m.ars.w_q.rows(), m.ars.w_q.cols(), m.ars.w_q.values());
  add(param_names::kWc, m.ars.w_c.rows(), m.ars.w_c.cols(), m.ars.w_c.values());
  add(param_names::kWatt, m.ars.w_att.size(), 1, m.ars.w_att);
  add(param_names::kLogTau, 1, 1, std::span<const double>(&m.temperature.log_tau, 1));

  const std::size_t n_params = tensors.size();
  for (std::size_t i = 0; i < n_params; ++i) {
    const auto it = ckpt.optimizer.moments.find(tensors[i].name);
    if (it == ckpt.optimizer.moments.end()) continue;
    const auto rows = tensors[i].rows;
    const auto cols = tensors[i].cols;
    const auto name = tensors[i].name;
    add(std::string(kMomentM) + name, rows, cols, it->second.m);
    add(std::string(kMomentV) + name, rows, cols, it->second.v);
  }
  return tensors;
}

json metadata(const Checkpoint& ckpt, const std::vector<TensorEntry>& tensors) {
  json meta;
  meta["format_version"] = kCheckpointVersion;
  meta["config"] = json::parse(train_config_to_json(ckpt.config));
  meta["step"] = ckpt.step;
  meta["epochs_completed"] = ckpt.epochs_completed;
  meta["rng"] = {{"seed", ckpt.config.seed},
                 {"next_epoch", ckpt.epochs_completed},
                 {"streams", {"init", "batches", "negatives"}}};
  meta["optimizer"] = {{"step", ckpt.optimizer.step}};
  json list = json::array();
  for (const auto& t : tensors) list.push_back({{"name", t.name}, {"shape", {t.rows, t.cols}}});
  meta["tensors"] = std::move(list);
  return meta;
}

[[noreturn]] void shape_error(const std::string& what) { fail(ErrorKind::kShapeMismatch, what); }

Checkpoint checkpoint_from_verified(const json& meta, std::string_view payload) {
  Checkpoint ckpt;
  ckpt.config = train_config_from_json(meta.at("config").dump());
  ckpt.config.validate();
  ckpt.step = meta.at("step").get<std::size_t>();
  ckpt.epochs_completed = meta.at("epochs_completed").get<std::size_t>();
  ckpt.optimizer.config = ckpt.config.adamw();
  ckpt.optimizer.step = meta.at("optimizer").at("step").get<std::size_t>();

  const auto& cfg = ckpt.config;
  Model& m = ckpt.model;
  m.backend = cfg.backend;
  m.ars = ArsParams{Matrix(cfg.latent_dim, cfg.embed_dim), Matrix(cfg.latent_dim, cfg.embed_dim),
                    std::vector<double>(cfg.latent_dim)};
  if (cfg.backend == Backend::kToy) {
    m.encoder = ToyEncoderParams{Matrix(cfg.vocab_size, cfg.embed_dim)};
  }

  std::size_t offset = 0;
  bool seen_log_tau = false;
  for (const auto& t : meta.at("tensors")) {
    const auto name = t.at("name").get<std::string>();
    const auto rows = t.at("shape").at(0).get<std::size_t>();
    const auto cols = t.at("shape").at(1).get<std::size_t>();
    std::span<double> dst;
    std::string base = name;
    bool is_m = false;
    bool is_v = false;
    if (name.starts_with(kMomentM)) {
      base = name.substr(kMomentM.size());
      is_m = true;
    } else if (name.starts_with(kMomentV)) {
      base = name.substr(kMomentV.size());
      is_v = true;
    }
    std::size_t want_rows = 0;
    std::size_t want_cols = 0;
    std::span<double> param;
    if (base == param_names::kEncoderTable && m.encoder) {
      param = m.encoder->table.values();
      want_rows = cfg.vocab_size;
      want_cols = cfg.embed_dim;
    } else if (base == param_names::kWq) {
      param = m.ars.w_q.values();
      want_rows = cfg.latent_dim;
      want_cols = cfg.embed_dim;
    } else if (base == param_names::kWc) {
      param = m.ars.w_c.values();
      want_rows = cfg.latent_dim;
      want_cols = cfg.embed_dim;
    } else if (base == param_names::kWatt) {
      param = m.ars.w_att;
      want_rows = cfg.latent_dim;
      want_cols = 1;
    } else if (base == param_names::kLogTau) {
      param = std::span<double>(&m.temperature.log_tau, 1);
      want_rows = 1;
      want_cols = 1;
      if (!is_m && !is_v) seen_log_tau = true;
    } else {
      shape_error("unexpected tensor '" + name + "'");
    }
    if (rows != want_rows || cols != want_cols) {
      shape_error("tensor '" + name + "' is " + std::to_string(rows) + "x" + std::to_string(cols) +
                  ", config implies " + std::to_string(want_rows) + "x" + std::to_string(want_cols));
    }
    if (is_m || is_v) {
      auto& mom = ckpt.optimizer.moments[base];
      auto& vec = is_m ? mom.m : mom.v;
      vec.assign(param.size(), 0.0);
      dst = vec;
    } else {
      dst = param;
    }
    const std::size_t n_bytes = dst.size() * 8;
    if (offset + n_bytes > payload.size()) shape_error("tensor data truncated at '" + name + "'");
    for (std::size_t i = 0; i < dst.size(); ++i) {
      dst[i] = std::bit_cast<double>(get_u64(payload, offset + 8 * i));
    }
    offset += n_bytes;
  }
  if (offset != payload.size()) shape_error("trailing bytes after the last tensor");
  if (!seen_log_tau) shape_error("checkpoint lacks " + std::string(param_names::kLogTau));
  for (const auto& [name, mom] : ckpt.optimizer.moments) {
    if (mom.m.size() != mom.v.size()) shape_error("unpaired optimizer moments for '" + name + "'");
  }
  m.ars.validate();
  return ckpt;
}

}  // namespace

std::string serialize_checkpoint(const Checkpoint& ckpt) {
  const auto tensors = manifest(ckpt);
  json meta = metadata(ckpt, tensors);

  std::string payload;
  for (const auto& t : tensors) {
    for (double v : t.values) put_u64(payload, std::bit_cast<std::uint64_t>(v));
  }
  const std::string unsigned_meta = meta.dump();
  meta["checksum"] = checksum_hex(kCheckpointMagic, unsigned_meta, payload);
  const std::string meta_text = meta.dump();

  std::string out;
  out.reserve(kCheckpointMagic.size() + 8 + meta_text.size() + payload.size());
  out.append(kCheckpointMagic);
  put_u64(out, meta_text.size());
  out.append(meta_text);
  out.append(payload);
  return out;
}

Checkpoint deserialize_checkpoint(std::string_view bytes) {
  if (bytes.size() < kCheckpointMagic.size() + 8) fail(ErrorKind::kFormat, "checkpoint truncated");
  const auto magic = bytes.substr(0, kCheckpointMagic.size());
  if (magic != kCheckpointMagic) {
    if (magic.starts_with(kMagicPrefix)) {
      fail(ErrorKind::kVersionMismatch, "unsupported checkpoint format '" + std::string(magic) + "'");
    }
    fail(ErrorKind::kFormat, "not a checkpoint file (bad magic)");
  }
  const std::uint64_t meta_len = get_u64(bytes, kCheckpointMagic.size());
  const std::size_t meta_begin = kCheckpointMagic.size() + 8;
  if (meta_len > bytes.size() - meta_begin) {
    fail(ErrorKind::kChecksumMismatch, "metadata length exceeds file size");
  }
  const auto meta_text = bytes.substr(meta_begin, meta_len);
  const auto payload = bytes.substr(meta_begin + meta_len);

  json meta;
  try {
    meta = json::parse(meta_text);
  } catch (const json::exception&) {
    fail(ErrorKind::kChecksumMismatch, "metadata block is corrupted");
  }
  if (!meta.is_object() || !meta.contains("checksum") || !meta["checksum"].is_string()) {
    fail(ErrorKind::kChecksumMismatch, "metadata lacks a checksum");
  }
  const std::string stored = meta["checksum"].get<std::string>();
  meta.erase("checksum");
  if (checksum_hex(kCheckpointMagic, meta.dump(), payload) != stored) {
    fail(ErrorKind::kChecksumMismatch, "checkpoint checksum does not match contents");
  }
  if (meta.value("format_version", 0u) != kCheckpointVersion) {
    fail(ErrorKind::kVersionMismatch, "checkpoint format_version " + meta["format_version"].dump());
  }

  try {
    return checkpoint_from_verified(meta, payload);
  } catch (const json::exception& e) {
    fail(ErrorKind::kFormat, std::string("checkpoint metadata: ") + e.what());
  }
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  const std::string bytes = serialize_checkpoint(ckpt);
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::kIo, "cannot write checkpoint " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(ErrorKind::kIo, "write failed for " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::kIo, "cannot open checkpoint " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize_checkpoint(bytes);
}

}  // namespace arsrank
