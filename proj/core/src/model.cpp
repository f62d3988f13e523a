// Copyright 2026 The arsrank Authors
// SPDX-License-Identifier: Apache-2.0

#include "arsrank/model.hpp"

#include <cmath>
#include <string>

#include <json.hpp>

#include "arsrank/errors.hpp"

namespace arsrank {
namespace {

using nlohmann::json;

template <typename T>
void read_field(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  const auto& v = j.at(key);
  if constexpr (std::is_same_v<T, double>) {
    if (!v.is_number()) fail(ErrorKind::kConfig, std::string("'") + key + "' must be a number");
    out = v.get<double>();
  } else {
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
      fail(ErrorKind::kConfig, std::string("'") + key + "' must be a nonnegative integer");
    }
    out = static_cast<T>(v.get<std::uint64_t>());
  }
}

void require(bool ok, const char* field, const char* rule) {
  if (!ok) fail(ErrorKind::kConfig, std::string("'") + field + "' " + rule);
}

}  // namespace

std::string_view to_string(Backend backend) noexcept {
  return backend == Backend::kToy ? "toy" : "precomputed";
}

Backend parse_backend(std::string_view text) {
  if (text == "toy") return Backend::kToy;
  if (text == "precomputed") return Backend::kPrecomputed;
  fail(ErrorKind::kConfig, "unknown backend '" + std::string(text) + "' (toy|precomputed)");
}

void TrainConfig::validate() const {
  require(epochs >= 1, "epochs", "must be >= 1");
  require(batch_size >= 1, "batch_size", "must be >= 1");
  require(latent_dim >= 1, "h", "must be >= 1");
  require(embed_dim >= 1, "d", "must be >= 1");
  require(vocab_size >= 1, "vocab_size", "must be >= 1");
  weights.validate();
  require(std::isfinite(lr) && lr >= 0.0, "lr", "must be finite and >= 0");
  require(beta1 >= 0.0 && beta1 < 1.0, "beta1", "must be in [0, 1)");
  require(beta2 >= 0.0 && beta2 < 1.0, "beta2", "must be in [0, 1)");
  require(eps > 0.0, "eps", "must be > 0");
  require(weight_decay >= 0.0, "weight_decay", "must be >= 0");
  require(warmup_fraction > 0.0 && warmup_fraction < 1.0, "warmup_fraction", "must be in (0, 1)");
  require(min_lr >= 0.0 && min_lr <= lr, "min_lr", "must be in [0, lr]");
  require(max_grad_norm > 0.0, "max_grad_norm", "must be > 0");
  require(init_temperature >= kMinTemperature && init_temperature <= kMaxTemperature,
          "init_temperature", "must be in [1e-3, 10]");
}

const std::vector<std::string>& train_config_keys() {
  static const std::vector<std::string> keys = {
      "epochs", "batch_size", "seed", "alpha", "beta", "gamma", "h", "d", "vocab_size",
      "backend", "lr", "beta1", "beta2", "eps", "weight_decay", "warmup_fraction", "min_lr",
      "max_grad_norm", "init_temperature"};
  return keys;
}

std::string train_config_to_json(const TrainConfig& c) {
  json j;
  j["epochs"] = c.epochs;
  j["batch_size"] = c.batch_size;
  j["seed"] = c.seed;
  j["alpha"] = c.weights.alpha;
  j["beta"] = c.weights.beta;
  j["gamma"] = c.weights.gamma;
  j["h"] = c.latent_dim;
  j["d"] = c.embed_dim;
  j["vocab_size"] = c.vocab_size;
  j["backend"] = std::string(to_string(c.backend));
  j["lr"] = c.lr;
  j["beta1"] = c.beta1;
  j["beta2"] = c.beta2;
  j["eps"] = c.eps;
  j["weight_decay"] = c.weight_decay;
  j["warmup_fraction"] = c.warmup_fraction;
  j["min_lr"] = c.min_lr;
  j["max_grad_norm"] = c.max_grad_norm;
  j["init_temperature"] = c.init_temperature;
  return j.dump();
}

TrainConfig train_config_from_json(std::string_view json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    fail(ErrorKind::kConfig, std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) fail(ErrorKind::kConfig, "config must be a JSON object");
  const auto& keys = train_config_keys();
  for (const auto& [key, value] : j.items()) {
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
      fail(ErrorKind::kConfig, "unknown config key '" + key + "'");
    }
  }
  TrainConfig c;
  read_field(j, "epochs", c.epochs);
  read_field(j, "batch_size", c.batch_size);
  read_field(j, "seed", c.seed);
  read_field(j, "alpha", c.weights.alpha);
  read_field(j, "beta", c.weights.beta);
  read_field(j, "gamma", c.weights.gamma);
  read_field(j, "h", c.latent_dim);
  read_field(j, "d", c.embed_dim);
  read_field(j, "vocab_size", c.vocab_size);
  if (j.contains("backend")) {
    if (!j["backend"].is_string()) fail(ErrorKind::kConfig, "'backend' must be a string");
    c.backend = parse_backend(j["backend"].get<std::string>());
  }
  read_field(j, "lr", c.lr);
  read_field(j, "beta1", c.beta1);
  read_field(j, "beta2", c.beta2);
  read_field(j, "eps", c.eps);
  read_field(j, "weight_decay", c.weight_decay);
  read_field(j, "warmup_fraction", c.warmup_fraction);
  read_field(j, "min_lr", c.min_lr);
  read_field(j, "max_grad_norm", c.max_grad_norm);
  read_field(j, "init_temperature", c.init_temperature);
  return c;
}

std::vector<ParamRef> Model::parameters() {
  std::vector<ParamRef> refs;
  if (encoder) refs.push_back({std::string(param_names::kEncoderTable), encoder->table.values(), true});
  refs.push_back({std::string(param_names::kWq), ars.w_q.values(), true});
  refs.push_back({std::string(param_names::kWc), ars.w_c.values(), true});
  refs.push_back({std::string(param_names::kWatt), ars.w_att, true});
  refs.push_back({std::string(param_names::kLogTau), std::span<double>(&temperature.log_tau, 1), false});
  return refs;
}

bool Model::operator==(const Model& other) const {
  const bool enc_eq = encoder.has_value() == other.encoder.has_value() &&
                      (!encoder || encoder->table == other.encoder->table);
  return backend == other.backend && enc_eq && ars.w_q == other.ars.w_q &&
         ars.w_c == other.ars.w_c && ars.w_att == other.ars.w_att &&
         temperature.log_tau == other.temperature.log_tau;
}

Model init_model(const TrainConfig& config) {
  Rng rng(config.seed, "init");
  Model m;
  m.backend = config.backend;
  if (config.backend == Backend::kToy) {
    m.encoder = ToyEncoderParams::init(config.vocab_size, config.embed_dim, rng);
  }
  m.ars = ArsParams::init(config.embed_dim, config.latent_dim, rng);
  m.temperature = Temperature::from_tau(config.init_temperature);
  return m;
}

}  // namespace arsrank
