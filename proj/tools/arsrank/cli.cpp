// Copyright 2026 The arsrank Authors
// SPDX-License-Identifier: Apache-2.0

#include "arsrank/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "arsrank/checkpoint.hpp"
#include "arsrank/dataset.hpp"
#include "arsrank/errors.hpp"
#include "arsrank/gradcheck.hpp"
#include "arsrank/trainer.hpp"

namespace arsrank::cli {
namespace {

using nlohmann::json;

const std::map<std::string, std::string>& train_key_help() {
  static const std::map<std::string, std::string> help = {
      {"epochs", "training epochs"},
      {"batch_size", "items per batch"},
      {"seed", "run seed; all random streams derive from it"},
      {"alpha", "contrastive loss weight"},
      {"beta", "dynamic relevance loss weight"},
      {"gamma", "logit variance regularizer weight"},
      {"h", "latent dimension of the relevance head"},
      {"d", "embedding dimension"},
      {"vocab_size", "toy tokenizer hash buckets"},
      {"backend", "toy | precomputed"},
      {"lr", "peak learning rate"},
      {"beta1", "AdamW first-moment decay"},
      {"beta2", "AdamW second-moment decay"},
      {"eps", "AdamW epsilon"},
      {"weight_decay", "decoupled weight decay (not applied to the temperature)"},
      {"warmup_fraction", "fraction of steps spent in linear warmup"},
      {"min_lr", "learning rate at the final step"},
      {"max_grad_norm", "global gradient norm clip"},
      {"init_temperature", "initial contrastive temperature"},
  };
  return help;
}

json default_json() {
  json j = json::parse(train_config_to_json(TrainConfig{}));
  const RunConfig d;
  j["train_data"] = d.train_data;
  j["eval_data"] = d.eval_data;
  j["predict_data"] = d.predict_data;
  j["embeddings"] = d.embeddings;
  j["checkpoint_dir"] = d.checkpoint_dir;
  j["checkpoint"] = d.checkpoint;
  j["resume"] = d.resume;
  j["metrics"] = d.metrics;
  j["report"] = d.report;
  j["output"] = d.output;
  j["n_items"] = d.n_items;
  j["verbosity"] = d.verbosity;
  return j;
}

void apply_layer(json& base, const json& layer, const std::string& source) {
  if (!layer.is_object()) fail(ErrorKind::kConfig, source + " must be a JSON object");
  for (const auto& [key, value] : layer.items()) {
    if (!base.contains(key)) fail(ErrorKind::kConfig, "unknown config key '" + key + "' in " + source);
    base[key] = value;
  }
}

json parse_flag(const json& default_value, const std::string& key, const std::string& raw) {
  const auto bad = [&](const char* what) -> json {
    fail(ErrorKind::kConfig, "--" + key + " expects " + what + ", got '" + raw + "'");
  };
  if (default_value.is_string()) return raw;
  const char* first = raw.data();
  const char* last = raw.data() + raw.size();
  if (default_value.is_number_unsigned()) {
    std::uint64_t v = 0;
    auto [p, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || p != last) return bad("a nonnegative integer");
    return v;
  }
  if (default_value.is_number_integer()) {
    std::int64_t v = 0;
    auto [p, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || p != last) return bad("an integer");
    return v;
  }
  double v = 0.0;
  auto [p, ec] = std::from_chars(first, last, v);
  if (ec != std::errc{} || p != last) return bad("a number");
  return v;
}

template <typename T>
T get_as(const json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    fail(ErrorKind::kConfig, std::string("'") + key + "' has the wrong type");
  }
}

std::string read_text(const std::filesystem::path& path, ErrorKind kind, const char* what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(kind, std::string("cannot open ") + what + " '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kConfig:
    case ErrorKind::kChecksumMismatch:
    case ErrorKind::kVersionMismatch:
    case ErrorKind::kShapeMismatch:
      return kExitConfig;
    case ErrorKind::kNonFiniteLoss:
    case ErrorKind::kNonFiniteGradient:
    case ErrorKind::kDegenerateNorm:
      return kExitNumerical;
    default:
      return kExitData;
  }
}

void require_path(const std::string& value, const char* key) {
  if (value.empty()) fail(ErrorKind::kConfig, std::string("'") + key + "' is required");
}

std::vector<McqItem> load_labeled(const std::string& path, const char* key) {
  require_path(path, key);
  if (!std::filesystem::exists(path)) fail(ErrorKind::kIo, "data file not found: " + path);
  return load_dataset(path);
}

Checkpoint load_existing_checkpoint(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) {
    fail(ErrorKind::kConfig, "checkpoint not found: " + path.string());
  }
  return load_checkpoint(path);
}

std::optional<EmbeddingStore> load_store(const RunConfig& cfg, Backend backend) {
  if (backend != Backend::kPrecomputed) return std::nullopt;
  require_path(cfg.embeddings, "embeddings");
  if (!std::filesystem::exists(cfg.embeddings)) {
    fail(ErrorKind::kIo, "embedding store not found: " + cfg.embeddings);
  }
  return load_precomputed(std::filesystem::path(cfg.embeddings));
}

void ensure_parent(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
}

int cmd_train(const RunConfig& cfg, std::ostream& out) {
  const auto items = load_labeled(cfg.train_data, "train_data");
  const auto store = load_store(cfg, cfg.train.backend);
  std::optional<Checkpoint> resume;
  if (!cfg.resume.empty()) resume = load_existing_checkpoint(cfg.resume);

  TrainOptions opts;
  opts.store = store ? &*store : nullptr;
  opts.resume = resume ? &*resume : nullptr;
  if (cfg.verbosity >= 2) {
    opts.on_step = [&](const StepRecord& r) {
      out << "step " << r.step << " lr " << r.lr << " loss " << r.loss << " |g| " << r.grad_norm
          << '\n';
    };
  }
  if (cfg.verbosity >= 1) {
    opts.on_epoch = [&](const EpochRecord& e) {
      out << "epoch " << e.epoch + 1 << "/" << cfg.train.epochs << "  loss " << std::fixed
          << std::setprecision(6) << e.mean_loss << "  train_acc " << std::setprecision(4)
          << e.train_accuracy << std::defaultfloat << '\n';
    };
  }
  const auto result = train(cfg.train, items, opts);

  const auto ckpt_path = cfg.checkpoint_path();
  save_checkpoint(result.checkpoint, ckpt_path);
  const auto metrics_path = cfg.metrics_path();
  ensure_parent(metrics_path);
  std::ofstream metrics(metrics_path, std::ios::binary);
  if (!metrics) fail(ErrorKind::kIo, "cannot write " + metrics_path.string());
  write_metrics_jsonl(result, metrics);
  if (cfg.verbosity >= 1) {
    out << "checkpoint: " << ckpt_path.string() << "\nmetrics: " << metrics_path.string() << '\n';
  }
  return kExitOk;
}

int cmd_eval(const RunConfig& cfg, std::ostream& out) {
  const auto ckpt = load_existing_checkpoint(cfg.checkpoint_path());
  const auto items = load_labeled(cfg.eval_data, "eval_data");
  const auto store = load_store(cfg, ckpt.config.backend);
  const auto report = evaluate(ckpt, items, store ? &*store : nullptr);
  out << format_eval_table(report);
  const auto path = cfg.report_path();
  ensure_parent(path);
  std::ofstream f(path, std::ios::binary);
  if (!f) fail(ErrorKind::kIo, "cannot write " + path.string());
  f << eval_report_json(report) << '\n';
  if (cfg.verbosity >= 1) out << "report: " << path.string() << '\n';
  return kExitOk;
}

int cmd_predict(const RunConfig& cfg, std::ostream& out) {
  const auto ckpt = load_existing_checkpoint(cfg.checkpoint_path());
  require_path(cfg.predict_data, "predict_data");
  if (!std::filesystem::exists(cfg.predict_data)) {
    fail(ErrorKind::kIo, "data file not found: " + cfg.predict_data);
  }
  const auto items = load_unlabeled_dataset(cfg.predict_data);
  const auto store = load_store(cfg, ckpt.config.backend);
  const auto path = cfg.predictions_path();
  ensure_parent(path);
  predict(ckpt, items, path, store ? &*store : nullptr);
  if (cfg.verbosity >= 1) out << "predictions: " << path.string() << " (" << items.size() << " items)\n";
  return kExitOk;
}

int cmd_gradcheck(const RunConfig& cfg, std::ostream& out) {
  GradcheckConfig gc;
  gc.seed = cfg.train.seed;
  const auto r = gradcheck(gc);
  out << "gradcheck seed " << gc.seed << ": " << r.checked << " entries, max relative error "
      << std::scientific << std::setprecision(3) << r.max_rel_error << " at "
      << r.worst_parameter << "[" << r.worst_index << "] (tolerance " << gc.tolerance << ") "
      << std::defaultfloat << (r.passed ? "PASS" : "FAIL") << '\n';
  return r.passed ? kExitOk : kExitNumerical;
}

int cmd_synth(const RunConfig& cfg, std::ostream& out) {
  require_path(cfg.output, "output");
  const auto items = synthesize_toy_dataset(cfg.n_items, cfg.train.seed);
  ensure_parent(cfg.output);
  save_dataset(items, cfg.output);
  if (cfg.verbosity >= 1) out << "wrote " << items.size() << " items to " << cfg.output << '\n';
  return kExitOk;
}

std::string keys_footer() {
  std::ostringstream ss;
  ss << "Config keys (set with --<key> VALUE or in the --config JSON file).\n"
     << "Precedence: flags > config file > " << kSeedEnv << " (seed only) > defaults.\n";
  std::size_t width = 0;
  for (const auto& k : config_keys()) width = std::max(width, k.name.size());
  for (const auto& k : config_keys()) {
    ss << "  " << std::left << std::setw(static_cast<int>(width) + 2) << k.name << std::setw(16)
       << k.default_value << k.help << '\n';
  }
  return ss.str();
}

}  // namespace

std::filesystem::path RunConfig::checkpoint_path() const {
  return checkpoint.empty() ? std::filesystem::path(checkpoint_dir) / "model.ckpt"
                            : std::filesystem::path(checkpoint);
}

std::filesystem::path RunConfig::metrics_path() const {
  return metrics.empty() ? std::filesystem::path(checkpoint_dir) / "metrics.jsonl"
                         : std::filesystem::path(metrics);
}

std::filesystem::path RunConfig::report_path() const {
  return report.empty() ? std::filesystem::path(checkpoint_dir) / "eval_report.json"
                        : std::filesystem::path(report);
}

std::filesystem::path RunConfig::predictions_path() const {
  return output.empty() ? std::filesystem::path(checkpoint_dir) / "predictions.csv"
                        : std::filesystem::path(output);
}

const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys = [] {
    const json d = default_json();
    std::vector<ConfigKey> out;
    for (const auto& name : train_config_keys()) {
      out.push_back({name, d.at(name).dump(), train_key_help().at(name)});
    }
    const std::vector<std::pair<std::string, std::string>> extra = {
        {"train_data", "labeled JSONL for train"},
        {"eval_data", "labeled JSONL for eval"},
        {"predict_data", "JSONL for predict (labels optional)"},
        {"embeddings", "precomputed embedding store (JSONL)"},
        {"checkpoint_dir", "directory for default output locations"},
        {"checkpoint", "checkpoint file (default <checkpoint_dir>/model.ckpt)"},
        {"resume", "checkpoint to continue training from"},
        {"metrics", "metrics JSONL (default <checkpoint_dir>/metrics.jsonl)"},
        {"report", "eval JSON report (default <checkpoint_dir>/eval_report.json)"},
        {"output", "predict CSV (default <checkpoint_dir>/predictions.csv) or synth JSONL"},
        {"n_items", "items generated by synth"},
        {"verbosity", "0 quiet, 1 per epoch, 2 per step"},
    };
    for (const auto& [name, help] : extra) out.push_back({name, d.at(name).dump(), help});
    return out;
  }();
  return keys;
}

RunConfig resolve_config(std::optional<std::string_view> env_seed,
                         std::optional<std::string_view> file_text,
                         const std::vector<std::pair<std::string, std::string>>& flags) {
  json merged = default_json();
  if (env_seed) {
    merged["seed"] = parse_flag(merged["seed"], "seed (from ARSRANK_SEED)", std::string(*env_seed));
  }
  if (file_text) {
    json layer;
    try {
      layer = json::parse(*file_text);
    } catch (const json::exception& e) {
      fail(ErrorKind::kConfig, std::string("config file is not valid JSON: ") + e.what());
    }
    apply_layer(merged, layer, "config file");
  }
  const json defaults = default_json();
  for (const auto& [key, raw] : flags) {
    if (!defaults.contains(key)) fail(ErrorKind::kConfig, "unknown config key '" + key + "'");
    merged[key] = parse_flag(defaults[key], key, raw);
  }

  json train_part = json::object();
  for (const auto& key : train_config_keys()) train_part[key] = merged[key];
  RunConfig cfg;
  cfg.train = train_config_from_json(train_part.dump());
  cfg.train.validate();
  cfg.train_data = get_as<std::string>(merged, "train_data");
  cfg.eval_data = get_as<std::string>(merged, "eval_data");
  cfg.predict_data = get_as<std::string>(merged, "predict_data");
  cfg.embeddings = get_as<std::string>(merged, "embeddings");
  cfg.checkpoint_dir = get_as<std::string>(merged, "checkpoint_dir");
  cfg.checkpoint = get_as<std::string>(merged, "checkpoint");
  cfg.resume = get_as<std::string>(merged, "resume");
  cfg.metrics = get_as<std::string>(merged, "metrics");
  cfg.report = get_as<std::string>(merged, "report");
  cfg.output = get_as<std::string>(merged, "output");
  if (!merged["n_items"].is_number_unsigned() || merged["n_items"].get<std::uint64_t>() == 0) {
    fail(ErrorKind::kConfig, "'n_items' must be a positive integer");
  }
  cfg.n_items = merged["n_items"].get<std::size_t>();
  if (!merged["verbosity"].is_number_integer()) {
    fail(ErrorKind::kConfig, "'verbosity' must be an integer");
  }
  cfg.verbosity = merged["verbosity"].get<int>();
  return cfg;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"arsrank: attentive relevance scoring for multiple-choice ranking", "arsrank"};
  app.require_subcommand(1);
  app.footer(keys_footer());
  app.set_help_flag("-h,--help", "print this help and exit");

  std::string config_file;
  std::map<std::string, std::string> raw;
  std::vector<std::pair<std::string, CLI::Option*>> bound;

  struct Command {
    const char* name;
    const char* help;
    int (*fn)(const RunConfig&, std::ostream&);
  };
  const Command commands[] = {
      {"train", "train a model and write a checkpoint and metrics log", cmd_train},
      {"eval", "evaluate a checkpoint on labeled data", cmd_eval},
      {"predict", "write predictions for (possibly unlabeled) data", cmd_predict},
      {"gradcheck", "compare analytic gradients with finite differences", cmd_gradcheck},
      {"synth", "write a synthetic dataset", cmd_synth},
  };
  std::vector<CLI::App*> subs;
  for (const auto& c : commands) {
    auto* sub = app.add_subcommand(c.name, c.help);
    sub->footer("Precedence: flags > config file > ARSRANK_SEED (seed only) > defaults.");
    sub->set_help_flag("--help", "print this help and exit");
    sub->add_option("--config", config_file, "JSON config file");
    for (const auto& key : config_keys()) {
      auto* opt = sub->add_option("--" + key.name, raw[key.name], key.help);
      opt->default_str(key.default_value);
      const char c = key.default_value.front();
      opt->type_name(c == '"' ? "STR" : key.default_value.find_first_of(".e") != std::string::npos ? "FLOAT" : "INT");
      bound.emplace_back(key.name, opt);
    }
    subs.push_back(sub);
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    std::vector<std::pair<std::string, std::string>> flags;
    for (const auto& [name, opt] : bound) {
      if (opt->count() > 0) flags.emplace_back(name, raw[name]);
    }
    std::optional<std::string> env;
    if (const char* v = std::getenv(std::string(kSeedEnv).c_str()); v != nullptr && *v != '\0') {
      env = v;
    }
    std::optional<std::string> file;
    if (!config_file.empty()) file = read_text(config_file, ErrorKind::kConfig, "config file");
    const RunConfig cfg = resolve_config(env, file, flags);
    for (std::size_t i = 0; i < subs.size(); ++i) {
      if (subs[i]->parsed()) return commands[i].fn(cfg, out);
    }
    return kExitConfig;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e.kind());
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  }
}

}  // namespace arsrank::cli
