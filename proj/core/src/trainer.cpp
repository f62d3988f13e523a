// Copyright 2026 The arsrank Authors
// SPDX-License-Identifier: Apache-2.0

#include "arsrank/trainer.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "arsrank/errors.hpp"
#include "arsrank/optimizer.hpp"

namespace arsrank {
namespace {

struct EncodedItem {
  Embedding question;
  std::vector<Embedding> options;
  std::vector<std::size_t> question_tokens;
  std::vector<std::vector<std::size_t>> option_tokens;
};

Embedding encode_one(const Model& model, const EmbeddingStore* store, const std::string& key,
                     const std::string& text, std::vector<std::size_t>& tokens) {
  if (model.encoder) {
    tokens = tokenize(text, model.encoder->vocab_size());
    if (tokens.empty()) fail(ErrorKind::kEmptyInput, "text '" + key + "' has no tokens");
    return embed_toy(*model.encoder, tokens);
  }
  if (store == nullptr) {
    fail(ErrorKind::kConfig, "precomputed backend requires an embedding store");
  }
  const Embedding& e = store->get(key);
  if (e.dim() != model.dim()) {
    fail(ErrorKind::kDimensionMismatch, "store dimension " + std::to_string(e.dim()) +
                                            " differs from model dimension " +
                                            std::to_string(model.dim()));
  }
  return e;
}

EncodedItem encode_item(const Model& model, const EmbeddingStore* store, const McqItem& item) {
  EncodedItem enc;
  enc.question = encode_one(model, store, question_key(item), item.question, enc.question_tokens);
  enc.option_tokens.resize(item.options.size());
  for (std::size_t o = 0; o < item.options.size(); ++o) {
    enc.options.push_back(
        encode_one(model, store, option_key(item, o), item.options[o].text, enc.option_tokens[o]));
  }
  return enc;
}

std::string emb_name(std::size_t example, std::size_t option) {
  return "emb/" + std::to_string(example) + "/" + std::to_string(option);
}
std::string emb_question_name(std::size_t example) {
  return "emb/" + std::to_string(example) + "/q";
}
std::string logit_name(std::size_t example, std::size_t option) {
  return "logit/" + std::to_string(example) + "/" + std::to_string(option);
}

void add_to(std::span<double> dst, std::span<const double> src, double w = 1.0) {
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += w * src[i];
}

std::size_t parse_index(std::string_view s) {
  std::size_t v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
    fail(ErrorKind::kKeyNotFound, "malformed gradient name component '" + std::string(s) + "'");
  }
  return v;
}

// Splits "kind/<example>/<role>".
struct BatchSlot {
  std::string_view kind;
  std::size_t example;
  std::string_view role;
};

BatchSlot parse_slot(std::string_view name) {
  const auto a = name.find('/');
  const auto b = name.find('/', a + 1);
  if (a == std::string_view::npos || b == std::string_view::npos) {
    fail(ErrorKind::kKeyNotFound, "unexpected gradient name '" + std::string(name) + "'");
  }
  return {name.substr(0, a), parse_index(name.substr(a + 1, b - a - 1)), name.substr(b + 1)};
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace

std::vector<std::size_t> sample_dynamic_negatives(std::span<const McqItem> items,
                                                  const TrainBatch& batch, Rng& rng) {
  std::vector<std::size_t> out;
  out.reserve(batch.examples.size());
  for (const auto& ex : batch.examples) {
    // make_batches lists each incorrect option once before any padding.
    const std::size_t incorrect = items[ex.item].options.size() - 1;
    out.push_back(ex.negatives[rng.below(incorrect)]);
  }
  return out;
}

BatchObjective batch_objective(const Model& model, std::span<const McqItem> items,
                               const TrainBatch& batch,
                               std::span<const std::size_t> dynamic_negatives,
                               const LossWeights& weights, const EmbeddingStore* store) {
  const std::size_t n = batch.examples.size();
  if (n == 0) fail(ErrorKind::kEmptyDataset, "empty batch");
  if (dynamic_negatives.size() != n) {
    fail(ErrorKind::kDimensionMismatch, "one dynamic negative per example required");
  }
  const std::size_t d = model.dim();

  std::vector<EncodedItem> encoded;
  encoded.reserve(n);
  for (const auto& ex : batch.examples) encoded.push_back(encode_item(model, store, items[ex.item]));

  BatchObjective out;
  std::vector<std::vector<ArsTrace>> traces(n);
  std::vector<Embedding> queries, positives;
  std::vector<std::vector<Embedding>> negatives;
  std::vector<double> r_pos, r_neg, s_pos, s_neg;
  for (std::size_t k = 0; k < n; ++k) {
    const auto& ex = batch.examples[k];
    const auto& enc = encoded[k];
    std::vector<CandidateScore> scores;
    for (const auto& opt : enc.options) {
      traces[k].push_back(ars_forward(model.ars, enc.question, opt));
      scores.push_back({traces[k].back().logit, traces[k].back().score});
    }
    if (argmax_logit(scores) == ex.positive) ++out.correct;

    queries.push_back(enc.question);
    positives.push_back(enc.options[ex.positive]);
    std::vector<Embedding> negs;
    for (std::size_t o : ex.negatives) negs.push_back(enc.options[o]);
    negatives.push_back(std::move(negs));

    const std::size_t dn = dynamic_negatives[k];
    if (dn >= enc.options.size() || dn == ex.positive) {
      fail(ErrorKind::kValidation, "dynamic negative must be an incorrect option");
    }
    r_pos.push_back(traces[k][ex.positive].score);
    r_neg.push_back(traces[k][dn].score);
    s_pos.push_back(traces[k][ex.positive].logit);
    s_neg.push_back(traces[k][dn].logit);
  }

  // Component gradients live in a batch namespace: embeddings "emb/k/<o|q>",
  // logits "logit/k/o", and the temperature under its parameter name.
  LossComponent cons, dyn, reg;
  {
    const auto c = contrastive_loss(queries, positives, negatives, model.temperature);
    cons.value = c.value;
    for (std::size_t k = 0; k < n; ++k) {
      const auto& ex = batch.examples[k];
      add_to(cons.grads.get_or_add(emb_question_name(k), d), c.d_query[k]);
      add_to(cons.grads.get_or_add(emb_name(k, ex.positive), d), c.d_positive[k]);
      for (std::size_t j = 0; j < ex.negatives.size(); ++j) {
        add_to(cons.grads.get_or_add(emb_name(k, ex.negatives[j]), d), c.d_negative[k][j]);
      }
    }
    cons.grads.get_or_add(param_names::kLogTau, 1)[0] += c.d_log_tau;
  }
  {
    const auto l = dynamic_loss(r_pos, r_neg);
    dyn.value = l.value;
    for (std::size_t k = 0; k < n; ++k) {
      const auto& tp = traces[k][batch.examples[k].positive];
      const auto& tn = traces[k][dynamic_negatives[k]];
      dyn.grads.get_or_add(logit_name(k, batch.examples[k].positive), 1)[0] +=
          l.d_positive[k] * tp.score * (1.0 - tp.score);
      dyn.grads.get_or_add(logit_name(k, dynamic_negatives[k]), 1)[0] +=
          l.d_negative[k] * tn.score * (1.0 - tn.score);
    }
  }
  {
    const auto l = reg_loss(s_pos, s_neg);
    reg.value = l.value;
    for (std::size_t k = 0; k < n; ++k) {
      reg.grads.get_or_add(logit_name(k, batch.examples[k].positive), 1)[0] += l.d_positive[k];
      reg.grads.get_or_add(logit_name(k, dynamic_negatives[k]), 1)[0] += l.d_negative[k];
    }
  }
  out.loss = total_loss(cons, dyn, reg, weights);

  // Back through the head: logits -> (W_q, W_c, w_att, embeddings).
  GradientSet emb_grads;
  auto d_wq = out.grads.get_or_add(param_names::kWq, model.ars.w_q.size());
  auto d_wc = out.grads.get_or_add(param_names::kWc, model.ars.w_c.size());
  auto d_watt = out.grads.get_or_add(param_names::kWatt, model.ars.w_att.size());
  auto d_log_tau = out.grads.get_or_add(param_names::kLogTau, 1);
  for (const auto& [name, grad] : out.loss.grads) {
    if (name == param_names::kLogTau) {
      d_log_tau[0] += grad[0];
      continue;
    }
    const auto slot = parse_slot(name);
    if (slot.kind == "emb") {
      add_to(emb_grads.get_or_add(name, d), grad);
    } else if (slot.kind == "logit") {
      const std::size_t k = slot.example;
      const std::size_t o = parse_index(slot.role);
      const auto& enc = encoded[k];
      const auto g = ars_backward_logit(model.ars, enc.question, enc.options[o], traces[k][o], grad[0]);
      add_to(d_wq, g.d_w_q.values());
      add_to(d_wc, g.d_w_c.values());
      add_to(d_watt, g.d_w_att);
      add_to(emb_grads.get_or_add(emb_question_name(k), d), g.d_q);
      add_to(emb_grads.get_or_add(emb_name(k, o), d), g.d_c);
    } else {
      fail(ErrorKind::kKeyNotFound, "unexpected gradient name '" + name + "'");
    }
  }

  // Back through the toy encoder into the token table.
  if (model.encoder) {
    const auto& table = *model.encoder;
    auto d_table = out.grads.get_or_add(param_names::kEncoderTable, table.table.size());
    for (const auto& [name, grad] : emb_grads) {
      const auto slot = parse_slot(name);
      const auto& enc = encoded[slot.example];
      const auto& tokens =
          slot.role == "q" ? enc.question_tokens : enc.option_tokens[parse_index(slot.role)];
      for (const auto& rg : embed_toy_backward(table, tokens, grad)) {
        add_to(d_table.subspan(rg.row * d, d), rg.grad);
      }
    }
  }
  return out;
}

TrainResult train(const TrainConfig& config, std::span<const McqItem> items,
                  const TrainOptions& options) {
  config.validate();
  if (items.empty()) fail(ErrorKind::kEmptyDataset, "training set is empty");
  for (const auto& item : items) item.validate(true);
  if (config.backend == Backend::kPrecomputed) {
    if (options.store == nullptr) {
      fail(ErrorKind::kConfig, "precomputed backend requires an embedding store");
    }
    if (options.store->dim() != config.embed_dim) {
      fail(ErrorKind::kDimensionMismatch, "store dimension " + std::to_string(options.store->dim()) +
                                              " differs from d=" + std::to_string(config.embed_dim));
    }
  }

  TrainResult result;
  Checkpoint& ckpt = result.checkpoint;
  if (options.resume != nullptr) {
    ckpt = *options.resume;
    if (!(ckpt.config == config)) {
      fail(ErrorKind::kConfig, "resume checkpoint was written with a different config");
    }
  } else {
    ckpt.config = config;
    ckpt.model = init_model(config);
    ckpt.optimizer.config = config.adamw();
  }

  const std::size_t batches_per_epoch = (items.size() + config.batch_size - 1) / config.batch_size;
  ScheduleConfig schedule;
  schedule.total_steps = config.epochs * batches_per_epoch;
  schedule.warmup_fraction = config.warmup_fraction;
  schedule.base_lr = config.lr;
  schedule.min_lr = config.min_lr;

  const std::size_t last_epoch =
      std::min(config.epochs, options.stop_after_epoch.value_or(config.epochs));
  auto params = ckpt.model.parameters();
  for (std::size_t epoch = ckpt.epochs_completed; epoch < last_epoch; ++epoch) {
    const auto batches = make_batches(items, config.batch_size, derive_seed(config.seed, "batches", epoch));
    Rng negative_rng(config.seed, "negatives", epoch);
    double loss_sum = 0.0;
    std::size_t correct = 0;
    for (const auto& batch : batches) {
      const auto dyn_neg = sample_dynamic_negatives(items, batch, negative_rng);
      auto abort_batch = [&](const std::string& what) {
        std::string ids;
        for (const auto& ex : batch.examples) ids += (ids.empty() ? "" : ",") + items[ex.item].id;
        fail(ErrorKind::kNonFiniteLoss, what + " at step " + std::to_string(ckpt.step) +
                                            " (epoch " + std::to_string(epoch) +
                                            "), batch ids: " + ids);
      };
      BatchObjective obj;
      try {
        obj = batch_objective(ckpt.model, items, batch, dyn_neg, config.weights, options.store);
      } catch (const Error& e) {
        // A NaN anywhere upstream surfaces as a NaN score first.
        if (e.kind() != ErrorKind::kScoreOutOfRange) throw;
        abort_batch(e.what());
      }
      if (!std::isfinite(obj.loss.value)) abort_batch("loss " + format_double(obj.loss.value));
      const double lr = lr_at(ckpt.step, schedule);
      const double norm = clip_global_norm(obj.grads, config.max_grad_norm);
      adamw_step(params, obj.grads, ckpt.optimizer, lr);
      ckpt.model.temperature.clamp();

      StepRecord rec{epoch, ckpt.step, lr, obj.loss.value, obj.loss.contrastive, obj.loss.dynamic,
                     obj.loss.regularization, norm};
      if (options.on_step) options.on_step(rec);
      result.steps.push_back(rec);
      loss_sum += obj.loss.value * static_cast<double>(batch.examples.size());
      correct += obj.correct;
      ++ckpt.step;
    }
    ckpt.epochs_completed = epoch + 1;
    EpochRecord er{epoch, loss_sum / static_cast<double>(items.size()),
                   static_cast<double>(correct) / static_cast<double>(items.size())};
    if (options.on_epoch) options.on_epoch(er);
    result.epochs.push_back(er);
  }
  return result;
}

void write_metrics_jsonl(const TrainResult& result, std::ostream& out) {
  std::size_t s = 0;
  for (const auto& er : result.epochs) {
    for (; s < result.steps.size() && result.steps[s].epoch == er.epoch; ++s) {
      const auto& st = result.steps[s];
      nlohmann::ordered_json j;
      j["type"] = "step";
      j["epoch"] = st.epoch;
      j["step"] = st.step;
      j["lr"] = st.lr;
      j["loss"] = st.loss;
      j["l_cons"] = st.contrastive;
      j["l_dyn"] = st.dynamic;
      j["l_reg"] = st.regularization;
      j["grad_norm"] = st.grad_norm;
      out << j.dump() << '\n';
    }
    nlohmann::ordered_json j;
    j["type"] = "epoch";
    j["epoch"] = er.epoch;
    j["mean_loss"] = er.mean_loss;
    j["train_accuracy"] = er.train_accuracy;
    out << j.dump() << '\n';
  }
}

std::vector<ItemPrediction> score_items(const Model& model, std::span<const McqItem> items,
                                        const EmbeddingStore* store) {
  if (!model.encoder) {
    if (store == nullptr) fail(ErrorKind::kConfig, "precomputed backend requires an embedding store");
    if (store->dim() != model.dim()) {
      fail(ErrorKind::kDimensionMismatch, "checkpoint d=" + std::to_string(model.dim()) +
                                              " but embedding store d=" + std::to_string(store->dim()));
    }
  }
  std::vector<ItemPrediction> out;
  out.reserve(items.size());
  for (const auto& item : items) {
    const auto enc = encode_item(model, store, item);
    ItemPrediction p{item.id, item.level, item.label, 'A', {}, {}};
    for (const auto& opt : item.options) p.letters.push_back(opt.letter);
    p.scores = score_candidates(model.ars, enc.question, enc.options);
    p.predicted = p.letters[argmax_logit(p.scores)];
    out.push_back(std::move(p));
  }
  return out;
}

EvalReport evaluate(const Checkpoint& checkpoint, std::span<const McqItem> items,
                    const EmbeddingStore* store) {
  for (const auto& item : items) item.validate(true);
  EvalReport report;
  report.items = score_items(checkpoint.model, items, store);
  for (const auto& p : report.items) {
    const bool hit = p.predicted == *p.label;
    auto& lvl = report.per_level[p.level];
    ++lvl.total;
    ++report.total;
    if (hit) {
      ++lvl.correct;
      ++report.correct;
    }
  }
  report.accuracy = report.total == 0
                        ? 0.0
                        : static_cast<double>(report.correct) / static_cast<double>(report.total);
  return report;
}

std::string format_eval_table(const EvalReport& report) {
  std::ostringstream os;
  os << std::left << std::setw(14) << "level" << std::right << std::setw(8) << "correct"
     << std::setw(8) << "total" << std::setw(10) << "accuracy" << '\n';
  auto row = [&](std::string_view name, std::size_t c, std::size_t t, double acc) {
    os << std::left << std::setw(14) << name << std::right << std::setw(8) << c << std::setw(8) << t
       << std::setw(9) << std::fixed << std::setprecision(2) << acc * 100.0 << "%\n";
  };
  for (const auto& [level, acc] : report.per_level) {
    row(to_string(level), acc.correct, acc.total, acc.accuracy());
  }
  row("overall", report.correct, report.total, report.accuracy);
  return os.str();
}

std::string eval_report_json(const EvalReport& report) {
  nlohmann::ordered_json j;
  j["accuracy"] = report.accuracy;
  j["correct"] = report.correct;
  j["total"] = report.total;
  nlohmann::ordered_json levels = nlohmann::ordered_json::object();
  for (const auto& [level, acc] : report.per_level) {
    levels[std::string(to_string(level))] = {
        {"correct", acc.correct}, {"total", acc.total}, {"accuracy", acc.accuracy()}};
  }
  j["per_level"] = std::move(levels);
  nlohmann::ordered_json items = nlohmann::ordered_json::array();
  for (const auto& p : report.items) {
    nlohmann::ordered_json it;
    it["id"] = p.id;
    it["level"] = std::string(to_string(p.level));
    it["label"] = p.label ? std::string(1, *p.label) : std::string();
    it["predicted"] = std::string(1, p.predicted);
    nlohmann::ordered_json scores = nlohmann::ordered_json::object();
    for (std::size_t o = 0; o < p.letters.size(); ++o) {
      scores[std::string(1, p.letters[o])] = {{"logit", p.scores[o].logit},
                                              {"score", p.scores[o].score}};
    }
    it["scores"] = std::move(scores);
    items.push_back(std::move(it));
  }
  j["items"] = std::move(items);
  return j.dump(2);
}

void write_predictions_csv(std::span<const ItemPrediction> predictions, std::ostream& out) {
  out << "id,prediction";
  for (char l = 'A'; l <= 'F'; ++l) out << ",score_" << l;
  out << '\n';
  for (const auto& p : predictions) {
    std::string id = p.id;
    if (id.find_first_of(",\"\n\r") != std::string::npos) {
      std::string quoted = "\"";
      for (char ch : id) {
        if (ch == '"') quoted += '"';
        quoted += ch;
      }
      id = quoted + "\"";
    }
    out << id << ',' << p.predicted;
    for (char l = 'A'; l <= 'F'; ++l) {
      out << ',';
      for (std::size_t o = 0; o < p.letters.size(); ++o) {
        if (p.letters[o] == l) out << format_double(p.scores[o].score);
      }
    }
    out << '\n';
  }
}

void predict(const Checkpoint& checkpoint, std::span<const McqItem> items,
             const std::filesystem::path& output, const EmbeddingStore* store) {
  for (const auto& item : items) item.validate(false);
  const auto predictions = score_items(checkpoint.model, items, store);
  if (output.has_parent_path()) std::filesystem::create_directories(output.parent_path());
  std::ofstream out(output, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::kIo, "cannot write predictions to " + output.string());
  write_predictions_csv(predictions, out);
  if (!out) fail(ErrorKind::kIo, "write failed for " + output.string());
}

}  // namespace arsrank
