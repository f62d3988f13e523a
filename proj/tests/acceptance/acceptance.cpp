// Copyright 2026 The arsrank Authors
// SPDX-License-Identifier: Apache-2.0

// Acceptance suite: one PASS/FAIL/SKIP line per criterion. Exit status is
// nonzero when any criterion fails.
//
// AC-8 reads the official training file from $ARSRANK_QIAS_TRAIN.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "arsrank/checkpoint.hpp"
#include "arsrank/errors.hpp"
#include "arsrank/gradcheck.hpp"
#include "arsrank/optimizer.hpp"
#include "arsrank/trainer.hpp"

using namespace arsrank;

namespace {

enum class Verdict { kPass, kFail, kSkip };

int failures = 0;

void report(const char* id, Verdict v, const std::string& detail) {
  const char* tag = v == Verdict::kPass ? "PASS" : v == Verdict::kFail ? "FAIL" : "SKIP";
  if (v == Verdict::kFail) ++failures;
  std::printf("%s %s  %s\n", id, tag, detail.c_str());
  std::fflush(stdout);
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void ac1() {
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0;
  std::string where;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    GradcheckConfig cfg;
    cfg.seed = seed;
    cfg.embed_dim = 4;
    cfg.latent_dim = 4;
    cfg.batch_size = 2;
    const auto r = gradcheck(cfg);
    if (r.max_rel_error > worst) {
      worst = r.max_rel_error;
      where = fmt("seed %llu %s[%zu]", static_cast<unsigned long long>(seed),
                  r.worst_parameter.c_str(), r.worst_index);
    }
  }
  const double secs = seconds_since(t0);
  const bool ok = worst < 1e-4 && secs < 30.0;
  report("AC-1", ok ? Verdict::kPass : Verdict::kFail,
         fmt("gradient fidelity: max relative error %.3e (%s) over 20 seeds, limit 1e-4; %.2f s, limit 30 s",
             worst, where.c_str(), secs));
}

void ac2() {
  std::vector<double> e(3, 0.0);
  e[0] = 1.0;
  const Embedding u(e);
  const std::vector<Embedding> q = {u}, p = {u};
  const std::vector<std::vector<Embedding>> n = {std::vector<Embedding>(5, u)};
  const double cons = contrastive_loss(q, p, n, Temperature{}).value;
  const double cons_err = std::abs(cons - std::log(6.0));

  const std::vector<double> half = {0.5};
  const double dyn = dynamic_loss(half, half).value;
  const double dyn_err = std::abs(dyn - 2.0 * std::numbers::ln2);

  const std::vector<double> cp = {1.25, 1.25, 1.25}, cn = {-0.3, -0.3};
  const double reg = reg_loss(cp, cn).value;

  const LossComponent one{1.0, {}};
  const double total = total_loss(one, one, one, LossWeights{}).value;
  const double total_err = std::abs(total - 1.0);

  const bool ok = cons_err <= 1e-9 && dyn_err <= 1e-12 && reg == 0.0 && total_err <= 1e-12;
  report("AC-2", ok ? Verdict::kPass : Verdict::kFail,
         fmt("loss identities: |cons - ln 6| = %.3e (<= 1e-9) %s; |dyn - 2 ln 2| = %.3e (<= 1e-12) %s; "
             "reg(const) = %g (== 0) %s; |total - 1| = %.3e (<= 1e-12) %s",
             cons_err, cons_err <= 1e-9 ? "ok" : "VIOLATED", dyn_err, dyn_err <= 1e-12 ? "ok" : "VIOLATED",
             reg, reg == 0.0 ? "ok" : "VIOLATED", total_err, total_err <= 1e-12 ? "ok" : "VIOLATED"));
}

void ac3() {
  const auto train_items = synthesize_toy_dataset(500, 1);
  const auto heldout = synthesize_toy_dataset(100, 2);
  TrainConfig cfg;
  cfg.seed = 3;
  cfg.epochs = 20;
  cfg.batch_size = 500;
  cfg.lr = 3e-3;
  const auto t0 = std::chrono::steady_clock::now();
  const auto result = train(cfg, train_items);
  const double secs = seconds_since(t0);
  const auto eval = evaluate(result.checkpoint, heldout);
  const bool decreasing = result.epochs[1].mean_loss < result.epochs[0].mean_loss;
  const bool ok = eval.accuracy >= 0.95 && secs < 300.0 && decreasing;
  report("AC-3", ok ? Verdict::kPass : Verdict::kFail,
         fmt("synthetic learnability: held-out accuracy %.3f (>= 0.95) after %zu epochs, "
             "train %.1f s (< 300 s), epoch loss %.6f -> %.6f (%s), final train accuracy %.3f",
             eval.accuracy, result.epochs.size(), secs, result.epochs[0].mean_loss,
             result.epochs[1].mean_loss, decreasing ? "decreasing" : "NOT decreasing",
             result.epochs.back().train_accuracy));
}

void ac4() {
  const auto items = synthesize_toy_dataset(64, 5);
  TrainConfig cfg;
  cfg.seed = 17;
  cfg.epochs = 2;
  auto run = [&] {
    const auto r = train(cfg, items);
    std::ostringstream metrics;
    write_metrics_jsonl(r, metrics);
    return std::pair{serialize_checkpoint(r.checkpoint), metrics.str()};
  };
  const auto a = run();
  const auto b = run();
  const bool ok = a.first == b.first && a.second == b.second && !a.second.empty();
  report("AC-4", ok ? Verdict::kPass : Verdict::kFail,
         fmt("determinism: checkpoints %s (%zu bytes), metric logs %s (%zu bytes)",
             a.first == b.first ? "identical" : "DIFFER", a.first.size(),
             a.second == b.second ? "identical" : "DIFFER", a.second.size()));
}

void ac5() {
  double worst_post = 0.0;
  double largest_pre = 0.0;
  // Batches from a model whose head weights are blown up to produce huge gradients.
  const auto items = synthesize_toy_dataset(32, 6);
  TrainConfig cfg;
  cfg.vocab_size = 4096;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    cfg.seed = seed;
    Model m = init_model(cfg);
    Rng rng(seed, "adversarial");
    const double scale = std::pow(10.0, 1.0 + static_cast<double>(seed));
    for (auto& x : m.ars.w_att) x = rng.uniform(-1.0, 1.0) * scale;
    for (auto& x : m.ars.w_q.values()) x *= scale;
    m.temperature = Temperature::from_tau(1e-3);
    const auto batches = make_batches(items, 32, seed);
    const auto neg = sample_dynamic_negatives(items, batches[0], rng);
    auto obj = batch_objective(m, items, batches[0], neg, cfg.weights);
    largest_pre = std::max(largest_pre, clip_global_norm(obj.grads, 0.5));
    worst_post = std::max(worst_post, obj.grads.global_norm());
  }
  // Synthetic gradient sets spanning many orders of magnitude.
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    Rng rng(seed, "adversarial-sets");
    GradientSet g;
    for (int t = 0; t < 5; ++t) {
      auto v = g.get_or_add("g" + std::to_string(t), 1 + rng.below(1000));
      const double mag = std::pow(10.0, rng.uniform(0.0, 300.0));
      for (auto& x : v) x = rng.uniform(-1.0, 1.0) * mag;
    }
    largest_pre = std::max(largest_pre, clip_global_norm(g, 0.5));
    double ss = 0.0;
    for (const auto& [name, v] : g)
      for (double x : v) ss += x * x;
    worst_post = std::max(worst_post, std::sqrt(ss));
  }
  const bool clip_ok = worst_post <= 0.5 + 1e-9;

  ScheduleConfig sched{1000, 0.1, 1e-4, 0.0};
  const std::size_t w = sched.warmup_steps();
  const double at_warm = lr_at(w, sched);
  const double at_mid = lr_at(w + (sched.total_steps - w) / 2, sched);
  const double at_end = lr_at(sched.total_steps, sched);
  const double e1 = std::abs(at_warm - 1e-4), e2 = std::abs(at_mid - 5e-5), e3 = std::abs(at_end - 0.0);
  const bool sched_ok = e1 <= 1e-12 && e2 <= 1e-12 && e3 <= 1e-12;
  report("AC-5", clip_ok && sched_ok ? Verdict::kPass : Verdict::kFail,
         fmt("clipping and schedule: max post-clip norm %.17g (<= 0.5 + 1e-9; largest pre-clip %.3e); "
             "lr at warmup end %.3e, decay midpoint %.3e, final %.3e (errors %.1e %.1e %.1e, <= 1e-12)",
             worst_post, largest_pre, at_warm, at_mid, at_end, e1, e2, e3));
}

void ac6() {
  std::size_t checked = 0, mismatches = 0, ties = 0, tie_errors = 0;
  Rng rng(0, "ranking");
  TrainConfig cfg;
  cfg.vocab_size = 4096;
  cfg.latent_dim = 16;
  cfg.embed_dim = 8;
  Model m = init_model(cfg);
  for (auto& x : m.ars.w_att) x = rng.uniform(-3.0, 3.0);
  const auto items = synthesize_toy_dataset(500, 8);
  for (const auto& p : score_items(m, items)) {
    ++checked;
    if (argmax_logit(p.scores) != argmax_score(p.scores)) ++mismatches;
  }
  // Quantized logits force exact ties.
  for (int i = 0; i < 500; ++i) {
    std::vector<CandidateScore> s(2 + rng.below(5));
    for (auto& c : s) {
      c.logit = 0.5 * static_cast<double>(rng.below(3));
      c.score = stable_sigmoid(c.logit);
    }
    ++checked;
    const auto a = argmax_logit(s);
    if (a != argmax_score(s)) ++mismatches;
    std::size_t first = 0;
    for (std::size_t k = 1; k < s.size(); ++k)
      if (s[k].logit > s[first].logit) first = k;
    bool tied = false;
    for (std::size_t k = first + 1; k < s.size(); ++k) tied |= s[k].logit == s[first].logit;
    if (tied) ++ties;
    if (a != first) ++tie_errors;
  }
  const bool ok = mismatches == 0 && tie_errors == 0 && checked == 1000;
  report("AC-6", ok ? Verdict::kPass : Verdict::kFail,
         fmt("ranking invariance: %zu items, %zu score/logit argmax mismatches, %zu tie cases, "
             "%zu not resolved to earliest letter",
             checked, mismatches, ties, tie_errors));
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void ac7() {
  const auto dir = std::filesystem::temp_directory_path() / "arsrank_acceptance_ac7";
  std::filesystem::remove_all(dir);
  TrainConfig cfg;
  cfg.seed = 4;
  cfg.epochs = 2;
  const auto ckpt = train(cfg, synthesize_toy_dataset(64, 9)).checkpoint;
  const auto probe = synthesize_toy_dataset(50, 10);
  save_checkpoint(ckpt, dir / "model.ckpt");
  const auto loaded = load_checkpoint(dir / "model.ckpt");

  const auto a = score_items(ckpt.model, probe);
  const auto b = score_items(loaded.model, probe);
  std::size_t differing = 0, total = 0;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t k = 0; k < a[i].scores.size(); ++k) {
      ++total;
      differing += a[i].scores[k].score != b[i].scores[k].score ||
                   a[i].scores[k].logit != b[i].scores[k].logit;
    }
  predict(ckpt, probe, dir / "before.csv");
  predict(loaded, probe, dir / "after.csv");
  const bool csv_same = slurp(dir / "before.csv") == slurp(dir / "after.csv");

  std::string bytes = slurp(dir / "model.ckpt");
  std::size_t rejected = 0;
  const std::size_t trials = 16;
  for (std::size_t t = 0; t < trials; ++t) {
    std::string corrupt = bytes;
    const std::size_t pos = 16 + (t * 2654435761u) % (corrupt.size() - 16);
    corrupt[pos] = static_cast<char>(corrupt[pos] ^ 0x10);
    std::ofstream(dir / "corrupt.ckpt", std::ios::binary) << corrupt;
    try {
      load_checkpoint(dir / "corrupt.ckpt");
    } catch (const Error& e) {
      rejected += e.kind() == ErrorKind::kChecksumMismatch;
    }
  }
  std::filesystem::remove_all(dir);
  const bool ok = differing == 0 && csv_same && rejected == trials;
  report("AC-7", ok ? Verdict::kPass : Verdict::kFail,
         fmt("persistence: %zu/%zu probe scores differ after save/load, prediction CSV %s, "
             "%zu/%zu corrupted files rejected by checksum",
             differing, total, csv_same ? "identical" : "DIFFERS", rejected, trials));
}

void ac8() {
  const char* path = std::getenv("ARSRANK_QIAS_TRAIN");
  if (path == nullptr || *path == '\0') {
    report("AC-8", Verdict::kSkip, "official training file not supplied (set ARSRANK_QIAS_TRAIN)");
    return;
  }
  try {
    const auto c = count_levels(load_dataset(path));
    const bool ok = c.beginner == 5095 && c.intermediate == 3431 && c.advanced == 920 && c.total() == 9446;
    report("AC-8", ok ? Verdict::kPass : Verdict::kFail,
           fmt("level counts %zu / %zu / %zu (total %zu), expected 5095 / 3431 / 920 (9446)",
               c.beginner, c.intermediate, c.advanced, c.total()));
  } catch (const Error& e) {
    report("AC-8", Verdict::kFail, std::string("could not load ") + path + ": " + e.what());
  }
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, void (*)()>> criteria = {
      {"AC-1", ac1}, {"AC-2", ac2}, {"AC-3", ac3}, {"AC-4", ac4},
      {"AC-5", ac5}, {"AC-6", ac6}, {"AC-7", ac7}, {"AC-8", ac8}};
  for (const auto& [id, fn] : criteria) {
    try {
      fn();
    } catch (const std::exception& e) {
      report(id, Verdict::kFail, std::string("exception: ") + e.what());
    }
  }
  return failures == 0 ? 0 : 1;
}
