// Copyright 2026 The advsum Authors.
// SPDX-License-Identifier: Apache-2.0

#include "advsum/training.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <thread>

#include "advsum/ops.hpp"
#include "advsum/params.hpp"

namespace advsum::train {

using ad::Tensor;

namespace {

std::optional<double> clip_of(const TrainingConfig& c) {
  if (c.clip_norm > 0) return c.clip_norm;
  return std::nullopt;
}

void require_finite(double v, const std::string& where) {
  if (!std::isfinite(v)) throw NumericError(where + ": non-finite value");
}

void check_grads(const ad::ParamSet& params, const std::string& where) {
  require_finite(ad::grad_norm(params), where + " gradient");
}

Batch gather(std::span<const text::Example> data, const std::vector<std::size_t>& idx) {
  Batch b;
  b.reserve(idx.size());
  for (std::size_t i : idx) b.push_back(&data[i]);
  return b;
}

std::string where(const char* phase, long step) {
  return std::string(phase) + " step " + std::to_string(step);
}

void maybe_checkpoint(const CheckpointFn& fn, const TrainingConfig& config, const char* phase,
                      long step, int local_step) {
  if (fn && config.checkpoint_interval > 0 && local_step % config.checkpoint_interval == 0) {
    fn(phase, step);
  }
}

}  // namespace

void TrainingConfig::validate() const {
  auto fail = [](const std::string& m) { throw ContractError("training config: " + m); };
  if (!(beta >= 0.0 && beta <= 1.0)) fail("beta must lie in [0, 1]");
  if (!(lr_g > 0.0) || !(lr_d > 0.0)) fail("learning rates must be positive");
  if (!(clip_norm >= 0.0)) fail("clip_norm must be non-negative");
  if (pretrain_g_steps < 0 || pretrain_d_steps < 0 || rounds < 0 || g_steps < 0 || d_steps < 0 ||
      checkpoint_interval < 0) {
    fail("step counts must be non-negative");
  }
  if (batch_size_g < 1 || batch_size_d < 1) fail("batch sizes must be positive");
  if (max_tgt_len < 1) fail("max_tgt_len must be positive");
  if (baseline == Baseline::kMovingAverage && !(baseline_decay > 0.0 && baseline_decay < 1.0)) {
    fail("baseline_decay must lie in (0, 1)");
  }
  if (threads < 1) fail("threads must be positive");
}

gen::GeneratorParams init_generator(const TrainingConfig& config, int vocab_size) {
  auto dims = config.gen_dims;
  dims.vocab_size = vocab_size;
  return gen::GeneratorParams(dims, derive_seed(config.seed, kStreamGenInit));
}

disc::DiscriminatorParams init_discriminator(const TrainingConfig& config, int vocab_size) {
  auto dims = config.disc_dims;
  dims.vocab_size = vocab_size;
  return disc::DiscriminatorParams(dims, derive_seed(config.seed, kStreamDiscInit));
}

void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(std::max(threads, 1)), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < n; i += workers) fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

BatchSampler::BatchSampler(std::size_t n, std::size_t batch_size, Rng& rng)
    : batch_size_(batch_size), rng_(rng), order_(n), pos_(n) {
  if (n == 0) throw ContractError("BatchSampler: empty dataset");
  if (batch_size == 0) throw ContractError("BatchSampler: batch size must be positive");
}

std::vector<std::size_t> BatchSampler::next() {
  std::vector<std::size_t> out;
  out.reserve(batch_size_);
  while (out.size() < batch_size_) {
    if (pos_ == order_.size()) {
      for (std::size_t i = 0; i < order_.size(); ++i) order_[i] = i;
      rng_.shuffle(order_);
      pos_ = 0;
    }
    out.push_back(order_[pos_++]);
  }
  return out;
}

TrainLog::TrainLog(const std::filesystem::path& csv_path) : path_(csv_path) {
  std::ofstream out(path_, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path_.string() + " for writing");
  out << kLogHeader << "\n";
}

std::string TrainLog::format_row(const LogRecord& r) {
  auto cell = [](const std::optional<double>& v) -> std::string {
    if (!v) return "";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.9g", *v);
    return buf;
  };
  return std::to_string(r.step) + "," + r.phase + "," + cell(r.j_ml) + "," + cell(r.j_pg) + "," +
         cell(r.mean_reward) + "," + cell(r.d_loss) + "," + cell(r.d_acc) + "," +
         cell(r.rouge1) + "," + cell(r.rouge2) + "," + cell(r.rougeL);
}

void TrainLog::add(LogRecord record) {
  if (record.step <= last_step_) {
    throw ContractError("TrainLog: step " + std::to_string(record.step) + " after " +
                        std::to_string(last_step_));
  }
  last_step_ = record.step;
  if (!path_.empty()) {
    std::ofstream out(path_, std::ios::binary | std::ios::app);
    if (!out) throw std::runtime_error("cannot append to " + path_.string());
    out << format_row(record) << "\n";
  }
  records_.push_back(std::move(record));
}

std::string TrainLog::to_csv() const {
  std::string s = std::string(kLogHeader) + "\n";
  for (const auto& r : records_) s += format_row(r) + "\n";
  return s;
}

Tensor batch_mle_loss(const Batch& batch, const gen::GeneratorParams& gen) {
  if (batch.empty()) throw ContractError("batch_mle_loss: empty batch");
  std::vector<Tensor> losses;
  losses.reserve(batch.size());
  for (const auto* ex : batch) losses.push_back(gen::mle_loss(*ex, gen));
  return ad::mean(ad::concat(losses));
}

double corpus_nll(std::span<const text::Example> examples, const gen::GeneratorParams& gen) {
  if (examples.empty()) throw ContractError("corpus_nll: empty corpus");
  ad::NoGradGuard guard;
  double total = 0.0;
  std::size_t tokens = 0;
  for (const auto& ex : examples) {
    const std::size_t t = ex.summary_ext_ids.size() + 1;
    total += gen::mle_loss(ex, gen).item() * static_cast<double>(t);
    tokens += t;
  }
  return total / static_cast<double>(tokens);
}

void pretrain_generator(std::span<const text::Example> train, gen::GeneratorParams& gen,
                        const TrainingConfig& config, TrainLog& log,
                        const CheckpointFn& checkpoint) {
  config.validate();
  if (train.empty()) throw ContractError("pretrain_generator: empty training corpus");
  Rng rng(derive_seed(config.seed, kStreamPretrainG));
  BatchSampler sampler(train.size(), static_cast<std::size_t>(config.batch_size_g), rng);
  for (int k = 1; k <= config.pretrain_g_steps; ++k) {
    const long step = log.next_step();
    const Batch batch = gather(train, sampler.next());
    ad::Tape tape;
    Tensor loss = batch_mle_loss(batch, gen);
    require_finite(loss.item(), where("pretrain_g", step));
    ad::backward(loss);
    check_grads(gen.params(), where("pretrain_g", step));
    ad::sgd_step(gen.params(), config.lr_g, clip_of(config));
    LogRecord rec;
    rec.step = step;
    rec.phase = "pretrain_g";
    rec.j_ml = loss.item();
    log.add(std::move(rec));
    maybe_checkpoint(checkpoint, config, "pretrain_g", step, k);
  }
}

namespace {

// One fresh sample per example; seeds drawn from rng in batch order.
std::vector<gen::SummaryHypothesis> sample_batch(const Batch& batch,
                                                 const gen::GeneratorParams& gen,
                                                 std::size_t max_len, Rng& rng, int threads) {
  std::vector<std::uint64_t> seeds(batch.size());
  for (auto& s : seeds) s = rng.next();
  std::vector<gen::SummaryHypothesis> out(batch.size());
  parallel_for(batch.size(), threads, [&](std::size_t i) {
    Rng local(seeds[i]);
    out[i] = gen::sample_summary(*batch[i], gen, max_len, local);
  });
  return out;
}

disc::LabeledSummary gold_labeled(const text::Example& ex) {
  return disc::make_labeled(gen::gold_targets(ex), ex.vocab_size, disc::Label::kOriginal);
}

}  // namespace

DStepStats discriminator_step(const Batch& batch, const gen::GeneratorParams& gen,
                              disc::DiscriminatorParams& disc, const TrainingConfig& config,
                              Rng& rng) {
  const auto samples = sample_batch(batch, gen, config.max_tgt_len, rng, config.threads);
  std::vector<disc::LabeledSummary> pos, neg, all;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    pos.push_back(gold_labeled(*batch[i]));
    neg.push_back(
        disc::make_labeled(samples[i].tokens, batch[i]->vocab_size, disc::Label::kGenerated));
  }
  all = pos;
  all.insert(all.end(), neg.begin(), neg.end());
  DStepStats stats;
  stats.accuracy = disc::d_accuracy(all, disc);
  ad::Tape tape;
  Tensor loss = disc::d_loss(pos, neg, disc);
  stats.loss = loss.item();
  require_finite(stats.loss, "discriminator loss");
  ad::backward(loss);
  check_grads(disc.params(), "discriminator");
  ad::sgd_step(disc.params(), config.lr_d, clip_of(config));
  return stats;
}

void pretrain_discriminator(std::span<const text::Example> train,
                            const gen::GeneratorParams& gen, disc::DiscriminatorParams& disc,
                            const TrainingConfig& config, TrainLog& log,
                            const CheckpointFn& checkpoint) {
  config.validate();
  if (train.empty()) throw ContractError("pretrain_discriminator: empty training corpus");
  Rng rng(derive_seed(config.seed, kStreamPretrainD));
  BatchSampler sampler(train.size(), static_cast<std::size_t>(config.batch_size_d), rng);
  for (int k = 1; k <= config.pretrain_d_steps; ++k) {
    const long step = log.next_step();
    const Batch batch = gather(train, sampler.next());
    const auto stats = discriminator_step(batch, gen, disc, config, rng);
    LogRecord rec;
    rec.step = step;
    rec.phase = "pretrain_d";
    rec.d_loss = stats.loss;
    rec.d_acc = stats.accuracy;
    log.add(std::move(rec));
    maybe_checkpoint(checkpoint, config, "pretrain_d", step, k);
  }
}

double discriminator_accuracy(std::span<const text::Example> examples,
                              const gen::GeneratorParams& gen,
                              const disc::DiscriminatorParams& disc, std::size_t max_len,
                              std::uint64_t seed, int threads) {
  if (examples.empty()) throw ContractError("discriminator_accuracy: no examples");
  Batch batch;
  for (const auto& ex : examples) batch.push_back(&ex);
  Rng rng(seed);
  const auto samples = sample_batch(batch, gen, max_len, rng, threads);
  std::vector<char> correct(2 * batch.size(), 0);
  parallel_for(batch.size(), threads, [&](std::size_t i) {
    const auto pos = gold_labeled(*batch[i]);
    const auto neg =
        disc::make_labeled(samples[i].tokens, batch[i]->vocab_size, disc::Label::kGenerated);
    correct[2 * i] = disc::d_probability(pos.ids, disc) > 0.5;
    correct[2 * i + 1] = !(disc::d_probability(neg.ids, disc) > 0.5);
  });
  const auto hits = std::count(correct.begin(), correct.end(), 1);
  return static_cast<double>(hits) / static_cast<double>(correct.size());
}

std::vector<PGSample> draw_pg_samples(const Batch& batch, const gen::GeneratorParams& gen,
                                      const disc::DiscriminatorParams& disc,
                                      std::size_t max_len, Rng& rng, int threads) {
  const auto hyps = sample_batch(batch, gen, max_len, rng, threads);
  std::vector<PGSample> out(batch.size());
  parallel_for(batch.size(), threads, [&](std::size_t i) {
    out[i].example = batch[i];
    out[i].tokens = hyps[i].tokens;
    const auto labeled =
        disc::make_labeled(hyps[i].tokens, batch[i]->vocab_size, disc::Label::kGenerated);
    out[i].reward = disc::d_probability(labeled.ids, disc);
  });
  return out;
}

Tensor pg_surrogate(std::vector<PGSample>& samples, const gen::GeneratorParams& gen,
                    double baseline) {
  if (samples.empty()) throw ContractError("pg_surrogate: empty batch");
  std::vector<Tensor> terms;
  terms.reserve(samples.size());
  for (auto& s : samples) {
    if (s.tokens.empty()) throw ContractError("pg_surrogate: empty sample");
    s.log_probs = gen::target_log_probs(*s.example, gen, s.tokens);
    const double weight = (s.reward - baseline) / static_cast<double>(s.length());
    terms.push_back(ad::scalar_mul(ad::sum(ad::concat(s.log_probs)), weight));
  }
  return ad::mean(ad::concat(terms));
}

double PGBaseline::value(double batch_mean_reward) const {
  if (kind_ == Baseline::kNone) return 0.0;
  return initialized_ ? current_ : batch_mean_reward;
}

void PGBaseline::update(double batch_mean_reward) {
  if (kind_ == Baseline::kNone) return;
  if (!initialized_) {
    current_ = batch_mean_reward;
    initialized_ = true;
    return;
  }
  current_ = decay_ * current_ + (1.0 - decay_) * batch_mean_reward;
}

Tensor combine_objective(const std::optional<Tensor>& surrogate, const std::optional<Tensor>& mle,
                         double beta) {
  if (beta == 0.0) {
    if (!mle) throw ContractError("combine_objective: beta = 0 needs the MLE term");
    return *mle;
  }
  if (!surrogate) throw ContractError("combine_objective: beta > 0 needs the surrogate");
  Tensor pg = ad::scalar_mul(*surrogate, -beta);
  if (beta == 1.0) return pg;
  if (!mle) throw ContractError("combine_objective: beta < 1 needs the MLE term");
  return ad::add(pg, ad::scalar_mul(*mle, 1.0 - beta));
}

namespace {

GStepStats mixed_step(const Batch& batch, gen::GeneratorParams& gen,
                      const disc::DiscriminatorParams& disc, const TrainingConfig& config,
                      double beta, Rng& rng, PGBaseline& baseline) {
  if (batch.empty()) throw ContractError("generator step: empty batch");
  GStepStats stats;
  std::vector<PGSample> samples;
  double mean_reward = 0.0;
  if (beta > 0.0) {
    samples = draw_pg_samples(batch, gen, disc, config.max_tgt_len, rng, config.threads);
    for (const auto& s : samples) mean_reward += s.reward;
    mean_reward /= static_cast<double>(samples.size());
  }
  ad::Tape tape;
  std::optional<Tensor> surrogate, mle;
  if (beta > 0.0) {
    surrogate = pg_surrogate(samples, gen, baseline.value(mean_reward));
    stats.j_pg = surrogate->item();
    stats.mean_reward = mean_reward;
  }
  if (beta < 1.0) {
    mle = batch_mle_loss(batch, gen);
    stats.j_ml = mle->item();
  }
  Tensor loss = combine_objective(surrogate, mle, beta);
  stats.loss = loss.item();
  require_finite(stats.loss, "generator objective");
  ad::backward(loss);
  check_grads(gen.params(), "generator");
  ad::sgd_step(gen.params(), config.lr_g, clip_of(config));
  if (beta > 0.0) baseline.update(mean_reward);
  return stats;
}

}  // namespace

GStepStats pg_update(const Batch& batch, gen::GeneratorParams& gen,
                     const disc::DiscriminatorParams& disc, const TrainingConfig& config,
                     Rng& rng, PGBaseline& baseline) {
  return mixed_step(batch, gen, disc, config, 1.0, rng, baseline);
}

GStepStats generator_adversarial_step(const Batch& batch, gen::GeneratorParams& gen,
                                      const disc::DiscriminatorParams& disc,
                                      const TrainingConfig& config, Rng& rng,
                                      PGBaseline& baseline) {
  return mixed_step(batch, gen, disc, config, config.beta, rng, baseline);
}

eval::EvalReport evaluate_generator(std::span<const text::Example> examples,
                                    const gen::GeneratorParams& gen,
                                    const text::Vocabulary& vocab, std::size_t max_len,
                                    std::size_t limit, int threads, const std::string& system) {
  const std::size_t n = limit > 0 ? std::min(limit, examples.size()) : examples.size();
  std::vector<text::Tokens> hyps(n), refs(n);
  parallel_for(n, threads, [&](std::size_t i) {
    const auto h = gen::greedy_decode(examples[i], gen, max_len);
    hyps[i] = text::decode_ids(h.content(), vocab, examples[i]);
    refs[i] = examples[i].summary_tokens;
  });
  return eval::evaluate_corpus(hyps, refs, system);
}

AdversarialResult adversarial_loop(std::span<const text::Example> train,
                                   std::span<const text::Example> valid,
                                   const text::Vocabulary& vocab, gen::GeneratorParams& gen,
                                   disc::DiscriminatorParams& disc, const TrainingConfig& config,
                                   TrainLog& log, const CheckpointFn& checkpoint) {
  config.validate();
  if (train.empty()) throw ContractError("adversarial_loop: empty training corpus");
  if (valid.empty()) throw ContractError("adversarial_loop: empty validation corpus");
  Rng rng(derive_seed(config.seed, kStreamAdversarial));
  BatchSampler g_sampler(train.size(), static_cast<std::size_t>(config.batch_size_g), rng);
  BatchSampler d_sampler(train.size(), static_cast<std::size_t>(config.batch_size_d), rng);
  PGBaseline baseline(config.baseline, config.baseline_decay);

  auto validate = [&](int round) {
    const auto rep = evaluate_generator(valid, gen, vocab, config.max_tgt_len,
                                        config.valid_limit, config.threads);
    LogRecord rec;
    rec.step = log.next_step();
    rec.phase = "valid";
    rec.rouge1 = rep.rouge1;
    rec.rouge2 = rep.rouge2;
    rec.rougeL = rep.rougeL;
    log.add(std::move(rec));
    return eval::RoundScore{round, rep.rouge1, rep.rouge2, rep.rougeL};
  };

  AdversarialResult result{gen.clone(), 0, {validate(0)}};
  double best = -1.0;
  int local = 0;
  for (int round = 1; round <= config.rounds; ++round) {
    for (int k = 0; k < config.g_steps; ++k) {
      const long step = log.next_step();
      GStepStats s;
      try {
        s = generator_adversarial_step(gather(train, g_sampler.next()), gen, disc, config, rng,
                                       baseline);
      } catch (const NumericError& e) {
        throw NumericError(std::string(e.what()) + " (round " + std::to_string(round) +
                           ", step " + std::to_string(step) + ")");
      }
      LogRecord rec;
      rec.step = step;
      rec.phase = "adv_g";
      rec.j_ml = s.j_ml;
      rec.j_pg = s.j_pg;
      rec.mean_reward = s.mean_reward;
      log.add(std::move(rec));
      maybe_checkpoint(checkpoint, config, "adversarial", step, ++local);
    }
    for (int k = 0; k < config.d_steps; ++k) {
      const long step = log.next_step();
      DStepStats s;
      try {
        s = discriminator_step(gather(train, d_sampler.next()), gen, disc, config, rng);
      } catch (const NumericError& e) {
        throw NumericError(std::string(e.what()) + " (round " + std::to_string(round) +
                           ", step " + std::to_string(step) + ")");
      }
      LogRecord rec;
      rec.step = step;
      rec.phase = "adv_d";
      rec.d_loss = s.loss;
      rec.d_acc = s.accuracy;
      log.add(std::move(rec));
      maybe_checkpoint(checkpoint, config, "adversarial", step, ++local);
    }
    result.rounds.push_back(validate(round));
    if (result.rounds.back().rouge1 > best) {
      best = result.rounds.back().rouge1;
      result.best = gen.clone();
      result.best_round = round;
    }
  }
  return result;
}

}  // namespace advsum::train
