// Copyright 2026 The advsum Authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef ADVSUM_TRAINING_HPP_
#define ADVSUM_TRAINING_HPP_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "advsum/discriminator.hpp"
#include "advsum/generator.hpp"
#include "advsum/report.hpp"
#include "advsum/rng.hpp"
#include "advsum/rouge.hpp"
#include "advsum/text.hpp"

namespace advsum::train {

enum class Baseline { kNone, kMovingAverage };

struct TrainingConfig {
  double beta = 0.5;
  double lr_g = 0.5;
  double lr_d = 0.1;
  double clip_norm = 5.0;  // 0 disables clipping
  int pretrain_g_steps = 1000;
  int pretrain_d_steps = 200;
  int rounds = 100;
  int g_steps = 1;
  int d_steps = 1;
  int batch_size_g = 8;
  int batch_size_d = 16;
  std::size_t max_tgt_len = 12;  // cap on sampled and decoded lengths
  Baseline baseline = Baseline::kNone;
  double baseline_decay = 0.95;
  std::size_t valid_limit = 0;  // 0 = whole validation split
  int checkpoint_interval = 0;  // steps; 0 = only at the end of a phase
  std::uint64_t seed = 1;
  int threads = 1;
  gen::GeneratorDims gen_dims;        // vocab_size filled from the vocabulary
  disc::DiscriminatorDims disc_dims;  // likewise

  void validate() const;
};

// Independent RNG streams derived from the master seed.
enum Stream : std::uint64_t {
  kStreamGenInit = 10,
  kStreamDiscInit = 11,
  kStreamPretrainG = 12,
  kStreamPretrainD = 13,
  kStreamAdversarial = 14,
};

gen::GeneratorParams init_generator(const TrainingConfig& config, int vocab_size);
disc::DiscriminatorParams init_discriminator(const TrainingConfig& config, int vocab_size);

/// Runs fn(i) for i in [0, n) on up to `threads` workers. fn must only read
/// shared state and write its own slot.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn);

/// Epoch-wise shuffled minibatches: each epoch is one Rng::shuffle of
/// 0..n-1, consumed front to back; a batch that runs past the end continues
/// into the next epoch's permutation.
class BatchSampler {
 public:
  BatchSampler(std::size_t n, std::size_t batch_size, Rng& rng);
  std::vector<std::size_t> next();

 private:
  std::size_t batch_size_;
  Rng& rng_;
  std::vector<std::size_t> order_;
  std::size_t pos_;
};

struct LogRecord {
  long step = 0;
  std::string phase;
  std::optional<double> j_ml, j_pg, mean_reward, d_loss, d_acc, rouge1, rouge2, rougeL;
};

inline constexpr const char* kLogHeader =
    "step,phase,j_ml,j_pg,mean_reward,d_loss,d_acc,rouge1,rouge2,rougeL";

/// Step indices are global across phases and strictly increasing. When a
/// path is given every record is appended to it as it arrives.
class TrainLog {
 public:
  TrainLog() = default;
  explicit TrainLog(const std::filesystem::path& csv_path);

  long next_step() const { return last_step_ + 1; }
  void add(LogRecord record);
  const std::vector<LogRecord>& records() const { return records_; }
  std::string to_csv() const;

  static std::string format_row(const LogRecord& r);

 private:
  std::vector<LogRecord> records_;
  long last_step_ = 0;
  std::filesystem::path path_;
};

/// Called with the phase name and global step whenever a checkpoint is due.
using CheckpointFn = std::function<void(const std::string& phase, long step)>;

using Batch = std::vector<const text::Example*>;

/// Mean over the batch of the per-example mle_loss.
ad::Tensor batch_mle_loss(const Batch& batch, const gen::GeneratorParams& gen);

/// Per-token NLL over a corpus, weighting examples by their target length.
double corpus_nll(std::span<const text::Example> examples, const gen::GeneratorParams& gen);

void pretrain_generator(std::span<const text::Example> train, gen::GeneratorParams& gen,
                        const TrainingConfig& config, TrainLog& log,
                        const CheckpointFn& checkpoint = {});

/// Positives are gold summaries with EOS, negatives fresh generator samples
/// for the same examples. Returns the pre-update batch loss and accuracy.
struct DStepStats {
  double loss = 0.0;
  double accuracy = 0.0;
};
DStepStats discriminator_step(const Batch& batch, const gen::GeneratorParams& gen,
                              disc::DiscriminatorParams& disc, const TrainingConfig& config,
                              Rng& rng);

void pretrain_discriminator(std::span<const text::Example> train,
                            const gen::GeneratorParams& gen, disc::DiscriminatorParams& disc,
                            const TrainingConfig& config, TrainLog& log,
                            const CheckpointFn& checkpoint = {});

/// Accuracy on gold summaries versus one fresh sample per example.
double discriminator_accuracy(std::span<const text::Example> examples,
                              const gen::GeneratorParams& gen,
                              const disc::DiscriminatorParams& disc, std::size_t max_len,
                              std::uint64_t seed, int threads = 1);

struct PGSample {
  const text::Example* example = nullptr;
  std::vector<int> tokens;            // Y_1..Y_T, ext ids
  std::vector<ad::Tensor> log_probs;  // filled by pg_surrogate
  double reward = 0.0;                // D(Y), no gradient path

  std::size_t length() const { return tokens.size(); }
};

/// One sample per example, then the reward from the discriminator. Per
/// example seeds are drawn from rng in batch order, so the result does not
/// depend on the thread count.
std::vector<PGSample> draw_pg_samples(const Batch& batch, const gen::GeneratorParams& gen,
                                      const disc::DiscriminatorParams& disc,
                                      std::size_t max_len, Rng& rng, int threads = 1);

/// mean_i (1/T_i) sum_t (R_i - b) log p(y_t | y_<t, X), recorded on the
/// active tape. Re-scores the sampled tokens with teacher forcing.
ad::Tensor pg_surrogate(std::vector<PGSample>& samples, const gen::GeneratorParams& gen,
                        double baseline);

class PGBaseline {
 public:
  PGBaseline(Baseline kind, double decay) : kind_(kind), decay_(decay) {}
  /// The baseline for a batch with the given mean reward. An unset moving
  /// average starts at the first batch mean.
  double value(double batch_mean_reward) const;
  void update(double batch_mean_reward);
  void set(double v) {
    current_ = v;
    initialized_ = true;
  }

 private:
  Baseline kind_;
  double decay_;
  bool initialized_ = false;
  double current_ = 0.0;
};

/// J = beta * J_pg + (1 - beta) * J_ml as a loss to minimize:
/// -beta * surrogate + (1 - beta) * mle. Either side may be absent when its
/// weight is zero.
ad::Tensor combine_objective(const std::optional<ad::Tensor>& surrogate,
                             const std::optional<ad::Tensor>& mle, double beta);

struct GStepStats {
  double loss = 0.0;  // value of combine_objective
  std::optional<double> j_ml, j_pg, mean_reward;
};

/// Pure policy-gradient step: backward on -surrogate, then SGD.
GStepStats pg_update(const Batch& batch, gen::GeneratorParams& gen,
                     const disc::DiscriminatorParams& disc, const TrainingConfig& config,
                     Rng& rng, PGBaseline& baseline);

/// One SGD step on the mixed objective. With beta == 0 no samples are drawn
/// and rng is untouched, so the step equals an MLE step; with beta == 1 the
/// gold summaries are not used.
GStepStats generator_adversarial_step(const Batch& batch, gen::GeneratorParams& gen,
                                      const disc::DiscriminatorParams& disc,
                                      const TrainingConfig& config, Rng& rng,
                                      PGBaseline& baseline);

/// Greedy-decodes (up to max_len tokens) and scores against the gold
/// summaries. `limit` > 0 keeps only the first `limit` examples.
eval::EvalReport evaluate_generator(std::span<const text::Example> examples,
                                    const gen::GeneratorParams& gen,
                                    const text::Vocabulary& vocab, std::size_t max_len,
                                    std::size_t limit = 0, int threads = 1,
                                    const std::string& system = "system");

struct AdversarialResult {
  gen::GeneratorParams best;
  int best_round = 0;
  std::vector<eval::RoundScore> rounds;  // entry 0 is the starting point

  double initial_rouge1() const { return rounds.front().rouge1; }
  double best_rouge1() const { return rounds[static_cast<std::size_t>(best_round)].rouge1; }
};

/// R rounds of g_steps generator steps then d_steps discriminator steps,
/// validating after each round. The best checkpoint is chosen by validation
/// ROUGE-1 among rounds 1..R (earliest on ties); with R = 0 it is the input.
AdversarialResult adversarial_loop(std::span<const text::Example> train,
                                   std::span<const text::Example> valid,
                                   const text::Vocabulary& vocab, gen::GeneratorParams& gen,
                                   disc::DiscriminatorParams& disc, const TrainingConfig& config,
                                   TrainLog& log, const CheckpointFn& checkpoint = {});

}  // namespace advsum::train

#endif  // ADVSUM_TRAINING_HPP_
