// Copyright 2026 The advsum Authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef ADVSUM_TESTS_TRAIN_FIXTURES_HPP_
#define ADVSUM_TESTS_TRAIN_FIXTURES_HPP_

#include <cmath>
#include <vector>

#include "advsum/ops.hpp"
#include "advsum/training.hpp"

namespace advsum::testing {

// A small synthetic world with tiny model dimensions.
struct World {
  text::Vocabulary vocab;
  std::vector<text::Example> train;
  std::vector<text::Example> valid;
  train::TrainingConfig config;
};

inline World tiny_world(std::uint64_t seed, std::size_t n_train = 24, std::size_t n_valid = 8) {
  text::SyntheticSpec spec;
  spec.content_size = 30;
  spec.salient_size = 8;
  spec.synonym_count = 4;
  spec.src_len_min = 6;
  spec.src_len_max = 10;
  spec.salient_min = 2;
  spec.salient_max = 3;
  auto tr = text::make_synthetic(derive_seed(seed, 1), n_train, spec, text::Split::kTrain);
  auto va = text::make_synthetic(derive_seed(seed, 2), n_valid, spec, text::Split::kValid);
  World w{text::Vocabulary::build(tr, 1000), {}, {}, {}};
  w.train = text::encode_corpus(tr, w.vocab, {50, 12});
  w.valid = text::encode_corpus(va, w.vocab, {50, 12});
  auto& c = w.config;
  c.seed = seed;
  c.gen_dims = {0, 6, 6, 8, 6, 8};
  c.disc_dims.emb = 6;
  c.disc_dims.widths = {2, 3};
  c.disc_dims.filters = 4;
  c.batch_size_g = 4;
  c.batch_size_d = 4;
  c.max_tgt_len = 6;
  c.pretrain_g_steps = 0;
  c.pretrain_d_steps = 0;
  c.rounds = 0;
  return w;
}

inline train::Batch batch_of(const std::vector<text::Example>& data, std::size_t n) {
  train::Batch b;
  for (std::size_t i = 0; i < n; ++i) b.push_back(&data[i % data.size()]);
  return b;
}

// Result of the constant-reward score-function check on a single-step,
// two-action policy: the mean policy-gradient over `samples` draws and the
// three-sigma bound on its norm.
struct ScoreFunctionCheck {
  double mean_grad_norm = 0.0;
  double bound = 0.0;
  double p = 0.0;  // probability of the first action
  bool other_grads_zero = true;
  std::size_t samples = 0;
};

// The generator is pinned to a two-token softmax: p_gen saturates at 1 and
// the output layer reduces to its bias, which is -1000 everywhere except on
// the two actions. The discriminator is all zeros, so every reward is 0.5.
inline ScoreFunctionCheck score_function_check(std::size_t samples, std::uint64_t seed) {
  text::Corpus c{text::Split::kTrain, {{{"a", "b"}, {"a"}}}};
  auto vocab = text::Vocabulary::build(c, 100);
  auto ex = text::encode_example({"a", "b"}, {"a"}, vocab);
  const int a = vocab.id("a"), b = vocab.id("b");

  gen::GeneratorParams g({vocab.size(), 2, 2, 2, 2, 2}, seed);
  for (const char* name : {"out.V", "out.b", "out.V2"}) {
    for (double& v : g.params().at(name).mutable_data()) v = 0.0;
  }
  g.params().at("ptr.b").mutable_data()[0] = 1000.0;
  auto b2 = g.params().at("out.b2").mutable_data();
  for (double& v : b2) v = -1000.0;
  b2[static_cast<std::size_t>(a)] = 0.3;
  b2[static_cast<std::size_t>(b)] = -0.4;
  const double p = 1.0 / (1.0 + std::exp(-0.7));

  disc::DiscriminatorDims dd;
  dd.vocab_size = vocab.size();
  dd.emb = 2;
  dd.widths = {1, 2};
  dd.filters = 2;
  auto d = disc::DiscriminatorParams::zeros(dd);

  constexpr std::size_t kChunk = 500;
  Rng rng(derive_seed(seed, 7));
  std::size_t drawn = 0;
  g.params().zero_grad();
  while (drawn < samples) {
    const std::size_t n = std::min(kChunk, samples - drawn);
    train::Batch batch(n, &ex);
    auto s = train::draw_pg_samples(batch, g, d, 1, rng);
    ad::Tape tape;
    // Scaled so the accumulated gradient is the mean over all draws.
    auto surrogate = ad::scalar_mul(train::pg_surrogate(s, g, 0.0),
                                    static_cast<double>(n) / static_cast<double>(samples));
    ad::backward(surrogate);
    drawn += n;
  }
  ScoreFunctionCheck out;
  out.samples = drawn;
  out.p = p;
  double sq = 0.0;
  for (const auto& [name, t] : g.params()) {
    if (!t.has_grad()) continue;
    const auto grad = t.grad();
    for (std::size_t i = 0; i < grad.size(); ++i) {
      const double v = grad[i];
      sq += v * v;
      const bool action = name == "out.b2" && (static_cast<int>(i) == a || static_cast<int>(i) == b);
      if (!action && v != 0.0) out.other_grads_zero = false;
    }
  }
  out.mean_grad_norm = std::sqrt(sq);
  const double sigma = 0.5 * std::sqrt(p * (1 - p) / static_cast<double>(drawn));
  out.bound = 3.0 * std::sqrt(2.0) * sigma;
  return out;
}

}  // namespace advsum::testing

#endif  // ADVSUM_TESTS_TRAIN_FIXTURES_HPP_
