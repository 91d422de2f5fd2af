// Copyright 2026 The advsum Authors.
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "advsum/ops.hpp"
#include "advsum/params.hpp"
#include "advsum/training.hpp"
#include "train_fixtures.hpp"

using namespace advsum;
using testing::batch_of;
using testing::tiny_world;

namespace {

std::map<std::string, std::vector<double>> grads_of(const ad::ParamSet& ps) {
  std::map<std::string, std::vector<double>> out;
  for (const auto& [name, t] : ps) out[name] = t.has_grad() ? t.grad() : std::vector<double>(t.size(), 0.0);
  return out;
}

double max_abs_diff(const std::map<std::string, std::vector<double>>& a,
                    const std::map<std::string, std::vector<double>>& b) {
  double m = 0;
  for (const auto& [name, va] : a) {
    const auto& vb = b.at(name);
    for (std::size_t i = 0; i < va.size(); ++i) m = std::max(m, std::abs(va[i] - vb[i]));
  }
  return m;
}

bool all_grads_zero(const ad::ParamSet& ps) {
  for (const auto& [_, t] : ps) {
    if (!t.has_grad()) continue;
    for (double v : t.grad()) {
      if (v != 0.0) return false;
    }
  }
  return true;
}

// Trained just enough that samples are not uniform noise.
gen::GeneratorParams warm_generator(testing::World& w, int steps) {
  auto g = train::init_generator(w.config, w.vocab.size());
  auto c = w.config;
  c.pretrain_g_steps = steps;
  train::TrainLog log;
  train::pretrain_generator(w.train, g, c, log);
  return g;
}

}  // namespace

TEST_CASE("config validation") {
  train::TrainingConfig c;
  CHECK_NOTHROW(c.validate());
  auto bad = c;
  bad.beta = 1.5;
  CHECK_THROWS_AS(bad.validate(), ContractError);
  bad = c;
  bad.lr_g = 0;
  CHECK_THROWS_AS(bad.validate(), ContractError);
  bad = c;
  bad.rounds = -1;
  CHECK_THROWS_AS(bad.validate(), ContractError);
  bad = c;
  bad.baseline = train::Baseline::kMovingAverage;
  bad.baseline_decay = 1.0;
  CHECK_THROWS_AS(bad.validate(), ContractError);
  bad.baseline_decay = 0.95;
  CHECK_NOTHROW(bad.validate());
}

TEST_CASE("batch sampler walks shuffled epochs") {
  Rng rng(1);
  train::BatchSampler s(10, 4, rng);
  std::vector<std::size_t> seen;
  for (int i = 0; i < 5; ++i) {
    auto b = s.next();
    CHECK(b.size() == 4);
    seen.insert(seen.end(), b.begin(), b.end());
  }
  std::set<std::size_t> first(seen.begin(), seen.begin() + 10), second(seen.begin() + 10, seen.end());
  CHECK(first.size() == 10);
  CHECK(second.size() == 10);

  Rng r1(2), r2(2);
  train::BatchSampler a(7, 3, r1), b(7, 3, r2);
  for (int i = 0; i < 6; ++i) CHECK(a.next() == b.next());
  CHECK_THROWS_AS(train::BatchSampler(0, 3, r1), ContractError);
}

TEST_CASE("train log") {
  train::TrainLog log;
  CHECK(log.next_step() == 1);
  train::LogRecord r;
  r.step = 1;
  r.phase = "pretrain_g";
  r.j_ml = 0.25;
  log.add(r);
  r.step = 1;
  CHECK_THROWS_AS(log.add(r), ContractError);
  r.step = 3;
  r.phase = "valid";
  r.j_ml.reset();
  r.rouge1 = 0.5;
  log.add(r);
  CHECK(log.to_csv() ==
        "step,phase,j_ml,j_pg,mean_reward,d_loss,d_acc,rouge1,rouge2,rougeL\n"
        "1,pretrain_g,0.25,,,,,,,\n3,valid,,,,,,0.5,,\n");
}

TEST_CASE("parallel_for covers every index and propagates errors") {
  std::vector<int> hit(37, 0);
  train::parallel_for(hit.size(), 4, [&](std::size_t i) { hit[i] += 1; });
  CHECK(std::all_of(hit.begin(), hit.end(), [](int h) { return h == 1; }));
  CHECK_THROWS_AS(train::parallel_for(5, 3, [](std::size_t i) {
                    if (i == 3) throw ContractError("boom");
                  }),
                  ContractError);
}

TEST_CASE("pretraining") {
  auto w = tiny_world(3);
  SUBCASE("zero steps leave the initialization") {
    auto g = train::init_generator(w.config, w.vocab.size());
    auto init = g.clone();
    train::TrainLog log;
    train::pretrain_generator(w.train, g, w.config, log);
    CHECK(g.params().values_equal(init.params()));
    CHECK(log.records().empty());

    auto d = train::init_discriminator(w.config, w.vocab.size());
    auto dinit = d.clone();
    train::pretrain_discriminator(w.train, g, d, w.config, log);
    CHECK(d.params().values_equal(dinit.params()));
    // A fresh discriminator says 0.5 everywhere, which reads as "generated".
    CHECK(train::discriminator_accuracy(w.valid, g, d, 6, 5) == 0.5);
  }
  SUBCASE("generator loss falls") {
    auto g = train::init_generator(w.config, w.vocab.size());
    const double before = train::corpus_nll(w.train, g);
    auto c = w.config;
    c.pretrain_g_steps = 60;
    train::TrainLog log;
    train::pretrain_generator(w.train, g, c, log);
    CHECK(log.records().size() == 60);
    CHECK(log.records().back().step == 60);
    CHECK(train::corpus_nll(w.train, g) < before);
  }
  SUBCASE("seed-averaged loss curve falls window by window") {
    constexpr int kSteps = 400, kWindow = 50, kSeeds = 5;
    std::vector<double> mean(kSteps, 0.0);
    for (int seed = 1; seed <= kSeeds; ++seed) {
      auto sw = tiny_world(static_cast<std::uint64_t>(seed));
      auto c = sw.config;
      c.pretrain_g_steps = kSteps;
      auto g = train::init_generator(c, sw.vocab.size());
      train::TrainLog log;
      train::pretrain_generator(sw.train, g, c, log);
      for (int k = 0; k < kSteps; ++k) mean[k] += *log.records()[k].j_ml / kSeeds;
    }
    double prev = INFINITY;
    for (int start = 0; start < kSteps; start += kWindow) {
      double avg = 0;
      for (int k = start; k < start + kWindow; ++k) avg += mean[k] / kWindow;
      INFO("window starting at step " << start + 1);
      CHECK(avg <= prev);
      prev = avg;
    }
  }
  SUBCASE("discriminator separates random samples") {
    auto big = tiny_world(3, 24, 40);
    auto c = big.config;
    c.disc_dims = {};
    c.pretrain_d_steps = 80;
    c.lr_d = 0.5;
    auto g = train::init_generator(c, big.vocab.size());
    auto d = train::init_discriminator(c, big.vocab.size());
    auto gen_before = g.clone();
    train::TrainLog log;
    train::pretrain_discriminator(big.train, g, d, c, log);
    CHECK(g.params().values_equal(gen_before.params()));
    CHECK(train::discriminator_accuracy(big.valid, g, d, 6, 77) > 0.9);
  }
  SUBCASE("empty corpus") {
    auto g = train::init_generator(w.config, w.vocab.size());
    train::TrainLog log;
    CHECK_THROWS_AS(train::pretrain_generator({}, g, w.config, log), ContractError);
  }
}

TEST_CASE("indistinguishable classes pin the discriminator at one half") {
  auto w = tiny_world(4);
  auto d = train::init_discriminator(w.config, w.vocab.size());
  std::vector<disc::LabeledSummary> pos, neg;
  for (const auto& ex : w.train) {
    pos.push_back(disc::make_labeled(gen::gold_targets(ex), ex.vocab_size, disc::Label::kOriginal));
    neg.push_back(disc::make_labeled(gen::gold_targets(ex), ex.vocab_size, disc::Label::kGenerated));
  }
  double loss = 0;
  for (int step = 0; step < 100; ++step) {
    ad::Tape tape;
    auto l = disc::d_loss(pos, neg, d);
    loss = l.item();
    CHECK(loss >= 2 * std::log(2.0) - 1e-12);
    ad::backward(l);
    ad::sgd_step(d.params(), 0.5);
  }
  for (const auto& s : pos) CHECK(disc::d_probability(s.ids, d) == doctest::Approx(0.5).epsilon(1e-6));
}

TEST_CASE("policy gradient estimator") {
  auto w = tiny_world(5);
  auto g = warm_generator(w, 30);
  disc::DiscriminatorParams d(
      [&] {
        auto dd = w.config.disc_dims;
        dd.vocab_size = w.vocab.size();
        return dd;
      }(),
      9);
  for (auto& [_, t] : d.params())
    for (double& v : t.mutable_data()) v += 0.2;

  SUBCASE("T = 1 gives R times the score") {
    const auto& ex = w.train[0];
    std::vector<train::PGSample> s(1);
    s[0].example = &ex;
    s[0].tokens = {ex.summary_ext_ids[0]};
    s[0].reward = 0.73;
    g.params().zero_grad();
    {
      ad::Tape tape;
      ad::backward(train::pg_surrogate(s, g, 0.0));
    }
    auto got = grads_of(g.params());
    g.params().zero_grad();
    {
      ad::Tape tape;
      ad::backward(gen::target_log_probs(ex, g, s[0].tokens)[0]);
    }
    auto score = grads_of(g.params());
    for (auto& [_, v] : score)
      for (double& x : v) x *= 0.73;
    CHECK(max_abs_diff(got, score) <= 1e-12);
    g.params().zero_grad();
  }

  SUBCASE("T = 3 matches per-term accumulation") {
    const auto& ex = w.train[1];
    std::vector<train::PGSample> s(2);
    s[0] = {&ex, {ex.source_ext_ids[0], ex.source_ext_ids[1], text::kEos}, {}, 0.6};
    s[1] = {&w.train[2], {w.train[2].source_ext_ids[2], 5, 7}, {}, 0.25};
    const double b = 0.1;
    g.params().zero_grad();
    {
      ad::Tape tape;
      ad::backward(train::pg_surrogate(s, g, b));
    }
    auto got = grads_of(g.params());

    std::map<std::string, std::vector<double>> manual;
    for (const auto& [name, t] : g.params()) manual[name].assign(t.size(), 0.0);
    for (const auto& sample : s) {
      for (std::size_t t = 0; t < sample.tokens.size(); ++t) {
        g.params().zero_grad();
        ad::Tape tape;
        ad::backward(gen::target_log_probs(*sample.example, g, sample.tokens)[t]);
        const double weight = (sample.reward - b) / 3.0 / 2.0;
        for (const auto& [name, v] : grads_of(g.params()))
          for (std::size_t i = 0; i < v.size(); ++i) manual[name][i] += weight * v[i];
      }
    }
    CHECK(max_abs_diff(got, manual) <= 1e-12);
    g.params().zero_grad();
  }

  SUBCASE("baseline equal to the reward cancels the gradient") {
    auto zero_d = disc::DiscriminatorParams::zeros(d.dims());
    auto c = w.config;
    c.baseline = train::Baseline::kMovingAverage;
    train::PGBaseline base(c.baseline, c.baseline_decay);
    base.set(0.5);
    auto before = g.clone();
    Rng rng(1);
    auto stats = train::pg_update(batch_of(w.train, 4), g, zero_d, c, rng, base);
    CHECK(*stats.mean_reward == 0.5);
    CHECK(*stats.j_pg == 0.0);
    CHECK(g.params().values_equal(before.params()));
  }

  SUBCASE("moving-average baseline") {
    train::PGBaseline none(train::Baseline::kNone, 0.95);
    CHECK(none.value(0.7) == 0.0);
    train::PGBaseline ma(train::Baseline::kMovingAverage, 0.9);
    CHECK(ma.value(0.7) == 0.7);
    ma.update(0.7);
    CHECK(ma.value(0.1) == 0.7);
    ma.update(0.2);
    CHECK(ma.value(0.0) == doctest::Approx(0.9 * 0.7 + 0.1 * 0.2));
  }

  SUBCASE("the reward path never reaches the discriminator") {
    auto d_before = d.clone();
    d.params().zero_grad();
    Rng rng(2);
    train::PGBaseline base(train::Baseline::kNone, 0.95);
    auto c = w.config;
    c.beta = 0.5;
    train::generator_adversarial_step(batch_of(w.train, 4), g, d, c, rng, base);
    CHECK(all_grads_zero(d.params()));
    CHECK(d.params().values_equal(d_before.params()));
    train::pg_update(batch_of(w.train, 4), g, d, c, rng, base);
    CHECK(all_grads_zero(d.params()));
    CHECK(d.params().values_equal(d_before.params()));
  }

  SUBCASE("rewards lie strictly inside (0, 1) and lengths respect the cap") {
    Rng rng(3);
    auto s = train::draw_pg_samples(batch_of(w.train, 12), g, d, 4, rng);
    for (const auto& x : s) {
      CHECK(x.reward > 0.0);
      CHECK(x.reward < 1.0);
      CHECK(x.length() >= 1);
      CHECK(x.length() <= 4);
    }
  }

  SUBCASE("sampling does not depend on the thread count") {
    Rng r1(4), r2(4);
    auto a = train::draw_pg_samples(batch_of(w.train, 9), g, d, 6, r1, 1);
    auto b = train::draw_pg_samples(batch_of(w.train, 9), g, d, 6, r2, 3);
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a[i].tokens == b[i].tokens);
      CHECK(a[i].reward == b[i].reward);
    }
  }
}

TEST_CASE("constant reward gives a zero-mean score") {
  auto r = testing::score_function_check(10000, 21);
  CHECK(r.samples == 10000);
  CHECK(r.other_grads_zero);
  CHECK(r.mean_grad_norm < r.bound);
}

TEST_CASE("mixed objective") {
  auto w = tiny_world(6);
  auto g = warm_generator(w, 20);
  auto dd = w.config.disc_dims;
  dd.vocab_size = w.vocab.size();
  disc::DiscriminatorParams d(dd, 3);
  for (auto& [_, t] : d.params())
    for (double& v : t.mutable_data()) v += 0.1;
  const auto batch = batch_of(w.train, 4);

  SUBCASE("beta = 0 is an MLE step and consumes no randomness") {
    auto c = w.config;
    c.beta = 0.0;
    auto mle = g.clone();
    {
      ad::Tape tape;
      auto loss = train::batch_mle_loss(batch, mle);
      ad::backward(loss);
      ad::sgd_step(mle.params(), c.lr_g, c.clip_norm);
    }
    Rng rng(8), untouched(8);
    train::PGBaseline base(c.baseline, c.baseline_decay);
    auto stats = train::generator_adversarial_step(batch, g, d, c, rng, base);
    CHECK(g.params().values_equal(mle.params()));
    CHECK(rng.next() == untouched.next());
    CHECK(stats.j_ml.has_value());
    CHECK_FALSE(stats.j_pg.has_value());
  }

  SUBCASE("beta = 1 ignores the gold summaries") {
    auto c = w.config;
    c.beta = 1.0;
    std::vector<text::Example> altered(w.train.begin(), w.train.begin() + 4);
    for (auto& ex : altered) {
      ex.summary_ext_ids.assign(ex.summary_ext_ids.size(), text::kUnk);
      ex.summary_tokens.assign(ex.summary_tokens.size(), "<unk>");
    }
    auto g2 = g.clone();
    Rng r1(9), r2(9);
    train::PGBaseline b1(c.baseline, c.baseline_decay), b2(c.baseline, c.baseline_decay);
    auto s1 = train::generator_adversarial_step(batch, g, d, c, r1, b1);
    auto s2 = train::generator_adversarial_step(batch_of(altered, 4), g2, d, c, r2, b2);
    CHECK(g.params().values_equal(g2.params()));
    CHECK_FALSE(s1.j_ml.has_value());
    CHECK(s1.loss == s2.loss);
  }

  SUBCASE("gradient is linear in beta") {
    Rng rng(10);
    auto samples = train::draw_pg_samples(batch, g, d, 6, rng);
    for (double beta : {0.25, 0.5, 0.8}) {
      g.params().zero_grad();
      {
        ad::Tape tape;
        auto s = train::pg_surrogate(samples, g, 0.0);
        auto m = train::batch_mle_loss(batch, g);
        ad::backward(train::combine_objective(s, m, beta));
      }
      auto mixed = grads_of(g.params());
      g.params().zero_grad();
      {
        ad::Tape tape;
        ad::backward(ad::scalar_mul(train::pg_surrogate(samples, g, 0.0), -1.0));
      }
      auto pg = grads_of(g.params());
      g.params().zero_grad();
      {
        ad::Tape tape;
        ad::backward(train::batch_mle_loss(batch, g));
      }
      auto ml = grads_of(g.params());
      for (auto& [name, v] : pg)
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = beta * v[i] + (1 - beta) * ml[name][i];
      CHECK(max_abs_diff(mixed, pg) <= 1e-12);
    }
    g.params().zero_grad();
  }
}

TEST_CASE("adversarial loop") {
  auto w = tiny_world(7);
  auto base_g = warm_generator(w, 40);
  auto base_d = train::init_discriminator(w.config, w.vocab.size());

  SUBCASE("zero rounds change nothing") {
    auto g = base_g.clone();
    auto d = base_d.clone();
    train::TrainLog log;
    auto r = train::adversarial_loop(w.train, w.valid, w.vocab, g, d, w.config, log);
    CHECK(g.params().values_equal(base_g.params()));
    CHECK(d.params().values_equal(base_d.params()));
    CHECK(r.best.params().values_equal(base_g.params()));
    CHECK(r.best_round == 0);
    CHECK(r.rounds.size() == 1);
  }

  SUBCASE("best checkpoint and log are consistent and reproducible") {
    auto c = w.config;
    c.rounds = 4;
    c.g_steps = 2;
    c.d_steps = 1;
    auto run = [&](int threads) {
      auto g = base_g.clone();
      auto d = base_d.clone();
      auto cc = c;
      cc.threads = threads;
      train::TrainLog log;
      auto r = train::adversarial_loop(w.train, w.valid, w.vocab, g, d, cc, log);
      return std::tuple{log.to_csv(), std::move(r), std::move(g), std::move(d)};
    };
    auto [csv1, r1, g1, d1] = run(1);
    auto [csv2, r2, g2, d2] = run(1);
    auto [csv3, r3, g3, d3] = run(3);
    CHECK(csv1 == csv2);
    CHECK(csv1 == csv3);
    CHECK(g1.params().values_equal(g2.params()));
    CHECK(d1.params().values_equal(d3.params()));
    CHECK(r1.rounds.size() == 5);
    CHECK(r1.best_round >= 1);
    for (std::size_t i = 1; i < r1.rounds.size(); ++i) CHECK(r1.best_rouge1() >= r1.rounds[i].rouge1);
    auto best_eval = train::evaluate_generator(w.valid, r1.best, w.vocab, c.max_tgt_len);
    CHECK(best_eval.rouge1 == r1.best_rouge1());
    // 4 rounds of 2 G steps, 1 D step and one validation, plus the initial one.
    CHECK(std::count(csv1.begin(), csv1.end(), '\n') == 1 + 1 + 4 * 4);
  }

  SUBCASE("discriminator-only rounds leave the generator alone") {
    std::vector<double> gains;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      auto c = w.config;
      c.seed = seed;
      c.rounds = 3;
      c.g_steps = 0;
      c.d_steps = 5;
      c.lr_d = 0.5;
      auto g = base_g.clone();
      auto d = train::init_discriminator(c, w.vocab.size());
      const double before = train::discriminator_accuracy(w.valid, g, d, 6, 100 + seed);
      train::TrainLog log;
      train::adversarial_loop(w.train, w.valid, w.vocab, g, d, c, log);
      CHECK(g.params().values_equal(base_g.params()));
      gains.push_back(train::discriminator_accuracy(w.valid, g, d, 6, 100 + seed) - before);
    }
    std::sort(gains.begin(), gains.end());
    CHECK(gains[2] >= 0.0);
  }
}
