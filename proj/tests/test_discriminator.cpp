// Copyright 2026 The advsum Authors.
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <vector>

#include "advsum/discriminator.hpp"
#include "advsum/gradcheck.hpp"
#include "advsum/ops.hpp"
#include "advsum/rng.hpp"
#include "advsum/text.hpp"

using namespace advsum;
using disc::Label;
using disc::LabeledSummary;

namespace {

disc::DiscriminatorDims small_dims(int vocab = 30) {
  disc::DiscriminatorDims d;
  d.vocab_size = vocab;
  d.emb = 6;
  d.widths = {2, 3};
  d.filters = 4;
  return d;
}

std::vector<int> random_ids(Rng& rng, int vocab, std::size_t n) {
  std::vector<int> ids;
  for (std::size_t i = 0; i < n; ++i) ids.push_back(rng.int_in(text::kNumReserved, vocab - 1));
  return ids;
}

// Originals draw from the lower half of the content ids, fakes from the upper.
std::vector<LabeledSummary> toy_batch(Rng& rng, int vocab, Label label, int count) {
  const int half = text::kNumReserved + (vocab - text::kNumReserved) / 2;
  std::vector<LabeledSummary> out;
  for (int i = 0; i < count; ++i) {
    LabeledSummary s;
    s.label = label;
    const int n = rng.int_in(2, 6);
    for (int j = 0; j < n; ++j) {
      s.ids.push_back(label == Label::kOriginal ? rng.int_in(text::kNumReserved, half - 1)
                                                : rng.int_in(half, vocab - 1));
    }
    s.ids.push_back(text::kEos);
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace

TEST_CASE("zero parameters give one half") {
  auto p = disc::DiscriminatorParams::zeros(small_dims());
  Rng rng(1);
  for (std::size_t n : {1u, 2u, 7u}) CHECK(disc::d_probability(random_ids(rng, 30, n), p) == 0.5);
}

TEST_CASE("fresh parameters give one half and random ones stay in range") {
  disc::DiscriminatorParams fresh(small_dims(), 3);
  Rng rng(2);
  CHECK(disc::d_probability(random_ids(rng, 30, 5), fresh) == 0.5);

  disc::DiscriminatorParams p(small_dims(), 4);
  for (auto& [_, t] : p.params())
    for (double& v : t.mutable_data()) v = rng.uniform(-3, 3);
  for (int trial = 0; trial < 200; ++trial) {
    double d = disc::d_probability(random_ids(rng, 30, 1 + rng.index(9)), p);
    CHECK(d > 0.0);
    CHECK(d < 1.0);
  }
}

TEST_CASE("trailing padding does not change the output") {
  disc::DiscriminatorParams p(small_dims(), 5);
  Rng rng(6);
  for (auto& [_, t] : p.params())
    for (double& v : t.mutable_data()) v += rng.uniform(-0.5, 0.5);
  for (int trial = 0; trial < 50; ++trial) {
    auto ids = random_ids(rng, 30, 1 + rng.index(6));
    const double base = disc::d_probability(ids, p);
    auto padded = ids;
    padded.resize(ids.size() + 1 + rng.index(8), text::kPad);
    CHECK(disc::d_probability(padded, p) == base);
  }
}

TEST_CASE("input validation") {
  auto p = disc::DiscriminatorParams::zeros(small_dims());
  CHECK_THROWS_AS(disc::d_probability(std::vector<int>{}, p), ContractError);
  CHECK_THROWS_AS(disc::d_probability(std::vector<int>{4, 30}, p), ContractError);
  auto bad = small_dims();
  bad.widths = {2, 2};
  CHECK_THROWS_AS(disc::DiscriminatorParams::zeros(bad), ContractError);

  std::vector<int> ext{5, 31, 40};
  auto s = disc::make_labeled(ext, 30, Label::kGenerated);
  CHECK(s.ids == std::vector<int>{5, text::kUnk, text::kUnk});
  CHECK(s.label == Label::kGenerated);
}

TEST_CASE("d_loss") {
  Rng rng(7);
  auto pos = toy_batch(rng, 30, Label::kOriginal, 3);
  auto neg = toy_batch(rng, 30, Label::kGenerated, 4);

  SUBCASE("uninformed discriminator costs 2 ln 2") {
    auto p = disc::DiscriminatorParams::zeros(small_dims());
    CHECK(disc::d_loss(pos, neg, p).item() == doctest::Approx(2 * std::log(2.0)).epsilon(1e-12));
  }

  SUBCASE("saturated outputs stay finite") {
    auto p = disc::DiscriminatorParams::zeros(small_dims());
    { auto hb = p.params().at("head.b").mutable_data(); hb[0] = -1e4; hb[1] = 1e4; }
    const double loss = disc::d_loss(pos, neg, p).item();
    CHECK(std::isfinite(loss));
    CHECK(loss == doctest::Approx(-std::log(disc::kProbClamp)).epsilon(1e-6));
  }

  SUBCASE("gradients agree with finite differences") {
    disc::DiscriminatorParams p(small_dims(), 8);
    for (auto& [_, t] : p.params())
      for (double& v : t.mutable_data()) v += rng.uniform(-0.3, 0.3);
    auto report = ad::gradient_check([&] { return disc::d_loss(pos, neg, p); }, p.params(),
                                     1e-5, 1e-4);
    CHECK(report.passed());
    CHECK(report.max_rel_error < 1e-4);
  }

  SUBCASE("empty class is rejected") {
    auto p = disc::DiscriminatorParams::zeros(small_dims());
    CHECK_THROWS_AS(disc::d_loss(pos, std::vector<LabeledSummary>{}, p), ContractError);
  }
}

TEST_CASE("d_accuracy") {
  Rng rng(9);
  auto batch = toy_batch(rng, 30, Label::kOriginal, 5);
  auto fakes = toy_batch(rng, 30, Label::kGenerated, 5);
  batch.insert(batch.end(), fakes.begin(), fakes.end());

  // D = 0.5 everywhere reads as "generated".
  auto p = disc::DiscriminatorParams::zeros(small_dims());
  CHECK(disc::d_accuracy(batch, p) == 0.5);

  { auto hb = p.params().at("head.b").mutable_data(); hb[0] = 0.0; hb[1] = 5.0; }
  CHECK(disc::d_accuracy(batch, p) == 0.5);
  CHECK(disc::d_accuracy(std::span(batch).first(5), p) == 1.0);
  CHECK(disc::d_accuracy(std::span(batch).last(5), p) == 0.0);
  CHECK(disc::d_accuracy(batch, p, 0.999) == 0.5);
  CHECK_THROWS_AS(disc::d_accuracy(std::vector<LabeledSummary>{}, p), ContractError);
}

TEST_CASE("training separates a toy task") {
  Rng rng(10);
  auto pos = toy_batch(rng, 30, Label::kOriginal, 8);
  auto neg = toy_batch(rng, 30, Label::kGenerated, 8);
  disc::DiscriminatorParams p(small_dims(), 11);

  double prev = 0;
  bool monotone = true;
  for (int step = 0; step < 200; ++step) {
    ad::Tape tape;
    auto loss = disc::d_loss(pos, neg, p);
    ad::backward(loss);
    if (step > 0 && loss.item() > prev + 1e-12) monotone = false;
    prev = loss.item();
    ad::sgd_step(p.params(), 0.5);
  }
  CHECK(monotone);
  CHECK(prev < 0.1);
  auto all = pos;
  all.insert(all.end(), neg.begin(), neg.end());
  CHECK(disc::d_accuracy(all, p) == 1.0);
}
