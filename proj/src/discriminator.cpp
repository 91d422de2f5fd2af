// Copyright 2026 The advsum Authors.
// SPDX-License-Identifier: Apache-2.0

#include "advsum/discriminator.hpp"

#include <algorithm>
#include <set>
#include <string>

#include "advsum/ops.hpp"
#include "advsum/rng.hpp"
#include "advsum/text.hpp"

namespace advsum::disc {

using ad::Tensor;

namespace {

constexpr double kInitScale = 0.1;

struct Spec {
  std::string name;
  ad::Shape shape;
  bool random;
};

std::string conv_name(int width, const char* part) {
  return "conv.k" + std::to_string(width) + "." + part;
}

std::vector<Spec> layout(const DiscriminatorDims& d) {
  const auto V = static_cast<std::size_t>(d.vocab_size);
  const auto e = static_cast<std::size_t>(d.emb);
  const auto f = static_cast<std::size_t>(d.filters);
  std::vector<Spec> out{{"embedding", {V, e}, true}};
  for (int w : d.widths) {
    out.push_back({conv_name(w, "W"), {f, static_cast<std::size_t>(w) * e}, true});
    out.push_back({conv_name(w, "b"), {f}, false});
  }
  out.push_back({"head.W", {2, f * d.widths.size()}, false});
  out.push_back({"head.b", {2}, false});
  return out;
}

std::size_t effective_length(std::span<const int> ids) {
  std::size_t n = ids.size();
  while (n > 0 && ids[n - 1] == text::kPad) --n;
  return std::max<std::size_t>(n, 1);
}

}  // namespace

void DiscriminatorDims::validate() const {
  if (vocab_size < text::kNumReserved || emb < 1 || filters < 1 || widths.empty()) {
    throw ContractError("discriminator dims must be positive and cover the reserved ids");
  }
  std::set<int> seen;
  for (int w : widths) {
    if (w < 1) throw ContractError("discriminator: window width must be positive");
    if (!seen.insert(w).second) throw ContractError("discriminator: duplicate window width");
  }
}

int DiscriminatorDims::max_width() const { return *std::max_element(widths.begin(), widths.end()); }

DiscriminatorParams::DiscriminatorParams(const DiscriminatorDims& dims, ad::ParamSet params)
    : dims_(dims), params_(std::move(params)) {}

DiscriminatorParams::DiscriminatorParams(const DiscriminatorDims& dims, std::uint64_t seed)
    : dims_(dims) {
  dims.validate();
  Rng rng(seed);
  for (auto& spec : layout(dims)) {
    auto t = Tensor::zeros(spec.shape);
    if (spec.random) {
      for (double& v : t.mutable_data()) v = rng.uniform(-kInitScale, kInitScale);
    }
    params_.add(spec.name, std::move(t));
  }
}

DiscriminatorParams DiscriminatorParams::zeros(const DiscriminatorDims& dims) {
  dims.validate();
  ad::ParamSet ps;
  for (auto& spec : layout(dims)) ps.add(spec.name, Tensor::zeros(spec.shape));
  return DiscriminatorParams(dims, std::move(ps));
}

DiscriminatorParams DiscriminatorParams::clone() const {
  return DiscriminatorParams(dims_, params_.clone());
}

LabeledSummary make_labeled(std::span<const int> ext_ids, int vocab_size, Label label) {
  LabeledSummary out;
  out.label = label;
  out.ids.reserve(ext_ids.size());
  for (int id : ext_ids) {
    if (id < 0) throw ContractError("make_labeled: negative id");
    out.ids.push_back(id < vocab_size ? id : text::kUnk);
  }
  return out;
}

Tensor d_forward(std::span<const int> ids, const DiscriminatorParams& params) {
  const auto& dims = params.dims();
  if (ids.empty()) throw ContractError("d_forward: empty summary");
  for (int id : ids) {
    if (id < 0 || id >= dims.vocab_size) {
      throw ContractError("d_forward: id " + std::to_string(id) + " outside vocabulary of " +
                          std::to_string(dims.vocab_size));
    }
  }
  const std::size_t len = effective_length(ids);
  std::vector<int> padded(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(std::min(len, ids.size())));
  padded.resize(len + static_cast<std::size_t>(dims.max_width()) - 1, text::kPad);

  Tensor x = ad::embedding(params["embedding"], padded);
  std::vector<Tensor> pooled;
  for (int w : dims.widths) {
    Tensor feats = ad::tanh(ad::conv_over_time(x, params[conv_name(w, "W")],
                                               params[conv_name(w, "b")],
                                               static_cast<std::size_t>(w)));
    pooled.push_back(ad::max_over_time(feats, len));
  }
  Tensor logits = ad::add(ad::matmul(params["head.W"], ad::concat(pooled)), params["head.b"]);
  return ad::slice(ad::softmax(logits), 1, 2);
}

double d_probability(std::span<const int> ids, const DiscriminatorParams& params) {
  ad::NoGradGuard guard;
  return d_forward(ids, params).item();
}

Tensor d_loss(std::span<const LabeledSummary> pos, std::span<const LabeledSummary> neg,
              const DiscriminatorParams& params) {
  if (pos.empty() || neg.empty()) throw ContractError("d_loss: both classes must be non-empty");
  auto side = [&](std::span<const LabeledSummary> batch, bool original) {
    std::vector<Tensor> terms;
    terms.reserve(batch.size());
    for (const auto& s : batch) {
      Tensor p = ad::clamp(d_forward(s.ids, params), kProbClamp, 1.0 - kProbClamp);
      if (!original) p = ad::add_scalar(ad::scalar_mul(p, -1.0), 1.0);
      terms.push_back(ad::log(p));
    }
    return ad::scalar_mul(ad::mean(ad::concat(terms)), -1.0);
  };
  Tensor lp = side(pos, true);
  Tensor ln = side(neg, false);
  return ad::add(lp, ln);
}

double d_accuracy(std::span<const LabeledSummary> batch, const DiscriminatorParams& params,
                  double threshold) {
  if (batch.empty()) throw ContractError("d_accuracy: empty batch");
  std::size_t correct = 0;
  for (const auto& s : batch) {
    const bool says_original = d_probability(s.ids, params) > threshold;
    if (says_original == (s.label == Label::kOriginal)) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(batch.size());
}

}  // namespace advsum::disc
