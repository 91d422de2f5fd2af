// Copyright 2026 The advsum Authors.
// SPDX-License-Identifier: Apache-2.0

#include "advsum/generator.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "advsum/ops.hpp"

namespace advsum::gen {

using ad::Tensor;

namespace {

constexpr double kInitScale = 0.3;

struct Spec {
  std::string name;
  ad::Shape shape;
  bool bias;
};

std::vector<Spec> layout(const GeneratorDims& d) {
  const auto V = static_cast<std::size_t>(d.vocab_size);
  const auto e = static_cast<std::size_t>(d.emb);
  const auto h = static_cast<std::size_t>(d.hidden);
  const auto s = static_cast<std::size_t>(d.dec_hidden);
  const auto a = static_cast<std::size_t>(d.attn);
  const auto o = static_cast<std::size_t>(d.out_hidden);
  return {
      {"embedding", {V, e}, false},
      {"enc.fwd.W", {4 * h, e + h}, false},
      {"enc.fwd.b", {4 * h}, true},
      {"enc.bwd.W", {4 * h, e + h}, false},
      {"enc.bwd.b", {4 * h}, true},
      {"bridge.h.W", {s, 2 * h}, false},
      {"bridge.h.b", {s}, true},
      {"bridge.c.W", {s, 2 * h}, false},
      {"bridge.c.b", {s}, true},
      {"dec.W", {4 * s, e + s}, false},
      {"dec.b", {4 * s}, true},
      {"attn.W_h", {a, 2 * h}, false},
      {"attn.W_s", {a, s}, false},
      {"attn.b", {a}, true},
      {"attn.v", {a}, false},
      {"out.V", {o, s + 2 * h}, false},
      {"out.b", {o}, true},
      {"out.V2", {V, o}, false},
      {"out.b2", {V}, true},
      {"ptr.w_c", {2 * h}, false},
      {"ptr.w_s", {s}, false},
      {"ptr.w_x", {e}, false},
      {"ptr.b", {1}, true},
  };
}

struct LstmOut {
  Tensor h;
  Tensor c;
};

LstmOut lstm_step(const Tensor& W, const Tensor& b, const Tensor& x, const Tensor& h,
                  const Tensor& c) {
  const std::size_t d = h.size();
  Tensor gates = ad::add(ad::matmul(W, ad::concat({x, h})), b);
  Tensor in = ad::sigmoid(ad::slice(gates, 0, d));
  Tensor forget = ad::sigmoid(ad::slice(gates, d, 2 * d));
  Tensor out = ad::sigmoid(ad::slice(gates, 2 * d, 3 * d));
  Tensor cand = ad::tanh(ad::slice(gates, 3 * d, 4 * d));
  Tensor c_next = ad::add(ad::mul(forget, c), ad::mul(in, cand));
  return {ad::mul(out, ad::tanh(c_next)), c_next};
}

int embed_id(int ext_id, int vocab_size) { return ext_id < vocab_size ? ext_id : text::kUnk; }

void check_example(const text::Example& ex, const GeneratorParams& params) {
  if (ex.source_ids.empty()) throw ContractError("encode: empty source");
  const int V = params.dims().vocab_size;
  if (ex.vocab_size != V) {
    throw ContractError("encode: example built for vocabulary of " + std::to_string(ex.vocab_size) +
                        ", generator has " + std::to_string(V));
  }
  for (int id : ex.source_ids) {
    if (id < 0 || id >= V) {
      throw ContractError("encode: source id " + std::to_string(id) + " is not a fixed-vocabulary id");
    }
  }
}

}  // namespace

void GeneratorDims::validate() const {
  if (vocab_size < text::kNumReserved || emb < 1 || hidden < 1 || dec_hidden < 1 || attn < 1 ||
      out_hidden < 1) {
    throw ContractError("generator dims must be positive and cover the reserved ids");
  }
}

GeneratorParams::GeneratorParams(const GeneratorDims& dims, ad::ParamSet params)
    : dims_(dims), params_(std::move(params)) {}

GeneratorParams::GeneratorParams(const GeneratorDims& dims, std::uint64_t seed) : dims_(dims) {
  dims.validate();
  Rng rng(seed);
  for (auto& spec : layout(dims)) {
    auto t = Tensor::zeros(spec.shape);
    if (!spec.bias) {
      for (double& v : t.mutable_data()) v = rng.uniform(-kInitScale, kInitScale);
    }
    params_.add(spec.name, std::move(t));
  }
}

GeneratorParams GeneratorParams::zeros(const GeneratorDims& dims) {
  dims.validate();
  ad::ParamSet ps;
  for (auto& spec : layout(dims)) ps.add(spec.name, Tensor::zeros(spec.shape));
  return GeneratorParams(dims, std::move(ps));
}

GeneratorParams GeneratorParams::clone() const { return GeneratorParams(dims_, params_.clone()); }

std::vector<int> SummaryHypothesis::content() const {
  std::vector<int> out = tokens;
  if (!out.empty() && out.back() == text::kEos) out.pop_back();
  return out;
}

EncoderStates encode(const text::Example& example, const GeneratorParams& params) {
  check_example(example, params);
  const auto& P = params;
  const std::size_t n = example.source_ids.size();
  const auto h = static_cast<std::size_t>(params.dims().hidden);
  std::vector<Tensor> emb;
  emb.reserve(n);
  for (int id : example.source_ids) emb.push_back(ad::embedding(P["embedding"], id));

  std::vector<LstmOut> fwd(n), bwd(n);
  LstmOut state{Tensor::zeros({h}), Tensor::zeros({h})};
  for (std::size_t i = 0; i < n; ++i) {
    state = lstm_step(P["enc.fwd.W"], P["enc.fwd.b"], emb[i], state.h, state.c);
    fwd[i] = state;
  }
  state = {Tensor::zeros({h}), Tensor::zeros({h})};
  for (std::size_t i = n; i-- > 0;) {
    state = lstm_step(P["enc.bwd.W"], P["enc.bwd.b"], emb[i], state.h, state.c);
    bwd[i] = state;
  }

  EncoderStates enc;
  enc.states.reserve(n);
  for (std::size_t i = 0; i < n; ++i) enc.states.push_back(ad::concat({fwd[i].h, bwd[i].h}));
  enc.matrix = ad::stack(enc.states);
  enc.features = ad::matmul(enc.matrix, ad::transpose(P["attn.W_h"]));
  Tensor last_h = ad::concat({fwd[n - 1].h, bwd[0].h});
  Tensor last_c = ad::concat({fwd[n - 1].c, bwd[0].c});
  enc.initial.h = ad::tanh(ad::add(ad::matmul(P["bridge.h.W"], last_h), P["bridge.h.b"]));
  enc.initial.c = ad::tanh(ad::add(ad::matmul(P["bridge.c.W"], last_c), P["bridge.c.b"]));
  return enc;
}

Tensor pointer_mixture(const Tensor& p_vocab, const Tensor& p_gen, const Tensor& attention,
                       std::span<const int> source_ext_ids, int ext_vocab_size) {
  const auto V = p_vocab.size();
  const auto ext = static_cast<std::size_t>(ext_vocab_size);
  if (ext < V) throw ContractError("pointer_mixture: extended vocabulary smaller than P_vocab");
  Tensor generated = ad::mul(p_vocab, p_gen);
  if (ext > V) generated = ad::concat({generated, Tensor::zeros({ext - V})});
  Tensor copy_gate = ad::add_scalar(ad::scalar_mul(p_gen, -1.0), 1.0);
  Tensor copied = ad::scatter_add(ad::mul(attention, copy_gate), source_ext_ids, ext);
  return ad::add(generated, copied);
}

DecoderStep decode_step(const DecoderState& prev, int prev_token, const EncoderStates& enc,
                        const text::Example& example, const GeneratorParams& params) {
  const auto& P = params;
  const int V = params.dims().vocab_size;
  if (prev_token < 0 || prev_token >= example.ext_vocab_size()) {
    throw ContractError("decode_step: token " + std::to_string(prev_token) +
                        " outside the extended vocabulary");
  }
  DecoderStep step;
  Tensor x = ad::embedding(P["embedding"], embed_id(prev_token, V));
  auto next = lstm_step(P["dec.W"], P["dec.b"], x, prev.h, prev.c);
  step.state = {next.h, next.c};
  const Tensor& s = next.h;

  Tensor query = ad::add(ad::matmul(P["attn.W_s"], s), P["attn.b"]);
  Tensor scores = ad::matmul(ad::tanh(ad::add(enc.features, query)), P["attn.v"]);
  step.attention = ad::softmax(scores);
  step.context = ad::matmul(step.attention, enc.matrix);

  Tensor hidden = ad::add(ad::matmul(P["out.V"], ad::concat({s, step.context})), P["out.b"]);
  Tensor logits = ad::add(ad::matmul(P["out.V2"], hidden), P["out.b2"]);
  step.p_vocab = ad::softmax(logits);

  Tensor switch_logit = ad::add(
      ad::add(ad::sum(ad::mul(P["ptr.w_c"], step.context)), ad::sum(ad::mul(P["ptr.w_s"], s))),
      ad::add(ad::sum(ad::mul(P["ptr.w_x"], x)), P["ptr.b"]));
  step.p_gen = ad::sigmoid(switch_logit);
  step.p_final = pointer_mixture(step.p_vocab, step.p_gen, step.attention, example.source_ext_ids,
                                 example.ext_vocab_size());
  return step;
}

std::vector<int> gold_targets(const text::Example& example) {
  std::vector<int> t = example.summary_ext_ids;
  t.push_back(text::kEos);
  return t;
}

std::vector<Tensor> target_log_probs(const text::Example& example, const GeneratorParams& params,
                                     std::span<const int> targets) {
  if (targets.empty()) throw ContractError("target_log_probs: no targets");
  EncoderStates enc = encode(example, params);
  DecoderState state = enc.initial;
  int input = text::kBos;
  std::vector<Tensor> out;
  out.reserve(targets.size());
  for (int target : targets) {
    if (target < 0 || target >= example.ext_vocab_size()) {
      throw ContractError("target_log_probs: target " + std::to_string(target) +
                          " outside the extended vocabulary");
    }
    DecoderStep step = decode_step(state, input, enc, example, params);
    const auto t = static_cast<std::size_t>(target);
    out.push_back(ad::log(ad::slice(step.p_final, t, t + 1)));
    state = step.state;
    input = target;
  }
  return out;
}

Tensor mle_loss(const text::Example& example, const GeneratorParams& params) {
  auto targets = gold_targets(example);
  auto logp = target_log_probs(example, params, targets);
  return ad::scalar_mul(ad::mean(ad::concat(logp)), -1.0);
}

namespace {

double log_prob_of(const Tensor& p_final, int token) {
  return std::log(std::max(p_final[static_cast<std::size_t>(token)], ad::kLogFloor));
}

int argmax(std::span<const double> p) {
  // First maximum wins, which is the lowest id.
  return static_cast<int>(std::max_element(p.begin(), p.end()) - p.begin());
}

template <typename Choose>
SummaryHypothesis run_decoder(const text::Example& example, const GeneratorParams& params,
                              std::size_t max_len, Choose&& choose) {
  if (max_len == 0) throw ContractError("decode: max_len must be at least 1");
  ad::NoGradGuard no_grad;
  EncoderStates enc = encode(example, params);
  DecoderState state = enc.initial;
  int input = text::kBos;
  SummaryHypothesis hyp;
  while (hyp.tokens.size() < max_len) {
    DecoderStep step = decode_step(state, input, enc, example, params);
    const int token = choose(step.p_final.data());
    const double lp = log_prob_of(step.p_final, token);
    hyp.tokens.push_back(token);
    hyp.step_log_probs.push_back(lp);
    hyp.log_prob += lp;
    if (token == text::kEos) break;
    state = step.state;
    input = token;
  }
  return hyp;
}

}  // namespace

SummaryHypothesis sample_summary(const text::Example& example, const GeneratorParams& params,
                                 std::size_t max_len, Rng& rng) {
  return run_decoder(example, params, max_len, [&](std::span<const double> p) {
    return static_cast<int>(rng.categorical(p));
  });
}

SummaryHypothesis greedy_decode(const text::Example& example, const GeneratorParams& params,
                                std::size_t max_len) {
  return run_decoder(example, params, max_len, [](std::span<const double> p) { return argmax(p); });
}

SummaryHypothesis beam_decode(const text::Example& example, const GeneratorParams& params,
                              std::size_t max_len, std::size_t beam) {
  if (beam == 0) throw ContractError("beam_decode: beam must be at least 1");
  if (max_len == 0) throw ContractError("decode: max_len must be at least 1");
  std::vector<SummaryHypothesis> finished{greedy_decode(example, params, max_len)};

  ad::NoGradGuard no_grad;
  EncoderStates enc = encode(example, params);
  struct Live {
    SummaryHypothesis hyp;
    DecoderState state;
    int input;
  };
  std::vector<Live> live{{SummaryHypothesis{}, enc.initial, text::kBos}};
  while (!live.empty()) {
    struct Candidate {
      double total;
      std::size_t parent;
      int token;
      double lp;
    };
    std::vector<Candidate> cands;
    std::vector<DecoderStep> steps;
    steps.reserve(live.size());
    for (std::size_t b = 0; b < live.size(); ++b) {
      steps.push_back(decode_step(live[b].state, live[b].input, enc, example, params));
      const auto p = steps.back().p_final.data();
      for (std::size_t w = 0; w < p.size(); ++w) {
        const double lp = std::log(std::max(p[w], ad::kLogFloor));
        cands.push_back({live[b].hyp.log_prob + lp, b, static_cast<int>(w), lp});
      }
    }
    const std::size_t keep = std::min(beam, cands.size());
    std::partial_sort(cands.begin(), cands.begin() + static_cast<long>(keep), cands.end(),
                      [](const Candidate& a, const Candidate& b) {
                        if (a.total != b.total) return a.total > b.total;
                        if (a.parent != b.parent) return a.parent < b.parent;
                        return a.token < b.token;
                      });
    std::vector<Live> next;
    for (std::size_t i = 0; i < keep; ++i) {
      const auto& c = cands[i];
      SummaryHypothesis hyp = live[c.parent].hyp;
      hyp.tokens.push_back(c.token);
      hyp.step_log_probs.push_back(c.lp);
      hyp.log_prob += c.lp;
      if (c.token == text::kEos || hyp.tokens.size() >= max_len) {
        finished.push_back(std::move(hyp));
      } else {
        next.push_back({std::move(hyp), steps[c.parent].state, c.token});
      }
    }
    live = std::move(next);
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < finished.size(); ++i) {
    if (finished[i].score() > finished[best].score()) best = i;
  }
  return finished[best];
}

}  // namespace advsum::gen
