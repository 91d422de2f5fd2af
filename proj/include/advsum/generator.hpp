// Copyright 2026 The advsum Authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef ADVSUM_GENERATOR_HPP_
#define ADVSUM_GENERATOR_HPP_

#include <cstdint>
#include <span>
#include <vector>

#include "advsum/params.hpp"
#include "advsum/rng.hpp"
#include "advsum/tensor.hpp"
#include "advsum/text.hpp"

// Pointer-generator summarizer: a bidirectional LSTM encoder, an LSTM decoder
// with additive attention, a two-layer vocabulary head and a learned switch
// between generating from the fixed vocabulary and copying source tokens.
namespace advsum::gen {

struct GeneratorDims {
  int vocab_size = 0;   // fixed vocabulary V
  int emb = 32;         // d_emb
  int hidden = 32;      // encoder hidden size per direction, d_h
  int dec_hidden = 64;  // d_dec
  int attn = 32;        // d_att
  int out_hidden = 64;  // width of the first output layer

  void validate() const;
};

/// Parameter names and shapes:
///   embedding      [V, emb]
///   enc.fwd.W/b    [4h, emb+h] / [4h]        (gate rows: input, forget, output, cell)
///   enc.bwd.W/b    same as enc.fwd
///   bridge.h.W/b   [dec, 2h] / [dec]
///   bridge.c.W/b   [dec, 2h] / [dec]
///   dec.W/b        [4dec, emb+dec] / [4dec]
///   attn.W_h       [att, 2h]
///   attn.W_s       [att, dec]
///   attn.b, attn.v [att]
///   out.V/out.b    [out, dec+2h] / [out]
///   out.V2/out.b2  [V, out] / [V]
///   ptr.w_c [2h], ptr.w_s [dec], ptr.w_x [emb], ptr.b [1]
class GeneratorParams {
 public:
  /// Weights ~ U(-0.1, 0.1) from Rng(seed) in the order listed above, biases
  /// zero.
  GeneratorParams(const GeneratorDims& dims, std::uint64_t seed);
  static GeneratorParams zeros(const GeneratorDims& dims);

  const GeneratorDims& dims() const { return dims_; }
  ad::ParamSet& params() { return params_; }
  const ad::ParamSet& params() const { return params_; }
  const ad::Tensor& operator[](const std::string& name) const { return params_.at(name); }

  GeneratorParams clone() const;

 private:
  GeneratorParams(const GeneratorDims& dims, ad::ParamSet params);
  GeneratorDims dims_;
  ad::ParamSet params_;
};

struct DecoderState {
  ad::Tensor h;  // s_t
  ad::Tensor c;
};

struct EncoderStates {
  std::vector<ad::Tensor> states;  // h_i = [forward_i ; backward_i], each [2h]
  ad::Tensor matrix;               // the states stacked, [n, 2h]
  ad::Tensor features;             // W_h h_i for every i, [n, att]
  DecoderState initial;            // bridged decoder start state
};

struct DecoderStep {
  DecoderState state;
  ad::Tensor attention;  // a_t, [n]
  ad::Tensor context;    // c_t, [2h]
  ad::Tensor p_vocab;    // [V]
  ad::Tensor p_gen;      // [1]
  ad::Tensor p_final;    // [V + #oov]
};

struct SummaryHypothesis {
  std::vector<int> tokens;  // ext ids, ending in kEos unless truncated
  std::vector<double> step_log_probs;
  double log_prob = 0.0;

  /// Length-normalized log-probability.
  double score() const { return log_prob / static_cast<double>(tokens.size()); }
  /// Tokens without a trailing kEos.
  std::vector<int> content() const;
};

EncoderStates encode(const text::Example& example, const GeneratorParams& params);

/// One decoder step. prev_token is an ext id; OOV ids feed the UNK embedding.
DecoderStep decode_step(const DecoderState& prev, int prev_token, const EncoderStates& enc,
                        const text::Example& example, const GeneratorParams& params);

/// P_final(w) = p_gen * P_vocab(w) + (1 - p_gen) * sum_{i: src_i = w} a_i.
ad::Tensor pointer_mixture(const ad::Tensor& p_vocab, const ad::Tensor& p_gen,
                           const ad::Tensor& attention, std::span<const int> source_ext_ids,
                           int ext_vocab_size);

/// Teacher-forced log P_final(targets[t]) for every t, feeding kBos then
/// targets[0..T-2] as decoder inputs. Each entry is a [1] tensor.
std::vector<ad::Tensor> target_log_probs(const text::Example& example,
                                         const GeneratorParams& params,
                                         std::span<const int> targets);

/// Gold summary ext ids followed by kEos.
std::vector<int> gold_targets(const text::Example& example);

/// Mean negative log-likelihood per target token of the gold summary + EOS.
ad::Tensor mle_loss(const text::Example& example, const GeneratorParams& params);

/// The following decoders never record on a tape.
SummaryHypothesis sample_summary(const text::Example& example, const GeneratorParams& params,
                                 std::size_t max_len, Rng& rng);
SummaryHypothesis greedy_decode(const text::Example& example, const GeneratorParams& params,
                                std::size_t max_len);
/// Beam search ranked by total log-probability; finished hypotheses leave the
/// beam. The greedy hypothesis is seeded into the finished set, so the
/// result never scores below greedy. Returns the finished hypothesis with the
/// best length-normalized score.
SummaryHypothesis beam_decode(const text::Example& example, const GeneratorParams& params,
                              std::size_t max_len, std::size_t beam);

}  // namespace advsum::gen

#endif  // ADVSUM_GENERATOR_HPP_
