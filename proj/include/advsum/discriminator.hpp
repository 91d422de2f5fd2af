// Copyright 2026 The advsum Authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef ADVSUM_DISCRIMINATOR_HPP_
#define ADVSUM_DISCRIMINATOR_HPP_

#include <cstdint>
#include <span>
#include <vector>

#include "advsum/params.hpp"
#include "advsum/tensor.hpp"

// Convolutional classifier over summaries: embedding, one filter bank per
// window width with tanh and max-over-time pooling, then a 2-way softmax
// whose second class is "original" (human-written).
namespace advsum::disc {

struct DiscriminatorDims {
  int vocab_size = 0;
  int emb = 32;
  std::vector<int> widths{3, 4, 5};
  int filters = 32;  // per width

  void validate() const;
  int max_width() const;
};

/// Parameters: "embedding" [V, emb]; per width k "conv.k<k>.W" [filters,
/// k*emb] and "conv.k<k>.b" [filters]; "head.W" [2, filters*#widths] and
/// "head.b" [2].
class DiscriminatorParams {
 public:
  /// Embedding and filters ~ U(-0.1, 0.1) from Rng(seed); biases and the
  /// classifier head start at zero, so a fresh model outputs exactly 0.5.
  DiscriminatorParams(const DiscriminatorDims& dims, std::uint64_t seed);
  static DiscriminatorParams zeros(const DiscriminatorDims& dims);

  const DiscriminatorDims& dims() const { return dims_; }
  ad::ParamSet& params() { return params_; }
  const ad::ParamSet& params() const { return params_; }
  const ad::Tensor& operator[](const std::string& name) const { return params_.at(name); }
  DiscriminatorParams clone() const;

 private:
  DiscriminatorParams(const DiscriminatorDims& dims, ad::ParamSet params);
  DiscriminatorDims dims_;
  ad::ParamSet params_;
};

enum class Label { kGenerated = 0, kOriginal = 1 };

struct LabeledSummary {
  std::vector<int> ids;  // fixed-vocabulary ids
  Label label = Label::kOriginal;
};

/// Maps ext ids at or above vocab_size to kUnk.
LabeledSummary make_labeled(std::span<const int> ext_ids, int vocab_size, Label label);

/// Probability that `ids` is original, as a differentiable [1] tensor.
/// Trailing PAD is ignored: the sequence is right-padded to its real length
/// plus the largest width minus one, and only windows starting on a real
/// token are pooled, so windows made purely of padding never count.
ad::Tensor d_forward(std::span<const int> ids, const DiscriminatorParams& params);
/// Same value without recording.
double d_probability(std::span<const int> ids, const DiscriminatorParams& params);

inline constexpr double kProbClamp = 1e-7;

/// mean_pos -log D(Y) + mean_neg -log(1 - D(Y)), D clamped to
/// [1e-7, 1 - 1e-7].
ad::Tensor d_loss(std::span<const LabeledSummary> pos, std::span<const LabeledSummary> neg,
                  const DiscriminatorParams& params);

/// Fraction of the batch where (D > threshold) agrees with label == original.
double d_accuracy(std::span<const LabeledSummary> batch, const DiscriminatorParams& params,
                  double threshold = 0.5);

}  // namespace advsum::disc

#endif  // ADVSUM_DISCRIMINATOR_HPP_
