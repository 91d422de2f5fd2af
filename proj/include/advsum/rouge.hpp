// Copyright 2026 The advsum Authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef ADVSUM_ROUGE_HPP_
#define ADVSUM_ROUGE_HPP_

#include <span>
#include <string>
#include <vector>

#include "advsum/tensor.hpp"
#include "advsum/text.hpp"

// ROUGE-N and ROUGE-L over whitespace tokens, compared as exact strings. No
// stemming or stopword removal. Scores live in [0, 1].
namespace advsum::eval {

struct RougeScore {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

/// f1 = 2PR / (P + R), or 0 when P + R == 0.
RougeScore make_score(double precision, double recall);

/// Clipped n-gram overlap. Throws ContractError when n < 1.
RougeScore rouge_n(std::span<const std::string> candidate, std::span<const std::string> reference,
                   int n);
/// Longest common subsequence over the whole sequence.
RougeScore rouge_l(std::span<const std::string> candidate, std::span<const std::string> reference);

struct ExampleScores {
  RougeScore rouge1;
  RougeScore rouge2;
  RougeScore rougeL;
};

struct EvalReport {
  std::string system;
  std::vector<ExampleScores> examples;
  // Arithmetic means of the per-example F1.
  double rouge1 = 0.0;
  double rouge2 = 0.0;
  double rougeL = 0.0;
};

/// Aligned by index; sizes must match and be non-zero.
EvalReport evaluate_corpus(std::span<const text::Tokens> hypotheses,
                           std::span<const text::Tokens> references,
                           const std::string& system = "system");

}  // namespace advsum::eval

#endif  // ADVSUM_ROUGE_HPP_
