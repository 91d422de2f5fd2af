// Copyright 2026 The advsum Authors.
// SPDX-License-Identifier: Apache-2.0

#include "advsum/rouge.hpp"

#include <algorithm>
#include <map>

#include "advsum/tensor.hpp"

namespace advsum::eval {

namespace {

using Gram = std::vector<std::string>;

std::map<Gram, int> ngrams(std::span<const std::string> tokens, std::size_t n) {
  std::map<Gram, int> counts;
  if (tokens.size() < n) return counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    ++counts[Gram(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                  tokens.begin() + static_cast<std::ptrdiff_t>(i + n))];
  }
  return counts;
}

double ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

std::size_t lcs_length(std::span<const std::string> a, std::span<const std::string> b) {
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

}  // namespace

RougeScore make_score(double precision, double recall) {
  RougeScore s{precision, recall, 0.0};
  if (precision + recall > 0.0) s.f1 = 2.0 * precision * recall / (precision + recall);
  return s;
}

RougeScore rouge_n(std::span<const std::string> candidate, std::span<const std::string> reference,
                   int n) {
  if (n < 1) throw ContractError("rouge_n: n must be at least 1");
  const auto un = static_cast<std::size_t>(n);
  const auto cand = ngrams(candidate, un);
  const auto ref = ngrams(reference, un);
  std::size_t overlap = 0, cand_total = 0, ref_total = 0;
  for (const auto& [g, c] : cand) {
    cand_total += static_cast<std::size_t>(c);
    auto it = ref.find(g);
    if (it != ref.end()) overlap += static_cast<std::size_t>(std::min(c, it->second));
  }
  for (const auto& [_, c] : ref) ref_total += static_cast<std::size_t>(c);
  return make_score(ratio(overlap, cand_total), ratio(overlap, ref_total));
}

RougeScore rouge_l(std::span<const std::string> candidate, std::span<const std::string> reference) {
  const std::size_t l = lcs_length(candidate, reference);
  return make_score(ratio(l, candidate.size()), ratio(l, reference.size()));
}

EvalReport evaluate_corpus(std::span<const text::Tokens> hypotheses,
                           std::span<const text::Tokens> references, const std::string& system) {
  if (hypotheses.size() != references.size()) {
    throw ContractError("evaluate_corpus: " + std::to_string(hypotheses.size()) +
                        " hypotheses vs " + std::to_string(references.size()) + " references");
  }
  if (hypotheses.empty()) throw ContractError("evaluate_corpus: empty corpus");
  EvalReport report;
  report.system = system;
  report.examples.reserve(hypotheses.size());
  for (std::size_t i = 0; i < hypotheses.size(); ++i) {
    const auto& h = hypotheses[i];
    const auto& r = references[i];
    ExampleScores s{rouge_n(h, r, 1), rouge_n(h, r, 2), rouge_l(h, r)};
    report.rouge1 += s.rouge1.f1;
    report.rouge2 += s.rouge2.f1;
    report.rougeL += s.rougeL.f1;
    report.examples.push_back(s);
  }
  const double n = static_cast<double>(hypotheses.size());
  report.rouge1 /= n;
  report.rouge2 /= n;
  report.rougeL /= n;
  return report;
}

}  // namespace advsum::eval
