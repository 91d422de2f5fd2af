// Copyright 2026 The advsum Authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef ADVSUM_TESTS_ROUGE_CASES_HPP_
#define ADVSUM_TESTS_ROUGE_CASES_HPP_

#include <cmath>
#include <string>
#include <vector>

#include "advsum/rouge.hpp"

namespace advsum::testing {

// Hand-worked scores, shared with the acceptance binary.
struct RougeCase {
  std::string name;
  text::Tokens cand;
  text::Tokens ref;
  int n;  // 0 means ROUGE-L
  double p, r, f1;
};

inline std::vector<RougeCase> rouge_cases() {
  const text::Tokens tcs{"the", "cat", "sat"}, tc{"the", "cat"};
  return {
      {"identical unigram", tcs, tcs, 1, 1, 1, 1},
      {"identical bigram", tcs, tcs, 2, 1, 1, 1},
      {"identical lcs", tcs, tcs, 0, 1, 1, 1},
      {"the cat sat / the cat, n=1", tcs, tc, 1, 2.0 / 3, 1, 0.8},
      {"the cat sat / the cat, n=2", tcs, tc, 2, 0.5, 1, 2.0 / 3},
      {"the cat sat / the cat, lcs", tcs, tc, 0, 2.0 / 3, 1, 0.8},
      {"clipping a a / a", {"a", "a"}, {"a"}, 1, 0.5, 1, 2.0 / 3},
      {"disjoint unigram", {"x", "y"}, {"p", "q", "r"}, 1, 0, 0, 0},
      {"disjoint bigram", {"x", "y"}, {"p", "q", "r"}, 2, 0, 0, 0},
      {"disjoint lcs", {"x", "y"}, {"p", "q", "r"}, 0, 0, 0, 0},
      {"n beyond length", {"a", "b"}, {"a", "b", "c"}, 3, 0, 0, 0},
      {"empty candidate", {}, {"a"}, 1, 0, 0, 0},
  };
}

inline eval::RougeScore score_case(const RougeCase& c) {
  return c.n == 0 ? eval::rouge_l(c.cand, c.ref) : eval::rouge_n(c.cand, c.ref, c.n);
}

inline bool case_matches(const RougeCase& c, double tol) {
  const auto s = score_case(c);
  return std::abs(s.precision - c.p) <= tol && std::abs(s.recall - c.r) <= tol &&
         std::abs(s.f1 - c.f1) <= tol;
}

}  // namespace advsum::testing

#endif  // ADVSUM_TESTS_ROUGE_CASES_HPP_
