// Copyright 2026 The advsum Authors.
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "advsum/report.hpp"
#include "advsum/rng.hpp"
#include "advsum/rouge.hpp"
#include "rouge_cases.hpp"

using namespace advsum;

namespace {

// Exponential-time LCS, only for short inputs.
std::size_t naive_lcs(const text::Tokens& a, std::size_t i, const text::Tokens& b, std::size_t j) {
  if (i == a.size() || j == b.size()) return 0;
  if (a[i] == b[j]) return 1 + naive_lcs(a, i + 1, b, j + 1);
  return std::max(naive_lcs(a, i + 1, b, j), naive_lcs(a, i, b, j + 1));
}

text::Tokens random_tokens(Rng& rng, std::size_t max_len, int alphabet) {
  text::Tokens t(rng.index(max_len + 1));
  for (auto& s : t) s = std::string(1, static_cast<char>('a' + rng.int_in(0, alphabet - 1)));
  return t;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("hand-worked scores") {
  for (const auto& c : testing::rouge_cases()) {
    CAPTURE(c.name);
    CHECK(testing::case_matches(c, 1e-9));
  }
}

TEST_CASE("rouge_n rejects n below one") {
  text::Tokens a{"a"};
  CHECK_THROWS_AS(eval::rouge_n(a, a, 0), ContractError);
}

TEST_CASE("rouge_l agrees with a naive LCS") {
  Rng rng(3);
  for (int trial = 0; trial < 300; ++trial) {
    auto a = random_tokens(rng, 8, 4), b = random_tokens(rng, 8, 4);
    const double l = static_cast<double>(naive_lcs(a, 0, b, 0));
    auto s = eval::rouge_l(a, b);
    CHECK(s.precision == doctest::Approx(a.empty() ? 0 : l / a.size()).epsilon(1e-12));
    CHECK(s.recall == doctest::Approx(b.empty() ? 0 : l / b.size()).epsilon(1e-12));
  }
}

TEST_CASE("score properties") {
  Rng rng(4);
  for (int trial = 0; trial < 300; ++trial) {
    auto a = random_tokens(rng, 7, 5), b = random_tokens(rng, 7, 5);
    for (int n = 1; n <= 3; ++n) {
      auto s = eval::rouge_n(a, b, n);
      CHECK(s.f1 >= 0.0);
      CHECK(s.f1 <= 1.0);
      CHECK((s.f1 == 0.0) == (s.precision == 0.0));
      if (static_cast<std::size_t>(n) > std::min(a.size(), b.size())) CHECK(s.f1 == 0.0);
      if (s.precision + s.recall > 0) {
        CHECK(s.f1 == doctest::Approx(2 * s.precision * s.recall / (s.precision + s.recall)));
      }
    }
    auto perm = a;
    rng.shuffle(perm);
    CHECK(eval::rouge_n(perm, b, 1).f1 == eval::rouge_n(a, b, 1).f1);
  }
  // Order matters beyond unigrams.
  text::Tokens ref{"a", "b", "c"}, rev{"c", "b", "a"};
  CHECK(eval::rouge_n(rev, ref, 1).f1 == 1.0);
  CHECK(eval::rouge_n(rev, ref, 2).f1 == 0.0);
  CHECK(eval::rouge_l(rev, ref).f1 < 1.0);
}

TEST_CASE("evaluate_corpus") {
  text::Tokens tcs{"the", "cat", "sat"}, tc{"the", "cat"};
  SUBCASE("identical pairs average to one") {
    std::vector<text::Tokens> h{tcs, tc}, r{tcs, tc};
    auto rep = eval::evaluate_corpus(h, r);
    CHECK(rep.rouge1 == 1.0);
    CHECK(rep.rouge2 == 1.0);
    CHECK(rep.rougeL == 1.0);
  }
  SUBCASE("single pair") {
    std::vector<text::Tokens> h{tcs}, r{tc};
    auto rep = eval::evaluate_corpus(h, r, "x");
    CHECK(rep.system == "x");
    CHECK(rep.rouge1 == doctest::Approx(0.8).epsilon(1e-12));
    CHECK(rep.rouge2 == doctest::Approx(2.0 / 3).epsilon(1e-12));
    CHECK(rep.rougeL == doctest::Approx(0.8).epsilon(1e-12));
  }
  SUBCASE("two pairs average") {
    std::vector<text::Tokens> h{tcs, {"a", "a"}}, r{tc, {"a"}};
    auto rep = eval::evaluate_corpus(h, r);
    CHECK(rep.examples.size() == 2);
    CHECK(rep.rouge1 == doctest::Approx((0.8 + 2.0 / 3) / 2).epsilon(1e-12));
    CHECK(rep.rouge2 == doctest::Approx((2.0 / 3 + 0.0) / 2).epsilon(1e-12));
  }
  SUBCASE("errors") {
    std::vector<text::Tokens> h{tcs}, r{};
    CHECK_THROWS_AS(eval::evaluate_corpus(h, r), ContractError);
    CHECK_THROWS_AS(eval::evaluate_corpus(r, r), ContractError);
  }
}

TEST_CASE("report emission") {
  eval::EvalReport a;
  a.system = "pretrain";
  a.rouge1 = 0.3882;
  a.rouge2 = 0.1681;
  a.rougeL = 0.3571;
  eval::EvalReport b = a;
  b.system = "adversarial";
  b.rouge1 = 0.39924;
  b.rouge2 = 0.17649;
  b.rougeL = 1.0;

  std::vector<eval::EvalReport> one{a};
  CHECK(eval::format_report(one) == "system,rouge1,rouge2,rougeL\npretrain,38.82,16.81,35.71\n");
  std::vector<eval::EvalReport> two{a, b};
  CHECK(eval::format_report(two) ==
        "system,rouge1,rouge2,rougeL\npretrain,38.82,16.81,35.71\nadversarial,39.92,17.65,100.00\n");
  CHECK_THROWS_AS(eval::format_report({}), ContractError);

  const auto dir = std::filesystem::temp_directory_path() / "advsum_report_test";
  std::filesystem::create_directories(dir);
  eval::emit_report(two, dir / "a.csv");
  eval::emit_report(two, dir / "b.csv");
  CHECK(slurp(dir / "a.csv") == slurp(dir / "b.csv"));
  CHECK_THROWS_AS(eval::emit_report(two, dir / "missing" / "x.csv"), std::runtime_error);

  std::vector<eval::RoundScore> rounds{{0, 0.2, 0.1, 0.2}, {1, 0.3, 0.15, 0.25}};
  const auto svg = eval::format_chart(rounds);
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(svg.find("polyline") != std::string::npos);
  CHECK(svg.find("href") == std::string::npos);
  CHECK(svg == eval::format_chart(rounds));
  std::filesystem::remove_all(dir);
}
