// Copyright 2026 The advsum Authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef ADVSUM_REPORT_HPP_
#define ADVSUM_REPORT_HPP_

#include <filesystem>
#include <span>
#include <string>

#include "advsum/rouge.hpp"

namespace advsum::eval {

/// "system,rouge1,rouge2,rougeL" then one row per report in the given order,
/// scores scaled by 100 and printed with two decimals.
std::string format_report(std::span<const EvalReport> reports);
/// Writes format_report to `path`; throws std::runtime_error naming the path.
void emit_report(std::span<const EvalReport> reports, const std::filesystem::path& path);

struct RoundScore {
  int round = 0;
  double rouge1 = 0.0;
  double rouge2 = 0.0;
  double rougeL = 0.0;
};

/// Self-contained SVG line chart of validation ROUGE (x100) per round.
std::string format_chart(std::span<const RoundScore> rounds);
void emit_chart(std::span<const RoundScore> rounds, const std::filesystem::path& path);

}  // namespace advsum::eval

#endif  // ADVSUM_REPORT_HPP_
