// Copyright 2026 The advsum Authors.
// SPDX-License-Identifier: Apache-2.0

#include "advsum/report.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "advsum/tensor.hpp"

namespace advsum::eval {

namespace {

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

void write_file(const std::string& body, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << body;
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace

std::string format_report(std::span<const EvalReport> reports) {
  if (reports.empty()) throw ContractError("emit_report: no systems");
  std::string out = "system,rouge1,rouge2,rougeL\n";
  for (const auto& r : reports) {
    out += r.system + "," + fixed(100 * r.rouge1, 2) + "," + fixed(100 * r.rouge2, 2) + "," +
           fixed(100 * r.rougeL, 2) + "\n";
  }
  return out;
}

void emit_report(std::span<const EvalReport> reports, const std::filesystem::path& path) {
  write_file(format_report(reports), path);
}

std::string format_chart(std::span<const RoundScore> rounds) {
  constexpr double kW = 480, kH = 300, kLeft = 50, kRight = 110, kTop = 20, kBottom = 40;
  const double pw = kW - kLeft - kRight, ph = kH - kTop - kBottom;
  int last = 1;
  for (const auto& r : rounds) last = std::max(last, r.round);
  auto x = [&](int round) { return kLeft + pw * round / last; };
  auto y = [&](double score) { return kTop + ph * (1.0 - score); };

  std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"480\" height=\"300\" "
                  "font-family=\"sans-serif\" font-size=\"11\">\n";
  s += "<rect width=\"480\" height=\"300\" fill=\"white\"/>\n";
  s += "<line x1=\"" + fixed(kLeft, 1) + "\" y1=\"" + fixed(kTop + ph, 1) + "\" x2=\"" +
       fixed(kLeft + pw, 1) + "\" y2=\"" + fixed(kTop + ph, 1) + "\" stroke=\"black\"/>\n";
  s += "<line x1=\"" + fixed(kLeft, 1) + "\" y1=\"" + fixed(kTop, 1) + "\" x2=\"" +
       fixed(kLeft, 1) + "\" y2=\"" + fixed(kTop + ph, 1) + "\" stroke=\"black\"/>\n";
  for (int tick = 0; tick <= 100; tick += 25) {
    s += "<text x=\"" + fixed(kLeft - 6, 1) + "\" y=\"" + fixed(y(tick / 100.0) + 4, 1) +
         "\" text-anchor=\"end\">" + std::to_string(tick) + "</text>\n";
  }
  s += "<text x=\"" + fixed(kLeft + pw / 2, 1) + "\" y=\"" + fixed(kH - 8, 1) +
       "\" text-anchor=\"middle\">round</text>\n";

  struct Series {
    const char* name;
    const char* color;
    double RoundScore::*field;
  };
  const Series series[] = {{"ROUGE-1", "#1f77b4", &RoundScore::rouge1},
                           {"ROUGE-2", "#d62728", &RoundScore::rouge2},
                           {"ROUGE-L", "#2ca02c", &RoundScore::rougeL}};
  int row = 0;
  for (const auto& ser : series) {
    if (!rounds.empty()) {
      s += "<polyline fill=\"none\" stroke=\"" + std::string(ser.color) + "\" points=\"";
      for (std::size_t i = 0; i < rounds.size(); ++i) {
        if (i) s += " ";
        s += fixed(x(rounds[i].round), 1) + "," + fixed(y(rounds[i].*ser.field), 1);
      }
      s += "\"/>\n";
    }
    const double ly = kTop + 14 + 16 * row++;
    s += "<line x1=\"" + fixed(kW - kRight + 10, 1) + "\" y1=\"" + fixed(ly - 4, 1) + "\" x2=\"" +
         fixed(kW - kRight + 28, 1) + "\" y2=\"" + fixed(ly - 4, 1) + "\" stroke=\"" +
         ser.color + "\"/>\n";
    s += "<text x=\"" + fixed(kW - kRight + 32, 1) + "\" y=\"" + fixed(ly, 1) + "\">" + ser.name +
         "</text>\n";
  }
  s += "</svg>\n";
  return s;
}

void emit_chart(std::span<const RoundScore> rounds, const std::filesystem::path& path) {
  write_file(format_chart(rounds), path);
}

}  // namespace advsum::eval
