// Copyright 2026 The advsum Authors.
// SPDX-License-Identifier: Apache-2.0

#include "advsum/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

namespace advsum {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const char* want) {
  throw ConfigError("key '" + key + "': expected " + want + ", got '" + value + "'");
}

template <typename T>
T parse_integer(const std::string& key, const std::string& v) {
  T out{};
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) bad_value(key, v, "an integer");
  return out;
}

std::size_t parse_count(const std::string& key, const std::string& v) {
  if (!v.empty() && v[0] == '-') bad_value(key, v, "a non-negative integer");
  return parse_integer<std::size_t>(key, v);
}

double parse_real(const std::string& key, const std::string& v) {
  double out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) bad_value(key, v, "a number");
  return out;
}

std::string fmt_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<int> parse_int_list(const std::string& key, const std::string& v) {
  std::vector<int> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_integer<int>(key, trim(item)));
  if (out.empty()) bad_value(key, v, "a comma-separated list of integers");
  return out;
}

std::string fmt_int_list(const std::vector<int>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

struct Entry {
  const char* key;
  const char* doc;
  std::function<void(RunConfig&, const std::string&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

#define ADVSUM_COUNT(name, field, doc)                                                      \
  Entry {                                                                                   \
    name, doc,                                                                              \
        [](RunConfig& c, const std::string& k, const std::string& v) {                      \
          c.field = static_cast<decltype(c.field)>(parse_count(k, v));                      \
        },                                                                                  \
        [](const RunConfig& c) { return std::to_string(c.field); }                          \
  }
#define ADVSUM_INT(name, field, doc)                                                        \
  Entry {                                                                                   \
    name, doc,                                                                              \
        [](RunConfig& c, const std::string& k, const std::string& v) {                      \
          c.field = parse_integer<decltype(c.field)>(k, v);                                 \
        },                                                                                  \
        [](const RunConfig& c) { return std::to_string(c.field); }                          \
  }
#define ADVSUM_REAL(name, field, doc)                                                       \
  Entry {                                                                                   \
    name, doc,                                                                              \
        [](RunConfig& c, const std::string& k, const std::string& v) {                      \
          c.field = parse_real(k, v);                                                       \
        },                                                                                  \
        [](const RunConfig& c) { return fmt_real(c.field); }                                \
  }

const std::vector<Entry>& table() {
  static const std::vector<Entry> entries = {
      ADVSUM_COUNT("n_train", n_train, "synthetic training examples"),
      ADVSUM_COUNT("n_valid", n_valid, "synthetic validation examples"),
      ADVSUM_COUNT("n_test", n_test, "synthetic test examples"),
      ADVSUM_INT("content_size", synthetic.content_size, "content tokens w000.."),
      ADVSUM_INT("salient_size", synthetic.salient_size, "leading content tokens that are salient"),
      ADVSUM_INT("synonym_count", synthetic.synonym_count,
                 "salient tokens rewritten to t000.. in summaries"),
      ADVSUM_INT("src_len_min", synthetic.src_len_min, "shortest synthetic source"),
      ADVSUM_INT("src_len_max", synthetic.src_len_max, "longest synthetic source"),
      ADVSUM_INT("salient_min", synthetic.salient_min, "fewest salient tokens per source"),
      ADVSUM_INT("salient_max", synthetic.salient_max, "most salient tokens per source"),
      ADVSUM_COUNT("vocab_size", vocab_size, "vocabulary cap including reserved tokens"),
      ADVSUM_COUNT("max_src_len", limits.max_src_len, "source truncation, 0 = none"),
      Entry{"max_tgt_len", "summary truncation and decoding length cap",
            [](RunConfig& c, const std::string& k, const std::string& v) {
              c.limits.max_tgt_len = parse_count(k, v);
              c.training.max_tgt_len = c.limits.max_tgt_len;
            },
            [](const RunConfig& c) { return std::to_string(c.limits.max_tgt_len); }},
      ADVSUM_INT("emb", training.gen_dims.emb, "generator embedding size"),
      ADVSUM_INT("hidden", training.gen_dims.hidden, "encoder LSTM size per direction"),
      ADVSUM_INT("dec_hidden", training.gen_dims.dec_hidden, "decoder LSTM size"),
      ADVSUM_INT("attn", training.gen_dims.attn, "attention size"),
      ADVSUM_INT("out_hidden", training.gen_dims.out_hidden, "output layer size"),
      ADVSUM_INT("d_emb", training.disc_dims.emb, "discriminator embedding size"),
      Entry{"d_widths", "discriminator window widths",
            [](RunConfig& c, const std::string& k, const std::string& v) {
              c.training.disc_dims.widths = parse_int_list(k, v);
            },
            [](const RunConfig& c) { return fmt_int_list(c.training.disc_dims.widths); }},
      ADVSUM_INT("d_filters", training.disc_dims.filters, "filters per window width"),
      ADVSUM_REAL("beta", training.beta, "policy-gradient weight in the generator objective"),
      ADVSUM_REAL("lr_g", training.lr_g, "generator learning rate"),
      ADVSUM_REAL("lr_d", training.lr_d, "discriminator learning rate"),
      ADVSUM_REAL("clip_norm", training.clip_norm, "global gradient norm cap, 0 = off"),
      ADVSUM_INT("pretrain_g_steps", training.pretrain_g_steps, "generator MLE steps"),
      ADVSUM_INT("pretrain_d_steps", training.pretrain_d_steps, "discriminator steps"),
      ADVSUM_INT("rounds", training.rounds, "adversarial rounds"),
      ADVSUM_INT("g_steps", training.g_steps, "generator steps per round"),
      ADVSUM_INT("d_steps", training.d_steps, "discriminator steps per round"),
      ADVSUM_INT("batch_size_g", training.batch_size_g, "generator batch size"),
      ADVSUM_INT("batch_size_d", training.batch_size_d, "discriminator batch size"),
      Entry{"baseline", "none or moving_average",
            [](RunConfig& c, const std::string& k, const std::string& v) {
              if (v == "none") {
                c.training.baseline = train::Baseline::kNone;
              } else if (v == "moving_average") {
                c.training.baseline = train::Baseline::kMovingAverage;
              } else {
                bad_value(k, v, "none or moving_average");
              }
            },
            [](const RunConfig& c) {
              return std::string(c.training.baseline == train::Baseline::kNone ? "none"
                                                                                : "moving_average");
            }},
      ADVSUM_REAL("baseline_decay", training.baseline_decay, "moving-average decay"),
      ADVSUM_COUNT("valid_limit", training.valid_limit,
                   "validation examples scored per round, 0 = all"),
      ADVSUM_INT("checkpoint_interval", training.checkpoint_interval,
                 "steps between intermediate checkpoints, 0 = none"),
      ADVSUM_COUNT("beam_size", beam_size, "beam width for --decode beam"),
      Entry{"seed", "master seed",
            [](RunConfig& c, const std::string& k, const std::string& v) {
              c.training.seed = parse_integer<std::uint64_t>(k, v);
            },
            [](const RunConfig& c) { return std::to_string(c.training.seed); }},
      ADVSUM_INT("threads", training.threads, "worker threads, 1 = bit-reproducible"),
  };
  return entries;
}

#undef ADVSUM_COUNT
#undef ADVSUM_INT
#undef ADVSUM_REAL

}  // namespace

RunConfig::RunConfig() { training.max_tgt_len = limits.max_tgt_len; }

void RunConfig::set(const std::string& key, const std::string& value) {
  for (const auto& e : table()) {
    if (key == e.key) {
      e.set(*this, key, value);
      return;
    }
  }
  throw ConfigError("unknown key '" + key + "'");
}

RunConfig RunConfig::parse(const std::string& text, const std::string& origin) {
  RunConfig c;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = origin + ":" + std::to_string(lineno) + ": ";
    if (eq == std::string::npos) throw ConfigError(where + "expected key = value");
    try {
      c.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const ConfigError& e) {
      throw ConfigError(where + e.what());
    }
  }
  try {
    c.validate();
  } catch (const std::exception& e) {
    throw ConfigError(origin + ": " + e.what());
  }
  return c;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path.string());
}

std::string RunConfig::echo() const {
  std::string out = "# effective configuration\n";
  for (const auto& e : table()) out += std::string(e.key) + " = " + e.get(*this) + "\n";
  return out;
}

void RunConfig::validate() const {
  if (n_train == 0 || n_valid == 0 || n_test == 0) {
    throw ContractError("n_train, n_valid and n_test must be positive");
  }
  synthetic.validate();
  if (vocab_size <= static_cast<std::size_t>(text::kNumReserved)) {
    throw ContractError("vocab_size must exceed the reserved tokens");
  }
  if (limits.max_tgt_len == 0) throw ContractError("max_tgt_len must be positive");
  if (beam_size == 0) throw ContractError("beam_size must be positive");
  auto gd = training.gen_dims;
  gd.vocab_size = text::kNumReserved;
  gd.validate();
  auto dd = training.disc_dims;
  dd.vocab_size = text::kNumReserved;
  dd.validate();
  training.validate();
}

const std::vector<RunConfig::KeyDoc>& RunConfig::keys() {
  static const std::vector<KeyDoc> docs = [] {
    std::vector<KeyDoc> out;
    for (const auto& e : table()) out.push_back({e.key, e.doc});
    return out;
  }();
  return docs;
}

}  // namespace advsum
