// Copyright 2026 The advsum Authors.
// SPDX-License-Identifier: Apache-2.0

#include "advsum/text.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>

#include <json.hpp>

#include "advsum/rng.hpp"
#include "advsum/tensor.hpp"

namespace advsum::text {

namespace {

const char* const kReservedTokens[kNumReserved] = {"<pad>", "<unk>", "<s>", "</s>"};

bool is_split_punct(char c) {
  return c == '.' || c == ',' || c == '!' || c == '?' || c == ';' || c == ':';
}

}  // namespace

Tokens tokenize(std::string_view text) {
  Tokens out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t j = i;
    while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j]))) ++j;
    if (j == i) break;
    std::string word(text.substr(i, j - i));
    for (char& c : word) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    std::size_t core = word.size();
    while (core > 0 && is_split_punct(word[core - 1])) --core;
    if (core > 0) out.push_back(word.substr(0, core));
    for (std::size_t p = core; p < word.size(); ++p) out.emplace_back(1, word[p]);
    i = j;
  }
  return out;
}

std::string join(std::span<const std::string> tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += ' ';
    out += tokens[i];
  }
  return out;
}

const char* split_name(Split s) {
  switch (s) {
    case Split::kTrain: return "train";
    case Split::kValid: return "valid";
    case Split::kTest: return "test";
  }
  return "?";
}

Vocabulary::Vocabulary() {
  for (const char* t : kReservedTokens) push(t);
}

void Vocabulary::push(const std::string& token) {
  ids_.emplace(token, static_cast<int>(tokens_.size()));
  tokens_.push_back(token);
}

int Vocabulary::id(const std::string& token) const {
  auto it = ids_.find(token);
  return it == ids_.end() ? kUnk : it->second;
}

Vocabulary Vocabulary::build(const Corpus& corpus, std::size_t max_size) {
  if (max_size <= static_cast<std::size_t>(kNumReserved)) {
    throw ContractError("build_vocab: max_size must exceed the 4 reserved ids");
  }
  if (corpus.pairs.empty()) throw ContractError("build_vocab: empty corpus");
  std::map<std::string, std::size_t> counts;
  Vocabulary reserved;
  for (const auto& pair : corpus.pairs) {
    for (const auto* side : {&pair.source, &pair.summary}) {
      for (const auto& t : *side) {
        if (!reserved.contains(t)) ++counts[t];
      }
    }
  }
  std::vector<std::pair<std::string, std::size_t>> ranked(counts.begin(), counts.end());
  // counts is already sorted by token, so a stable sort on frequency keeps
  // the lexicographic tie-break.
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  Vocabulary v;
  const std::size_t keep = std::min(ranked.size(), max_size - kNumReserved);
  for (std::size_t i = 0; i < keep; ++i) v.push(ranked[i].first);
  return v;
}

void Vocabulary::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write vocabulary " + path.string());
  for (const auto& t : tokens_) out << t << '\n';
}

Vocabulary Vocabulary::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read vocabulary " + path.string());
  Vocabulary v;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (lineno <= static_cast<std::size_t>(kNumReserved)) {
      if (line != kReservedTokens[lineno - 1]) {
        throw FormatError(path.string() + ":" + std::to_string(lineno) + ": expected reserved token " +
                          kReservedTokens[lineno - 1]);
      }
      continue;
    }
    if (line.empty() || v.contains(line)) {
      throw FormatError(path.string() + ":" + std::to_string(lineno) + ": empty or duplicate token");
    }
    v.push(line);
  }
  if (lineno < static_cast<std::size_t>(kNumReserved)) {
    throw FormatError(path.string() + ": truncated vocabulary");
  }
  return v;
}

Example encode_example(const Tokens& source, const Tokens& summary, const Vocabulary& vocab,
                       LengthLimits limits) {
  if (source.empty() || summary.empty()) {
    throw ContractError("encode_example: source and summary must be nonempty");
  }
  Example ex;
  ex.vocab_size = vocab.size();
  const std::size_t n =
      limits.max_src_len ? std::min(source.size(), limits.max_src_len) : source.size();
  const std::size_t m =
      limits.max_tgt_len ? std::min(summary.size(), limits.max_tgt_len) : summary.size();
  ex.source_tokens.assign(source.begin(), source.begin() + static_cast<long>(n));
  ex.summary_tokens.assign(summary.begin(), summary.begin() + static_cast<long>(m));

  std::unordered_map<std::string, int> oov;
  for (const auto& t : ex.source_tokens) {
    const int id = vocab.id(t);
    ex.source_ids.push_back(id);
    if (id != kUnk || t == kReservedTokens[kUnk]) {
      ex.source_ext_ids.push_back(id);
      continue;
    }
    auto [it, inserted] = oov.emplace(t, ex.vocab_size + static_cast<int>(ex.oov_tokens.size()));
    if (inserted) ex.oov_tokens.push_back(t);
    ex.source_ext_ids.push_back(it->second);
  }
  for (const auto& t : ex.summary_tokens) {
    const int id = vocab.id(t);
    if (id != kUnk) {
      ex.summary_ext_ids.push_back(id);
    } else if (auto it = oov.find(t); it != oov.end()) {
      ex.summary_ext_ids.push_back(it->second);
    } else {
      ex.summary_ext_ids.push_back(kUnk);
    }
  }
  return ex;
}

std::vector<Example> encode_corpus(const Corpus& corpus, const Vocabulary& vocab,
                                   LengthLimits limits) {
  std::vector<Example> out;
  out.reserve(corpus.pairs.size());
  for (const auto& p : corpus.pairs) out.push_back(encode_example(p.source, p.summary, vocab, limits));
  return out;
}

Tokens decode_ids(std::span<const int> ids, const Vocabulary& vocab, const Example& example) {
  Tokens out;
  out.reserve(ids.size());
  for (int id : ids) {
    if (id >= 0 && id < vocab.size()) {
      out.push_back(vocab.token(id));
    } else if (id >= vocab.size() && id < example.ext_vocab_size()) {
      out.push_back(example.oov_tokens[static_cast<std::size_t>(id - vocab.size())]);
    } else {
      throw ContractError("decode_ids: id " + std::to_string(id) + " outside the extended vocabulary");
    }
  }
  return out;
}

Corpus load_jsonl(const std::filesystem::path& path, Split split) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read corpus " + path.string());
  Corpus corpus;
  corpus.split = split;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string where = path.string() + ":" + std::to_string(lineno) + ": ";
    nlohmann::json rec;
    try {
      rec = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw FormatError(where + "malformed record (" + e.what() + ")");
    }
    if (!rec.is_object()) throw FormatError(where + "record is not an object");
    TextPair pair;
    for (const char* field : {"source", "summary"}) {
      auto it = rec.find(field);
      if (it == rec.end()) throw FormatError(where + "missing field \"" + field + "\"");
      if (!it->is_string()) throw FormatError(where + "field \"" + field + "\" is not a string");
      (std::string(field) == "source" ? pair.source : pair.summary) = tokenize(it->get<std::string>());
    }
    if (pair.source.empty() || pair.summary.empty()) {
      throw FormatError(where + "source and summary must contain tokens");
    }
    corpus.pairs.push_back(std::move(pair));
  }
  if (corpus.pairs.empty()) throw ContractError("load_jsonl: " + path.string() + " holds no records");
  return corpus;
}

void write_jsonl(const Corpus& corpus, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write corpus " + path.string());
  for (const auto& p : corpus.pairs) {
    nlohmann::json rec{{"source", join(p.source)}, {"summary", join(p.summary)}};
    out << rec.dump() << '\n';
  }
  if (!out) throw std::runtime_error("failed writing corpus " + path.string());
}

void SyntheticSpec::validate() const {
  auto fail = [](const std::string& what) { throw ContractError("synthetic spec: " + what); };
  if (salient_size < 1 || salient_size >= content_size) fail("need 1 <= salient_size < content_size");
  if (synonym_count < 0 || synonym_count > salient_size) fail("need 0 <= synonym_count <= salient_size");
  if (src_len_min < 1 || src_len_max < src_len_min) fail("invalid source length range");
  if (salient_min < 1 || salient_max < salient_min) fail("invalid salient count range");
  if (salient_max > salient_size) fail("salient_max exceeds salient_size");
  if (salient_max > src_len_min) fail("salient_max exceeds src_len_min");
}

std::string content_token(int i) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "w%03d", i);
  return buf;
}

std::string synonym_token(int i) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "t%03d", i);
  return buf;
}

Corpus make_synthetic(std::uint64_t seed, std::size_t n_examples, const SyntheticSpec& spec,
                      Split split) {
  spec.validate();
  if (n_examples == 0) throw ContractError("make_synthetic: n_examples must be positive");
  Rng rng(seed);
  Corpus corpus;
  corpus.split = split;
  const auto fillers = static_cast<std::size_t>(spec.content_size - spec.salient_size);
  std::vector<int> salient(static_cast<std::size_t>(spec.salient_size));
  for (std::size_t e = 0; e < n_examples; ++e) {
    const int len = rng.int_in(spec.src_len_min, spec.src_len_max);
    const int k = rng.int_in(spec.salient_min, spec.salient_max);
    std::vector<int> source;
    for (int i = 0; i < len - k; ++i) {
      source.push_back(spec.salient_size + static_cast<int>(rng.index(fillers)));
    }
    std::iota(salient.begin(), salient.end(), 0);
    for (int i = 0; i < k; ++i) {
      const auto j = static_cast<std::size_t>(i) + rng.index(salient.size() - static_cast<std::size_t>(i));
      std::swap(salient[static_cast<std::size_t>(i)], salient[j]);
    }
    for (int i = 0; i < k; ++i) {
      const auto pos = rng.index(source.size() + 1);
      source.insert(source.begin() + static_cast<long>(pos), salient[static_cast<std::size_t>(i)]);
    }
    TextPair pair;
    for (int w : source) {
      pair.source.push_back(content_token(w));
      if (w < spec.salient_size) {
        pair.summary.push_back(w < spec.synonym_count ? synonym_token(w) : content_token(w));
      }
    }
    corpus.pairs.push_back(std::move(pair));
  }
  return corpus;
}

}  // namespace advsum::text
