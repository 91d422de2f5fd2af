// Copyright 2026 The advsum Authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef ADVSUM_TEXT_HPP_
#define ADVSUM_TEXT_HPP_

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace advsum::text {

inline constexpr int kPad = 0;
inline constexpr int kUnk = 1;
inline constexpr int kBos = 2;
inline constexpr int kEos = 3;
inline constexpr int kNumReserved = 4;

/// Malformed corpus or vocabulary file. The message carries the path and line.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Tokens = std::vector<std::string>;

/// Lowercases, splits on whitespace and peels trailing . , ! ? ; : off each
/// word as separate tokens.
Tokens tokenize(std::string_view text);
std::string join(std::span<const std::string> tokens);

enum class Split { kTrain, kValid, kTest };
const char* split_name(Split s);

struct TextPair {
  Tokens source;
  Tokens summary;
};

struct Corpus {
  Split split = Split::kTrain;
  std::vector<TextPair> pairs;
};

class Vocabulary {
 public:
  /// Reserved ids only.
  Vocabulary();

  /// The max_size - 4 most frequent tokens of the corpus (source and summary
  /// sides), frequency ties broken lexicographically. Ids follow that order.
  static Vocabulary build(const Corpus& corpus, std::size_t max_size);
  static Vocabulary load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;

  int size() const { return static_cast<int>(tokens_.size()); }
  /// kUnk when absent.
  int id(const std::string& token) const;
  bool contains(const std::string& token) const { return ids_.count(token) != 0; }
  const std::string& token(int id) const { return tokens_.at(static_cast<std::size_t>(id)); }

 private:
  void push(const std::string& token);
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> ids_;
};

struct Example {
  Tokens source_tokens;
  Tokens summary_tokens;
  std::vector<int> source_ids;       // fixed vocab, kUnk for OOV
  std::vector<int> source_ext_ids;   // OOV source tokens -> V, V+1, ...
  std::vector<int> summary_ext_ids;  // fixed, then this example's OOVs, else kUnk
  Tokens oov_tokens;                 // oov_tokens[i] has ext id V + i
  int vocab_size = 0;

  int ext_vocab_size() const { return vocab_size + static_cast<int>(oov_tokens.size()); }
};

/// Zero means "no limit".
struct LengthLimits {
  std::size_t max_src_len = 0;
  std::size_t max_tgt_len = 0;
};

Example encode_example(const Tokens& source, const Tokens& summary, const Vocabulary& vocab,
                       LengthLimits limits = {});
std::vector<Example> encode_corpus(const Corpus& corpus, const Vocabulary& vocab,
                                   LengthLimits limits = {});

/// Maps ext ids back to strings through the vocabulary and the example's OOVs.
Tokens decode_ids(std::span<const int> ids, const Vocabulary& vocab, const Example& example);

/// One JSON object per line with string fields "source" and "summary".
Corpus load_jsonl(const std::filesystem::path& path, Split split = Split::kTrain);
void write_jsonl(const Corpus& corpus, const std::filesystem::path& path);

/// Copy-and-rewrite task. Content tokens are w000..w{content_size-1}; the
/// first salient_size of them are salient and the first synonym_count
/// salient tokens rewrite to target-only tokens t000.. in summaries.
struct SyntheticSpec {
  int content_size = 200;
  int salient_size = 20;
  int synonym_count = 10;
  int src_len_min = 20;
  int src_len_max = 40;
  int salient_min = 3;
  int salient_max = 6;

  void validate() const;
};

std::string content_token(int i);
std::string synonym_token(int i);

/// Each example: a source of length L ~ U[src_len_min, src_len_max] holding
/// k ~ U[salient_min, salient_max] distinct salient tokens at random
/// positions among non-salient fillers; the summary lists the salient tokens
/// in source order, synonyms substituted. Driven by Rng(seed).
Corpus make_synthetic(std::uint64_t seed, std::size_t n_examples, const SyntheticSpec& spec,
                      Split split = Split::kTrain);

}  // namespace advsum::text

#endif  // ADVSUM_TEXT_HPP_
