// Copyright 2026 The advsum Authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef ADVSUM_CONFIG_HPP_
#define ADVSUM_CONFIG_HPP_

#include <cstddef>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "advsum/text.hpp"
#include "advsum/training.hpp"

namespace advsum {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Everything a run needs. Read from a flat "key = value" file where '#'
/// starts a comment; keys not listed by RunConfig::keys() are rejected.
struct RunConfig {
  std::size_t n_train = 2000;
  std::size_t n_valid = 200;
  std::size_t n_test = 200;
  text::SyntheticSpec synthetic;
  std::size_t vocab_size = 5000;  // cap, reserved ids included
  text::LengthLimits limits{50, 12};
  train::TrainingConfig training;
  std::size_t beam_size = 4;

  RunConfig();

  /// Parses `text`; `origin` names the source in error messages.
  static RunConfig parse(const std::string& text, const std::string& origin = "<config>");
  static RunConfig load(const std::filesystem::path& path);

  /// Applies one assignment. Throws ConfigError for unknown keys or bad values.
  void set(const std::string& key, const std::string& value);
  /// Every key with its current value, one "key = value" line each, in
  /// documentation order. Parsing the echo reproduces this config exactly.
  std::string echo() const;
  void validate() const;

  struct KeyDoc {
    std::string key;
    std::string doc;
  };
  static const std::vector<KeyDoc>& keys();
};

}  // namespace advsum

#endif  // ADVSUM_CONFIG_HPP_
