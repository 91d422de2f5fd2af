// Copyright 2026 The advsum Authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef ADVSUM_COMMANDS_HPP_
#define ADVSUM_COMMANDS_HPP_

#include <filesystem>
#include <string>
#include <vector>

#include "advsum/config.hpp"
#include "advsum/rouge.hpp"

// The pipeline behind each CLI subcommand. Run directories look like
//   <out>/config.echo  <out>/train_log.csv  <out>/checkpoints/  <out>/reports/
namespace advsum::cmd {

namespace fs = std::filesystem;

/// <out>/{train,valid,test}.jsonl from the synthetic task. Split seeds are
/// derived from the master seed with streams 1, 2 and 3.
void make_corpus(const RunConfig& config, const fs::path& out_dir);

/// Pre-trains G then D on <corpus>/train.jsonl. Writes checkpoints/gen.ckpt,
/// checkpoints/disc.ckpt, checkpoints/vocab.txt, train_log.csv and
/// reports/pretrain.csv (validation ROUGE of the pre-trained generator).
void pretrain(const RunConfig& config, const fs::path& corpus_dir, const fs::path& out_dir);

/// Loads gen.ckpt, disc.ckpt and vocab.txt from ckpt_dir and runs the
/// adversarial loop. Writes checkpoints/{final,best,disc,vocab}, train_log.csv,
/// reports/validation.csv (pretrain, best and final rows), reports/rounds.csv
/// and reports/rouge.svg.
void adversarial(const RunConfig& config, const fs::path& corpus_dir, const fs::path& ckpt_dir,
                 const fs::path& out_dir);

enum class DecodeMode { kGreedy, kSample, kBeam };
DecodeMode parse_decode(const std::string& mode);
const char* decode_name(DecodeMode mode);

/// One JSON object per example with source, reference, hypothesis and
/// logprob. The vocabulary is read from vocab.txt next to the checkpoint.
void generate(const RunConfig& config, const fs::path& ckpt, const fs::path& corpus_file,
              DecodeMode mode, const fs::path& out_file);

/// Scores hypothesis files (or plain corpus files, whose summaries then
/// serve as both hypothesis and reference). Every file must carry the same
/// references in the same order. System names are the file stems.
std::vector<eval::EvalReport> evaluate(const std::vector<fs::path>& files,
                                       const fs::path& out_csv);

}  // namespace advsum::cmd

#endif  // ADVSUM_COMMANDS_HPP_
