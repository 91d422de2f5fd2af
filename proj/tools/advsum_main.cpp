// Copyright 2026 The advsum Authors.
// SPDX-License-Identifier: Apache-2.0

#include <cstdint>
#include <exception>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "advsum/commands.hpp"
#include "advsum/config.hpp"

namespace {

struct Common {
  std::string config_path;
  std::string out = "run";
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;

  void attach(CLI::App* app) {
    app->add_option("--config", config_path, "key = value config file");
    app->add_option("--out", out, "output directory")->capture_default_str();
    app->add_option("--seed", seed, "master seed, overrides the config");
    app->add_option("--threads", threads, "worker threads, overrides the config");
  }

  advsum::RunConfig resolve() const {
    auto c = config_path.empty() ? advsum::RunConfig() : advsum::RunConfig::load(config_path);
    if (seed) c.set("seed", std::to_string(*seed));
    if (threads) c.set("threads", std::to_string(*threads));
    c.validate();
    return c;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"advsum: adversarially trained pointer-generator summarizer"};
  app.require_subcommand(1);

  Common corpus_opts, pre_opts, adv_opts, gen_opts;
  std::string pre_corpus = "corpus", adv_corpus = "corpus", adv_ckpt = "run/checkpoints";
  std::string gen_ckpt, gen_input, gen_decode = "greedy", gen_name;
  std::vector<std::string> eval_files;
  std::string eval_out = "run";

  auto* mk = app.add_subcommand("make-corpus", "write synthetic train/valid/test files");
  corpus_opts.attach(mk);

  auto* pre = app.add_subcommand("pretrain", "MLE pre-training of G, then pre-training of D");
  pre_opts.attach(pre);
  pre->add_option("--corpus", pre_corpus, "directory with train.jsonl and valid.jsonl")
      ->capture_default_str();

  auto* adv = app.add_subcommand("adversarial", "alternating adversarial training");
  adv_opts.attach(adv);
  adv->add_option("--corpus", adv_corpus, "directory with train.jsonl and valid.jsonl")
      ->capture_default_str();
  adv->add_option("--ckpt", adv_ckpt, "directory with gen.ckpt, disc.ckpt and vocab.txt")
      ->capture_default_str();

  auto* gen = app.add_subcommand("generate", "decode summaries for a corpus file");
  gen_opts.attach(gen);
  gen->add_option("--ckpt", gen_ckpt, "generator checkpoint; vocab.txt must sit beside it")
      ->required();
  gen->add_option("--input", gen_input, "corpus file with source/summary records")->required();
  gen->add_option("--decode", gen_decode, "greedy, sample or beam")->capture_default_str();
  gen->add_option("--name", gen_name, "output file stem (default: the decode mode)");

  auto* ev = app.add_subcommand("evaluate", "ROUGE table for one or more hypothesis files");
  ev->add_option("files", eval_files, "hypothesis files")->required();
  ev->add_option("--out", eval_out, "output directory for rouge.csv")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (mk->parsed()) {
      advsum::cmd::make_corpus(corpus_opts.resolve(), corpus_opts.out);
    } else if (pre->parsed()) {
      advsum::cmd::pretrain(pre_opts.resolve(), pre_corpus, pre_opts.out);
    } else if (adv->parsed()) {
      advsum::cmd::adversarial(adv_opts.resolve(), adv_corpus, adv_ckpt, adv_opts.out);
    } else if (gen->parsed()) {
      const auto mode = advsum::cmd::parse_decode(gen_decode);
      const std::string stem = gen_name.empty() ? advsum::cmd::decode_name(mode) : gen_name;
      const auto path = std::filesystem::path(gen_opts.out) / (stem + ".jsonl");
      advsum::cmd::generate(gen_opts.resolve(), gen_ckpt, gen_input, mode, path);
      std::cout << path.string() << "\n";
    } else if (ev->parsed()) {
      std::vector<std::filesystem::path> files(eval_files.begin(), eval_files.end());
      const auto out = std::filesystem::path(eval_out) / "rouge.csv";
      const auto reports = advsum::cmd::evaluate(files, out);
      for (const auto& r : reports) {
        std::printf("%-20s R1 %6.2f  R2 %6.2f  RL %6.2f\n", r.system.c_str(), 100 * r.rouge1,
                    100 * r.rouge2, 100 * r.rougeL);
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
