// Copyright 2026 The advsum Authors.
// SPDX-License-Identifier: Apache-2.0

#include "advsum/commands.hpp"

#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "advsum/params.hpp"
#include "advsum/report.hpp"
#include "advsum/training.hpp"

namespace advsum::cmd {

namespace {

constexpr std::uint64_t kStreamSample = 30;

struct RunDir {
  fs::path root;
  fs::path checkpoints() const { return root / "checkpoints"; }
  fs::path reports() const { return root / "reports"; }
};

RunDir open_run_dir(const RunConfig& config, const fs::path& out) {
  RunDir d{out};
  fs::create_directories(d.checkpoints());
  fs::create_directories(d.reports());
  std::ofstream echo(out / "config.echo", std::ios::binary);
  if (!echo) throw std::runtime_error("cannot write " + (out / "config.echo").string());
  echo << config.echo();
  return d;
}

fs::path require_file(const fs::path& p) {
  if (!fs::is_regular_file(p)) throw std::runtime_error("missing file " + p.string());
  return p;
}

std::vector<text::Example> load_split(const RunConfig& config, const fs::path& corpus_dir,
                                      text::Split split, const text::Vocabulary& vocab) {
  const auto path = require_file(corpus_dir / (std::string(text::split_name(split)) + ".jsonl"));
  return text::encode_corpus(text::load_jsonl(path, split), vocab, config.limits);
}

void write_text(const std::string& body, const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << body;
}

}  // namespace

void make_corpus(const RunConfig& config, const fs::path& out_dir) {
  config.validate();
  fs::create_directories(out_dir);
  const std::pair<text::Split, std::size_t> splits[] = {{text::Split::kTrain, config.n_train},
                                                        {text::Split::kValid, config.n_valid},
                                                        {text::Split::kTest, config.n_test}};
  std::uint64_t stream = 1;
  for (const auto& [split, n] : splits) {
    const auto corpus =
        text::make_synthetic(derive_seed(config.training.seed, stream++), n, config.synthetic, split);
    text::write_jsonl(corpus, out_dir / (std::string(text::split_name(split)) + ".jsonl"));
  }
  write_text(config.echo(), out_dir / "config.echo");
}

void pretrain(const RunConfig& config, const fs::path& corpus_dir, const fs::path& out_dir) {
  config.validate();
  const auto train_path = require_file(corpus_dir / "train.jsonl");
  const auto valid_path = require_file(corpus_dir / "valid.jsonl");
  const auto train_corpus = text::load_jsonl(train_path, text::Split::kTrain);
  const auto vocab = text::Vocabulary::build(train_corpus, config.vocab_size);
  const auto train_ex = text::encode_corpus(train_corpus, vocab, config.limits);
  const auto valid_ex =
      text::encode_corpus(text::load_jsonl(valid_path, text::Split::kValid), vocab, config.limits);

  const RunDir run = open_run_dir(config, out_dir);
  vocab.save(run.checkpoints() / "vocab.txt");
  const auto& tc = config.training;
  auto gen = train::init_generator(tc, vocab.size());
  auto disc = train::init_discriminator(tc, vocab.size());
  train::TrainLog log(run.root / "train_log.csv");

  train::pretrain_generator(train_ex, gen, tc, log, [&](const std::string& phase, long step) {
    ad::save_checkpoint(gen.params(),
                        run.checkpoints() / (phase + "_step" + std::to_string(step) + ".ckpt"));
  });
  ad::save_checkpoint(gen.params(), run.checkpoints() / "gen.ckpt");
  train::pretrain_discriminator(train_ex, gen, disc, tc, log,
                                [&](const std::string& phase, long step) {
                                  ad::save_checkpoint(disc.params(),
                                                      run.checkpoints() /
                                                          (phase + "_step" +
                                                           std::to_string(step) + ".ckpt"));
                                });
  ad::save_checkpoint(disc.params(), run.checkpoints() / "disc.ckpt");

  const std::vector<eval::EvalReport> reports{train::evaluate_generator(
      valid_ex, gen, vocab, config.limits.max_tgt_len, tc.valid_limit, tc.threads, "pretrain")};
  eval::emit_report(reports, run.reports() / "pretrain.csv");
}

void adversarial(const RunConfig& config, const fs::path& corpus_dir, const fs::path& ckpt_dir,
                 const fs::path& out_dir) {
  config.validate();
  const auto vocab = text::Vocabulary::load(require_file(ckpt_dir / "vocab.txt"));
  const auto train_ex = load_split(config, corpus_dir, text::Split::kTrain, vocab);
  const auto valid_ex = load_split(config, corpus_dir, text::Split::kValid, vocab);
  const auto& tc = config.training;
  auto gen = train::init_generator(tc, vocab.size());
  auto disc = train::init_discriminator(tc, vocab.size());
  ad::load_checkpoint_into(gen.params(), require_file(ckpt_dir / "gen.ckpt"));
  ad::load_checkpoint_into(disc.params(), require_file(ckpt_dir / "disc.ckpt"));

  const RunDir run = open_run_dir(config, out_dir);
  vocab.save(run.checkpoints() / "vocab.txt");
  train::TrainLog log(run.root / "train_log.csv");
  auto result = train::adversarial_loop(
      train_ex, valid_ex, vocab, gen, disc, tc, log, [&](const std::string& phase, long step) {
        ad::save_checkpoint(gen.params(),
                            run.checkpoints() / (phase + "_step" + std::to_string(step) + ".ckpt"));
      });
  ad::save_checkpoint(gen.params(), run.checkpoints() / "final.ckpt");
  ad::save_checkpoint(result.best.params(), run.checkpoints() / "best.ckpt");
  ad::save_checkpoint(disc.params(), run.checkpoints() / "disc.ckpt");

  const auto& rounds = result.rounds;
  auto row = [](const std::string& name, const eval::RoundScore& r) {
    eval::EvalReport rep;
    rep.system = name;
    rep.rouge1 = r.rouge1;
    rep.rouge2 = r.rouge2;
    rep.rougeL = r.rougeL;
    return rep;
  };
  const std::vector<eval::EvalReport> summary{
      row("pretrain", rounds.front()),
      row("best", rounds[static_cast<std::size_t>(result.best_round)]),
      row("final", rounds.back())};
  eval::emit_report(summary, run.reports() / "validation.csv");

  std::string per_round = "round,rouge1,rouge2,rougeL\n";
  for (const auto& r : rounds) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "%d,%.9g,%.9g,%.9g\n", r.round, r.rouge1, r.rouge2, r.rougeL);
    per_round += buf;
  }
  write_text(per_round, run.reports() / "rounds.csv");
  eval::emit_chart(rounds, run.reports() / "rouge.svg");
}

DecodeMode parse_decode(const std::string& mode) {
  if (mode == "greedy") return DecodeMode::kGreedy;
  if (mode == "sample") return DecodeMode::kSample;
  if (mode == "beam") return DecodeMode::kBeam;
  throw ContractError("unknown decode mode '" + mode + "' (greedy, sample or beam)");
}

const char* decode_name(DecodeMode mode) {
  switch (mode) {
    case DecodeMode::kGreedy:
      return "greedy";
    case DecodeMode::kSample:
      return "sample";
    case DecodeMode::kBeam:
      return "beam";
  }
  return "?";
}

void generate(const RunConfig& config, const fs::path& ckpt, const fs::path& corpus_file,
              DecodeMode mode, const fs::path& out_file) {
  config.validate();
  const auto vocab = text::Vocabulary::load(require_file(ckpt.parent_path() / "vocab.txt"));
  auto gen = train::init_generator(config.training, vocab.size());
  ad::load_checkpoint_into(gen.params(), require_file(ckpt));
  const auto corpus = text::load_jsonl(require_file(corpus_file));
  const auto examples = text::encode_corpus(corpus, vocab, config.limits);

  const std::size_t max_len = config.limits.max_tgt_len;
  std::vector<std::uint64_t> seeds(examples.size());
  Rng rng(derive_seed(config.training.seed, kStreamSample));
  for (auto& s : seeds) s = rng.next();
  std::vector<gen::SummaryHypothesis> hyps(examples.size());
  train::parallel_for(examples.size(), config.training.threads, [&](std::size_t i) {
    switch (mode) {
      case DecodeMode::kGreedy:
        hyps[i] = gen::greedy_decode(examples[i], gen, max_len);
        break;
      case DecodeMode::kSample: {
        Rng local(seeds[i]);
        hyps[i] = gen::sample_summary(examples[i], gen, max_len, local);
        break;
      }
      case DecodeMode::kBeam:
        hyps[i] = gen::beam_decode(examples[i], gen, max_len, config.beam_size);
        break;
    }
  });

  if (out_file.has_parent_path()) fs::create_directories(out_file.parent_path());
  std::ofstream out(out_file, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + out_file.string());
  for (std::size_t i = 0; i < examples.size(); ++i) {
    const auto& ex = examples[i];
    nlohmann::json rec{{"source", text::join(ex.source_tokens)},
                       {"reference", text::join(ex.summary_tokens)},
                       {"hypothesis", text::join(text::decode_ids(hyps[i].content(), vocab, ex))},
                       {"logprob", hyps[i].log_prob}};
    out << rec.dump() << '\n';
  }
}

namespace {

struct Scored {
  std::vector<text::Tokens> hypotheses;
  std::vector<text::Tokens> references;
};

Scored read_scored(const fs::path& path) {
  std::ifstream in(require_file(path));
  Scored s;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string where = path.string() + ":" + std::to_string(lineno) + ": ";
    nlohmann::json rec;
    try {
      rec = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw text::FormatError(where + "malformed record (" + e.what() + ")");
    }
    auto field = [&](const char* name) -> const nlohmann::json* {
      auto it = rec.find(name);
      if (it == rec.end()) return nullptr;
      if (!it->is_string()) throw text::FormatError(where + "field \"" + name + "\" is not a string");
      return &*it;
    };
    const auto* hyp = field("hypothesis");
    const auto* ref = field("reference");
    if (hyp == nullptr && ref == nullptr) {
      // A plain corpus record: the summary stands for both sides.
      hyp = ref = field("summary");
    }
    if (hyp == nullptr || ref == nullptr) {
      throw text::FormatError(where + "need \"hypothesis\" and \"reference\" (or \"summary\")");
    }
    s.hypotheses.push_back(text::tokenize(hyp->get<std::string>()));
    s.references.push_back(text::tokenize(ref->get<std::string>()));
  }
  if (s.hypotheses.empty()) throw ContractError("evaluate: " + path.string() + " holds no records");
  return s;
}

}  // namespace

std::vector<eval::EvalReport> evaluate(const std::vector<fs::path>& files,
                                       const fs::path& out_csv) {
  if (files.empty()) throw ContractError("evaluate: no hypothesis files");
  std::vector<eval::EvalReport> reports;
  std::vector<text::Tokens> first_refs;
  for (std::size_t i = 0; i < files.size(); ++i) {
    const auto s = read_scored(files[i]);
    if (i == 0) {
      first_refs = s.references;
    } else if (s.references != first_refs) {
      throw ContractError("evaluate: references in " + files[i].string() + " differ from " +
                          files[0].string());
    }
    reports.push_back(
        eval::evaluate_corpus(s.hypotheses, s.references, files[i].stem().string()));
  }
  if (out_csv.has_parent_path()) fs::create_directories(out_csv.parent_path());
  eval::emit_report(reports, out_csv);
  return reports;
}

}  // namespace advsum::cmd
