//
// Project g2t - Copyright 2026 The g2t Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "g2t/constrain.h"
#include "g2t/genmodel.h"
#include "g2t/metrics.h"
#include "g2t/pipeline.h"
#include "g2t/smiles.h"
#include "g2t/tree.h"

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

enum ExitCode {
  kExitOk = 0,
  kExitUsage = 2,
  kExitIo = 3,
  kExitData = 4,
  kExitInternal = 5,
  kExitVerify = 6,
};

const std::map<std::string, g2t::TreeFormat> kFormats {
  { "json", g2t::TreeFormat::kJson },
  { "xml", g2t::TreeFormat::kXml },
};

std::string read_text(const std::string &path) {
  if (path == "-")
    return { std::istreambuf_iterator<char>(std::cin), {} };
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw g2t::IoError("cannot read " + path);
  return { std::istreambuf_iterator<char>(in), {} };
}

std::string trim(const std::string &s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos)
    return {};
  return s.substr(b, s.find_last_not_of(" \t\r\n") - b + 1);
}

void add_run_options(CLI::App *cmd, g2t::RunConfig &c) {
  cmd->add_option("--dataset", c.dataset, "SMILES corpus")->required();
  cmd->add_option("--sample-size", c.sample_size, "training molecules")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--ref-size", c.ref_size, "reference molecules")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--order", c.order, "n-gram order")->check(CLI::Range(2, 9));
  cmd->add_option("--alpha", c.alpha, "add-alpha smoothing")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--random-roots", c.random_roots,
                  "extra seeded-root encodings per molecule")
      ->check(CLI::NonNegativeNumber);
  cmd->add_option("--temperature", c.temperature)->check(CLI::PositiveNumber);
  cmd->add_option("--count", c.count, "samples to generate")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--seed", c.seed)->required();
  cmd->add_flag("--constrained,!--unconstrained", c.constrained);
  cmd->add_flag("--schema-only", c.schema_only,
                "mask enforces syntax and the atom budget only");
  cmd->add_option("--format", c.format, "corpus tree format")
      ->transform(CLI::CheckedTransformer(kFormats, CLI::ignore_case));
  cmd->add_option("--atom-budget", c.atom_budget)->check(CLI::PositiveNumber);
  cmd->add_option("--fraction-min", c.fraction_min)->check(CLI::Range(0.0, 1.0));
  cmd->add_option("--fraction-max", c.fraction_max)->check(CLI::Range(0.0, 1.0));
  cmd->add_option("--max-len", c.max_len)->check(CLI::PositiveNumber);
  cmd->add_option("--jobs", c.jobs)->check(CLI::PositiveNumber);
}

void print_json(const ojson &j) { std::cout << j.dump(2) << '\n'; }

/* subcommands */

struct IngestArgs {
  std::string dataset;
  std::string out;
  std::string report;
  int sample_size = 5000;
  std::uint64_t seed = 0;
  int atom_budget = 60;
  g2t::TreeFormat format = g2t::TreeFormat::kJson;

  ojson config() const {
    ojson j;
    j["dataset"] = dataset;
    j["sample_size"] = sample_size;
    j["seed"] = seed;
    j["atom_budget"] = atom_budget;
    j["format"] = g2t::tree_format_name(format);
    return j;
  }
};

int cmd_ingest(const IngestArgs &a) {
  g2t::IngestOptions opts;
  opts.sample_size = a.sample_size;
  opts.seed = a.seed;
  opts.atom_budget = a.atom_budget;
  const auto lines = g2t::read_corpus(a.dataset);
  const auto result = g2t::ingest(lines, opts);

  const ojson cfg = a.config();
  std::string doc = g2t::meta_line("ingest", cfg) + "\n";
  for (const auto &e: result.entries)
    doc += g2t::encode_record(e, a.format) + "\n";
  g2t::write_file_atomic(a.out, doc);

  ojson report;
  report["meta"] = ojson::parse(g2t::meta_line("ingest", cfg))["meta"];
  report["ingest"] = result.report.to_json();
  const std::string report_path = a.report.empty() ? a.out + ".report.json"
                                                   : a.report;
  g2t::write_file_atomic(report_path, report.dump() + "\n");
  print_json(result.report.to_json());
  return kExitOk;
}

struct EncodeArgs {
  std::vector<std::string> smiles;
  std::string input;
  g2t::TreeFormat format = g2t::TreeFormat::kJson;
  std::optional<std::uint64_t> root_seed;
  bool tokens = false;
  int atom_budget = 60;
};

int cmd_encode(const EncodeArgs &a) {
  std::vector<std::string> all = a.smiles;
  if (!a.input.empty())
    for (const auto &line: g2t::read_corpus(a.input))
      all.push_back(line.smiles);
  if (all.empty())
    throw CLI::ValidationError("encode", "no SMILES given");
  for (const auto &s: all) {
    const g2t::MolGraph g = g2t::prepare_molecule(s, a.atom_budget);
    const auto policy = a.root_seed ? g2t::RootPolicy::seeded(*a.root_seed)
                                    : g2t::RootPolicy::canonical();
    const std::string text =
        g2t::serialize_tree(g2t::graph_to_tree(g, policy), a.format);
    if (a.tokens && a.format == g2t::TreeFormat::kJson) {
      const auto toks = g2t::tokenize(text);
      for (size_t i = 0; i < toks.size(); ++i)
        std::cout << (i ? " " : "") << g2t::token_text(toks[i]);
      std::cout << '\n';
    } else {
      std::cout << text << '\n';
    }
  }
  return kExitOk;
}

struct DecodeArgs {
  std::string input = "-";
  g2t::TreeFormat format = g2t::TreeFormat::kJson;
  bool records = false;
};

ojson decoded_line(const g2t::MolGraph &g) {
  ojson j;
  j["smiles"] = g2t::write_smiles(g);
  j["key"] = g2t::canonical_key(g);
  return j;
}

int cmd_decode(const DecodeArgs &a) {
  if (a.records) {
    const std::string path = a.input;
    for (const auto &e: g2t::read_encoded_corpus(path)) {
      ojson j;
      j["id"] = e.id;
      j.update(decoded_line(e.graph));
      std::cout << j.dump() << '\n';
    }
    return kExitOk;
  }
  const g2t::MolGraph g =
      g2t::tree_to_graph(g2t::parse_tree(trim(read_text(a.input)), a.format));
  g2t::validate_valence(g);
  std::cout << decoded_line(g).dump() << '\n';
  return kExitOk;
}

int cmd_roundtrip(const IngestArgs &a) {
  const auto start = std::chrono::steady_clock::now();
  g2t::IngestOptions opts;
  opts.sample_size = a.sample_size;
  opts.seed = a.seed;
  opts.atom_budget = a.atom_budget;
  const auto result = g2t::ingest(g2t::read_corpus(a.dataset), opts);
  const auto report = g2t::roundtrip_check(result.entries);
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  ojson j = report.to_json();
  j["seconds"] = seconds;
  print_json(j);
  return report.ok() ? kExitOk : kExitVerify;
}

struct TrainArgs {
  std::string corpus;
  std::string out;
  int order = 4;
  double alpha = 0.01;
  int random_roots = 2;
  std::uint64_t seed = 0;
};

int cmd_train(const TrainArgs &a) {
  const auto entries = g2t::read_encoded_corpus(a.corpus);
  const auto seqs = g2t::training_sequences(entries, a.random_roots,
                                            a.seed);
  const g2t::NGramModel model = g2t::train_ngram(seqs, a.order, a.alpha);
  ojson cfg;
  cfg["corpus"] = a.corpus;
  cfg["order"] = a.order;
  cfg["alpha"] = a.alpha;
  cfg["random_roots"] = a.random_roots;
  cfg["seed"] = a.seed;
  const std::string body = model.to_json();
  std::string doc = "{\"meta\":"
                    + ojson::parse(g2t::meta_line("train", cfg))["meta"].dump();
  doc += body.size() > 2 ? "," : "";
  doc += body.substr(1);
  g2t::write_file_atomic(a.out, doc + "\n");
  ojson summary;
  summary["sequences"] = seqs.size();
  summary["contexts"] = model.num_contexts();
  print_json(summary);
  return kExitOk;
}

struct GenerateArgs {
  std::string model;
  std::string corpus;
  std::string out;
  g2t::RunConfig run;
};

ojson generate_config(const GenerateArgs &a) {
  ojson cfg;
  cfg["model"] = a.model;
  cfg["corpus"] = a.corpus;
  const ojson run = a.run.to_json();
  for (const char *k: { "temperature", "count", "seed", "constrained",
                        "schema_only", "atom_budget", "fraction_min",
                        "fraction_max", "max_len", "jobs" })
    cfg[k] = run[k];
  return cfg;
}

int cmd_generate(const GenerateArgs &a) {
  const g2t::NGramModel model = g2t::NGramModel::from_json(read_text(a.model));
  const auto prompts = g2t::graphs_of(g2t::read_encoded_corpus(a.corpus));
  if (prompts.empty())
    throw g2t::GenError(g2t::GenErrorKind::kEmptyCorpus,
                        "prompt corpus is empty");
  const auto items =
      g2t::generate_batch(model, prompts, a.run.count, a.run.generation());
  g2t::write_file_atomic(
      a.out, g2t::samples_document("generate", generate_config(a), items));
  std::map<std::string, int> counts;
  for (const auto &item: items)
    ++counts[std::string(g2t::sample_status_name(item.decoded.status))];
  print_json(ojson(counts));
  return kExitOk;
}

struct EvaluateArgs {
  std::string samples;
  std::string train;
  std::string ref;
  std::string out;
};

int cmd_evaluate(const EvaluateArgs &a) {
  std::vector<g2t::Decoded> attempts;
  for (const auto &line: g2t::read_lines(a.samples)) {
    if (trim(line).empty() || line.rfind("{\"meta\":", 0) == 0)
      continue;
    attempts.push_back(g2t::decode_sample_record(line));
  }
  const auto train = g2t::read_encoded_corpus(a.train);
  const auto ref = g2t::graphs_of(g2t::read_encoded_corpus(a.ref));
  const g2t::MetricsReport report =
      g2t::evaluate_report(attempts, g2t::key_set(train), ref);
  ojson cfg;
  cfg["samples"] = a.samples;
  cfg["train"] = a.train;
  cfg["ref"] = a.ref;
  const std::string doc = g2t::report_document("evaluate", cfg, report);
  if (!a.out.empty())
    g2t::write_file_atomic(a.out, doc);
  std::cout << g2t::report_to_json(report) << '\n';
  return kExitOk;
}

int cmd_run(const g2t::RunConfig &c, const std::string &out_dir) {
  const auto result = g2t::run_pipeline(c, out_dir);
  std::cout << g2t::report_to_json(result.report) << '\n';
  return kExitOk;
}

int cmd_ablate(const g2t::RunConfig &c, const std::string &out_dir) {
  g2t::run_ablation(c, out_dir);
  std::cout << read_text((fs::path(out_dir) / "ablation.json").string());
  return kExitOk;
}

struct MaskArgs {
  std::string prefix;
  bool schema_only = false;
  int atom_budget = 60;
};

int cmd_mask(const MaskArgs &a) {
  auto config = std::make_shared<g2t::DecoderConfig>();
  config->schema_only = a.schema_only;
  config->atom_budget = a.atom_budget;
  const std::string prefix = trim(a.prefix);
  const std::vector<g2t::Token> tokens =
      prefix.empty() ? std::vector<g2t::Token> {} : g2t::tokenize(prefix);
  const g2t::DecoderState state = g2t::replay(tokens, config);
  ojson j;
  j["prefix_tokens"] = tokens.size();
  j["complete"] = g2t::is_complete(state);
  ojson allowed = ojson::array();
  for (g2t::Token t: g2t::token_list(g2t::allowed_next(state)))
    allowed.push_back(g2t::token_text(t));
  j["allowed"] = std::move(allowed);
  std::cout << j.dump() << '\n';
  return kExitOk;
}

int exit_code_for(const std::exception &e) {
  if (dynamic_cast<const g2t::IoError *>(&e)
      || dynamic_cast<const fs::filesystem_error *>(&e))
    return kExitIo;
  if (const auto *ge = dynamic_cast<const g2t::GenError *>(&e))
    return ge->kind() == g2t::GenErrorKind::kBadParameter ? kExitUsage
                                                          : kExitData;
  if (dynamic_cast<const CLI::Error *>(&e))
    return kExitUsage;
  if (dynamic_cast<const g2t::Error *>(&e))
    return kExitData;
  return kExitInternal;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app { "g2t: graph-to-tree molecular text encoding" };
  app.set_version_flag("--version", std::string(g2t::kToolVersion));
  app.set_config("--config", "", "TOML or INI file; command-line flags win");
  app.require_subcommand(1);

  IngestArgs ingest_args;
  auto *ingest = app.add_subcommand("ingest", "sample, parse and encode a "
                                              "SMILES corpus");
  ingest->add_option("--dataset", ingest_args.dataset)->required();
  ingest->add_option("--out,-o", ingest_args.out, "encoded corpus (JSONL)")
      ->required();
  ingest->add_option("--report", ingest_args.report,
                     "ingest report path (default <out>.report.json)");
  ingest->add_option("--sample-size,-n", ingest_args.sample_size)
      ->check(CLI::PositiveNumber);
  ingest->add_option("--seed", ingest_args.seed);
  ingest->add_option("--atom-budget", ingest_args.atom_budget)
      ->check(CLI::PositiveNumber);
  ingest->add_option("--format", ingest_args.format)
      ->transform(CLI::CheckedTransformer(kFormats, CLI::ignore_case));

  EncodeArgs encode_args;
  auto *encode = app.add_subcommand("encode", "SMILES to tree text");
  encode->add_option("--smiles,-s", encode_args.smiles);
  encode->add_option("--input,-i", encode_args.input, "file of SMILES lines");
  encode->add_option("--format", encode_args.format)
      ->transform(CLI::CheckedTransformer(kFormats, CLI::ignore_case));
  encode->add_option("--root-seed", encode_args.root_seed,
                     "seeded random root instead of the canonical one");
  encode->add_flag("--tokens", encode_args.tokens,
                   "print the token stream (JSON only)");
  encode->add_option("--atom-budget", encode_args.atom_budget)
      ->check(CLI::PositiveNumber);

  DecodeArgs decode_args;
  auto *decode = app.add_subcommand("decode", "tree text to SMILES and key");
  decode->add_option("--input,-i", decode_args.input, "tree file or - for "
                                                      "stdin");
  decode->add_option("--format", decode_args.format)
      ->transform(CLI::CheckedTransformer(kFormats, CLI::ignore_case));
  decode->add_flag("--records", decode_args.records,
                   "input is an encoded corpus");

  IngestArgs rt_args;
  auto *roundtrip = app.add_subcommand(
      "roundtrip", "verify encode/decode fidelity in both formats");
  roundtrip->add_option("--dataset", rt_args.dataset)->required();
  roundtrip->add_option("--sample-size,-n", rt_args.sample_size)
      ->check(CLI::PositiveNumber);
  roundtrip->add_option("--seed", rt_args.seed);
  roundtrip->add_option("--atom-budget", rt_args.atom_budget)
      ->check(CLI::PositiveNumber);

  TrainArgs train_args;
  auto *train = app.add_subcommand("train", "fit the n-gram proposer");
  train->add_option("--corpus", train_args.corpus, "encoded corpus")
      ->required();
  train->add_option("--out,-o", train_args.out)->required();
  train->add_option("--order", train_args.order)->check(CLI::Range(2, 9));
  train->add_option("--alpha", train_args.alpha)->check(CLI::PositiveNumber);
  train->add_option("--random-roots", train_args.random_roots)
      ->check(CLI::NonNegativeNumber);
  train->add_option("--seed", train_args.seed);

  GenerateArgs gen_args;
  auto *generate = app.add_subcommand("generate", "sample completions");
  generate->add_option("--model", gen_args.model)->required();
  generate->add_option("--corpus", gen_args.corpus, "prompt corpus")
      ->required();
  generate->add_option("--out,-o", gen_args.out)->required();
  generate->add_option("--count", gen_args.run.count)
      ->check(CLI::PositiveNumber);
  generate->add_option("--seed", gen_args.run.seed)->required();
  generate->add_option("--temperature", gen_args.run.temperature)
      ->check(CLI::PositiveNumber);
  generate->add_flag("--constrained,!--unconstrained",
                     gen_args.run.constrained);
  generate->add_flag("--schema-only", gen_args.run.schema_only);
  generate->add_option("--atom-budget", gen_args.run.atom_budget)
      ->check(CLI::PositiveNumber);
  generate->add_option("--fraction-min", gen_args.run.fraction_min)
      ->check(CLI::Range(0.0, 1.0));
  generate->add_option("--fraction-max", gen_args.run.fraction_max)
      ->check(CLI::Range(0.0, 1.0));
  generate->add_option("--max-len", gen_args.run.max_len)
      ->check(CLI::PositiveNumber);
  generate->add_option("--jobs", gen_args.run.jobs)->check(CLI::PositiveNumber);

  EvaluateArgs eval_args;
  auto *evaluate = app.add_subcommand("evaluate", "score a samples file");
  evaluate->add_option("--samples", eval_args.samples)->required();
  evaluate->add_option("--train", eval_args.train, "encoded training corpus")
      ->required();
  evaluate->add_option("--ref", eval_args.ref, "encoded reference corpus")
      ->required();
  evaluate->add_option("--out,-o", eval_args.out);

  g2t::RunConfig run_config;
  std::string run_out = "g2t_run";
  auto *run = app.add_subcommand("run", "ingest, train, generate, evaluate");
  add_run_options(run, run_config);
  run->add_option("--out-dir,-o", run_out);

  g2t::RunConfig ablate_config;
  std::string ablate_out = "g2t_ablation";
  auto *ablate = app.add_subcommand(
      "ablate", "paired constrained and unconstrained runs");
  add_run_options(ablate, ablate_config);
  ablate->add_option("--out-dir,-o", ablate_out);

  MaskArgs mask_args;
  auto *mask = app.add_subcommand("mask", "allowed next tokens after a "
                                          "prefix");
  mask->add_option("--prefix,-p", mask_args.prefix, "JSON tree prefix text");
  mask->add_flag("--schema-only", mask_args.schema_only);
  mask->add_option("--atom-budget", mask_args.atom_budget)
      ->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp &e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion &e) {
    return app.exit(e);
  } catch (const CLI::ParseError &e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*ingest)
      return cmd_ingest(ingest_args);
    if (*encode)
      return cmd_encode(encode_args);
    if (*decode)
      return cmd_decode(decode_args);
    if (*roundtrip)
      return cmd_roundtrip(rt_args);
    if (*train)
      return cmd_train(train_args);
    if (*generate)
      return cmd_generate(gen_args);
    if (*evaluate)
      return cmd_evaluate(eval_args);
    if (*run)
      return cmd_run(run_config, run_out);
    if (*ablate)
      return cmd_ablate(ablate_config, ablate_out);
    if (*mask)
      return cmd_mask(mask_args);
  } catch (const std::exception &e) {
    std::cerr << "g2t: " << e.what() << '\n';
    return exit_code_for(e);
  }
  return kExitInternal;
}
