//
// Project g2t - Copyright 2026 The g2t Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "g2t/pipeline.h"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <numeric>
#include <sstream>
#include <utility>

#include "g2t/random.h"
#include "g2t/smiles.h"

namespace g2t {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

std::string_view ingest_error_name(IngestErrorKind kind) {
  switch (kind) {
  case IngestErrorKind::kValenceViolation:
    return "ValenceViolation";
  case IngestErrorKind::kAtomBudgetExceeded:
    return "AtomBudgetExceeded";
  case IngestErrorKind::kExplicitHydrogen:
    return "ExplicitHydrogen";
  case IngestErrorKind::kAllRejected:
    return "AllRejected";
  }
  return "IngestError";
}

/* ingestion */

namespace {

MolGraph strip_hydrogens(const MolGraph &g) {
  const int n = g.num_atoms();
  std::vector<char> drop(n, 0);
  bool any = false;
  for (int a = 0; a < n; ++a) {
    const Atom &atom = g.atom(a);
    if (atom.element != Element::kH)
      continue;
    if (atom.charge == 0 && g.degree(a) == 1
        && g.atom(g.neighbors(a)[0].atom).element != Element::kH) {
      drop[a] = 1;
      any = true;
    } else {
      throw IngestError(IngestErrorKind::kExplicitHydrogen,
                        "hydrogen atom " + std::to_string(a)
                            + " is not a removable terminal hydrogen");
    }
  }
  if (!any)
    return g;

  std::vector<int> remap(n, -1);
  std::vector<Atom> atoms;
  for (int a = 0; a < n; ++a) {
    if (drop[a])
      continue;
    remap[a] = static_cast<int>(atoms.size());
    atoms.push_back(g.atom(a));
  }
  std::vector<Bond> bonds;
  for (const Bond &b: g.bonds())
    if (!drop[b.begin] && !drop[b.end])
      bonds.push_back({ remap[b.begin], remap[b.end], b.order });
  return MolGraph(std::move(atoms), std::move(bonds));
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
    s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
    s.remove_suffix(1);
  return s;
}

}  // namespace

MolGraph prepare_molecule(std::string_view smiles, int atom_budget,
                          const ValenceTable &table) {
  MolGraph g = strip_hydrogens(parse_smiles(smiles, table));
  const ValenceVerdict verdict = validate_valence(g, table);
  if (!verdict.ok())
    throw IngestError(IngestErrorKind::kValenceViolation,
                      "valence exceeded at atom "
                          + std::to_string(verdict.violations.front()));
  if (g.num_atoms() > atom_budget)
    throw IngestError(IngestErrorKind::kAtomBudgetExceeded,
                      std::to_string(g.num_atoms())
                          + " heavy atoms exceed the budget of "
                          + std::to_string(atom_budget));
  return g;
}

std::vector<std::string> read_lines(const fs::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw IoError("cannot open " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r')
      line.pop_back();
    lines.push_back(std::move(line));
  }
  if (in.bad())
    throw IoError("read error on " + path.string());
  return lines;
}

std::vector<CorpusLine> read_corpus(const fs::path &path) {
  std::vector<CorpusLine> out;
  const std::vector<std::string> lines = read_lines(path);
  for (size_t i = 0; i < lines.size(); ++i) {
    std::string_view s = trim(lines[i]);
    if (s.empty())
      continue;
    CorpusLine line;
    const size_t ws = s.find_first_of(" \t");
    line.smiles = std::string(s.substr(0, ws));
    if (ws != std::string_view::npos)
      line.id = std::string(trim(s.substr(ws)));
    if (line.id.empty())
      line.id = "line_" + std::to_string(i + 1);
    out.push_back(std::move(line));
  }
  return out;
}

std::int64_t IngestReport::total_rejected() const {
  std::int64_t n = 0;
  for (const auto &kv: rejected)
    n += kv.second;
  return n;
}

nlohmann::ordered_json IngestReport::to_json() const {
  ojson j;
  j["lines"] = lines;
  j["attempted"] = attempted;
  j["accepted"] = accepted;
  j["rejected"] = total_rejected();
  ojson by_kind = ojson::object();
  for (const auto &[k, v]: rejected)
    by_kind[k] = v;
  j["rejected_by_error"] = std::move(by_kind);
  j["acceptance_rate"] =
      attempted == 0 ? 0.0
                     : std::stod(format_fraction(static_cast<double>(accepted)
                                                 / attempted));
  return j;
}

IngestResult ingest(std::span<const CorpusLine> lines,
                    const IngestOptions &options, const ValenceTable &table) {
  if (options.sample_size < 1)
    throw Error("ingest sample size must be positive");

  std::vector<size_t> order(lines.size());
  std::iota(order.begin(), order.end(), 0);
  if (options.shuffle) {
    Rng rng(options.seed);
    for (size_t i = order.size(); i > 1; --i)
      std::swap(order[i - 1], order[rng.below(i)]);
  }

  IngestResult result;
  result.report.lines = static_cast<std::int64_t>(lines.size());
  for (size_t idx: order) {
    if (result.report.accepted >= options.sample_size)
      break;
    const CorpusLine &line = lines[idx];
    ++result.report.attempted;
    try {
      result.entries.push_back(
          { line.id, prepare_molecule(line.smiles, options.atom_budget,
                                      table) });
      ++result.report.accepted;
    } catch (const SmilesError &e) {
      ++result.report.rejected[std::string(smiles_error_name(e.kind()))];
    } catch (const IngestError &e) {
      ++result.report.rejected[std::string(ingest_error_name(e.kind()))];
    }
  }
  if (result.entries.empty())
    throw IngestError(IngestErrorKind::kAllRejected,
                      "every corpus line was rejected");
  return result;
}

/* encoded corpus */

std::string encode_record(const CorpusEntry &entry, TreeFormat format) {
  const std::string tree = serialize_tree(graph_to_tree(entry.graph), format);
  std::string out = "{\"id\":";
  out += nlohmann::json(entry.id).dump();
  out += ",\"tree\":";
  out += format == TreeFormat::kJson ? tree : nlohmann::json(tree).dump();
  out += '}';
  return out;
}

CorpusEntry decode_record(std::string_view line) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line.begin(), line.end());
  } catch (const nlohmann::json::parse_error &e) {
    throw TreeError(TreeErrorKind::kSyntax, e.what());
  }
  if (!j.is_object() || !j.contains("id") || !j["id"].is_string()
      || !j.contains("tree"))
    throw TreeError(TreeErrorKind::kSchema,
                    "corpus record needs string id and tree");
  const nlohmann::json &t = j["tree"];
  TreeNode tree = t.is_string()
                      ? parse_tree(t.get<std::string>(), TreeFormat::kXml)
                      : parse_tree(t.dump(), TreeFormat::kJson);
  return { j["id"].get<std::string>(), tree_to_graph(tree) };
}

std::string meta_line(std::string_view command, const ojson &config) {
  ojson meta;
  meta["tool"] = kToolName;
  meta["version"] = kToolVersion;
  meta["command"] = command;
  meta["config"] = config;
  ojson j;
  j["meta"] = std::move(meta);
  return j.dump();
}

std::vector<CorpusEntry> read_encoded_corpus(const fs::path &path) {
  std::vector<CorpusEntry> out;
  for (const std::string &line: read_lines(path)) {
    if (trim(line).empty() || line.rfind("{\"meta\":", 0) == 0)
      continue;
    out.push_back(decode_record(line));
  }
  return out;
}

void write_file_atomic(const fs::path &path, std::string_view content) {
  if (path.has_parent_path())
    fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out)
      throw IoError("cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out)
      throw IoError("write error on " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec)
    throw IoError("cannot rename " + tmp.string() + ": " + ec.message());
}

/* training */

std::vector<std::vector<Token>> canonical_sequences(
    std::span<const CorpusEntry> entries) {
  std::vector<std::vector<Token>> out;
  out.reserve(entries.size());
  for (const auto &e: entries)
    out.push_back(tokenize(serialize_tree(graph_to_tree(e.graph))));
  return out;
}

std::vector<std::vector<Token>> training_sequences(
    std::span<const CorpusEntry> entries, int random_roots,
    std::uint64_t seed) {
  std::vector<std::vector<Token>> out;
  out.reserve(entries.size() * (1 + std::max(0, random_roots)));
  for (size_t i = 0; i < entries.size(); ++i) {
    const MolGraph &g = entries[i].graph;
    out.push_back(tokenize(serialize_tree(graph_to_tree(g))));
    const std::uint64_t item_seed = derive_seed(seed, i);
    for (int r = 0; r < random_roots; ++r)
      out.push_back(tokenize(serialize_tree(
          graph_to_tree(g, RootPolicy::seeded(derive_seed(item_seed, r))))));
  }
  return out;
}

/* samples */

std::string sample_record(const GenerationItem &item) {
  ojson j;
  ojson tokens = ojson::array();
  for (Token t: item.sample.tokens)
    tokens.push_back(token_text(t));
  j["tokens"] = std::move(tokens);

  j["tree"] = nullptr;
  if (!item.sample.truncated) {
    try {
      j["tree"] = ojson::parse(
          serialize_tree(parse_tree(detokenize(item.sample.tokens))));
    } catch (const Error &) {
    }
  }
  j["status"] = sample_status_name(item.decoded.status);
  j["smiles"] = nullptr;
  if (item.decoded.graph)
    j["smiles"] = write_smiles(*item.decoded.graph);
  j["source"] = item.source;
  j["prompt_len"] = item.prompt_len;
  return j.dump();
}

Decoded decode_sample_record(std::string_view line,
                             const ValenceTable &table) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line.begin(), line.end());
  } catch (const nlohmann::json::parse_error &e) {
    throw TreeError(TreeErrorKind::kSyntax,
                    std::string("malformed sample record: ") + e.what());
  }
  if (!j.is_object() || !j.contains("tokens") || !j["tokens"].is_array()
      || !j.contains("status") || !j["status"].is_string())
    throw TreeError(TreeErrorKind::kSchema,
                    "sample record needs tokens and status");

  Sample s;
  for (const auto &name: j["tokens"]) {
    auto t = name.is_string() ? token_from_text(name.get<std::string>())
                              : std::nullopt;
    if (!t || *t == tok::kEnd)
      throw TreeError(TreeErrorKind::kSchema,
                      "unknown token in sample record");
    s.tokens.push_back(*t);
  }
  s.truncated = j["status"] == "truncated";
  return decode_sample(s, table);
}

std::vector<MolGraph> graphs_of(std::span<const CorpusEntry> entries) {
  std::vector<MolGraph> out;
  out.reserve(entries.size());
  for (const auto &e: entries)
    out.push_back(e.graph);
  return out;
}

std::unordered_set<std::string> key_set(std::span<const CorpusEntry> entries) {
  std::unordered_set<std::string> keys;
  for (const auto &e: entries)
    keys.insert(canonical_key(e.graph));
  return keys;
}

/* roundtrip verification */

bool RoundtripReport::ok() const {
  return json_key_failures == 0 && xml_key_failures == 0
         && json_tree_failures == 0 && xml_tree_failures == 0;
}

nlohmann::ordered_json RoundtripReport::to_json() const {
  ojson j;
  j["molecules"] = molecules;
  j["json_key_failures"] = json_key_failures;
  j["xml_key_failures"] = xml_key_failures;
  j["json_tree_failures"] = json_tree_failures;
  j["xml_tree_failures"] = xml_tree_failures;
  j["failing_ids"] = failing_ids;
  j["ok"] = ok();
  return j;
}

RoundtripReport roundtrip_check(std::span<const CorpusEntry> entries) {
  RoundtripReport report;
  for (const auto &e: entries) {
    ++report.molecules;
    const std::string key = canonical_key(e.graph);
    const TreeNode tree = graph_to_tree(e.graph);
    bool failed = false;
    for (TreeFormat format: { TreeFormat::kJson, TreeFormat::kXml }) {
      const bool json = format == TreeFormat::kJson;
      bool tree_ok = false;
      bool key_ok = false;
      try {
        const TreeNode back = parse_tree(serialize_tree(tree, format), format);
        tree_ok = back == tree;
        key_ok = canonical_key(tree_to_graph(back)) == key;
      } catch (const Error &) {
      }
      if (!tree_ok)
        ++(json ? report.json_tree_failures : report.xml_tree_failures);
      if (!key_ok)
        ++(json ? report.json_key_failures : report.xml_key_failures);
      failed = failed || !tree_ok || !key_ok;
    }
    if (failed && report.failing_ids.size() < 20)
      report.failing_ids.push_back(e.id);
  }
  return report;
}

/* end-to-end runs */

nlohmann::ordered_json RunConfig::to_json() const {
  ojson j;
  j["dataset"] = dataset;
  j["sample_size"] = sample_size;
  j["ref_size"] = ref_size;
  j["order"] = order;
  j["alpha"] = alpha;
  j["random_roots"] = random_roots;
  j["temperature"] = temperature;
  j["count"] = count;
  j["seed"] = seed;
  j["constrained"] = constrained;
  j["schema_only"] = schema_only;
  j["format"] = tree_format_name(format);
  j["atom_budget"] = atom_budget;
  j["fraction_min"] = fraction_min;
  j["fraction_max"] = fraction_max;
  j["max_len"] = max_len;
  j["jobs"] = jobs;
  return j;
}

std::shared_ptr<const DecoderConfig> RunConfig::decoder() const {
  auto d = std::make_shared<DecoderConfig>();
  d->atom_budget = atom_budget;
  d->schema_only = schema_only;
  return d;
}

GenerationConfig RunConfig::generation() const {
  GenerationConfig g;
  g.fraction_min = fraction_min;
  g.fraction_max = fraction_max;
  g.temperature = temperature;
  g.seed = derive_seed(seed, 0x67656e);
  g.constrained = constrained;
  g.max_len = max_len;
  g.decoder = decoder();
  g.jobs = jobs;
  return g;
}

namespace {

ojson meta_object(std::string_view command, const ojson &config) {
  return ojson::parse(meta_line(command, config))["meta"];
}

// Prepends a "meta" member to a serialized JSON object.
std::string with_meta(std::string_view command, const ojson &config,
                      std::string_view object) {
  std::string out = "{\"meta\":" + meta_object(command, config).dump();
  if (object.size() > 2)
    out += ',';
  out += object.substr(1);
  return out;
}

std::string corpus_document(std::string_view command, const ojson &config,
                            std::span<const CorpusEntry> entries,
                            TreeFormat format) {
  std::string out = meta_line(command, config);
  out += '\n';
  for (const auto &e: entries) {
    out += encode_record(e, format);
    out += '\n';
  }
  return out;
}

struct PreparedRun {
  IngestReport ingest;
  std::vector<CorpusEntry> train;
  std::vector<CorpusEntry> ref;
  NGramModel model = NGramModel::uniform();
};

PreparedRun prepare_run(const RunConfig &config, const fs::path &out_dir,
                        std::string_view command) {
  if (config.sample_size < 1 || config.ref_size < 1 || config.count < 1)
    throw GenError(GenErrorKind::kBadParameter,
                   "sample_size, ref_size and count must be positive");
  const ojson cfg = config.to_json();

  IngestOptions opts;
  opts.sample_size = config.sample_size + config.ref_size;
  opts.seed = config.seed;
  opts.atom_budget = config.atom_budget;
  const std::vector<CorpusLine> lines = read_corpus(config.dataset);
  IngestResult ingested = ingest(lines, opts);

  PreparedRun run;
  run.ingest = ingested.report;
  const auto n_train = std::min<size_t>(config.sample_size,
                                        ingested.entries.size());
  run.train.assign(std::make_move_iterator(ingested.entries.begin()),
                   std::make_move_iterator(ingested.entries.begin()
                                           + n_train));
  run.ref.assign(std::make_move_iterator(ingested.entries.begin() + n_train),
                 std::make_move_iterator(ingested.entries.end()));
  if (run.ref.empty())
    throw IngestError(IngestErrorKind::kAllRejected,
                      "corpus too small: no molecules left for the reference "
                      "set");

  write_file_atomic(out_dir / "corpus.jsonl",
                    corpus_document(command, cfg, run.train, config.format));
  write_file_atomic(out_dir / "ref.jsonl",
                    corpus_document(command, cfg, run.ref, config.format));
  write_file_atomic(out_dir / "ingest_report.json",
                    with_meta(command, cfg,
                              ojson { { "ingest", run.ingest.to_json() } }
                                  .dump())
                        + "\n");

  const auto sequences = training_sequences(
      run.train, config.random_roots, derive_seed(config.seed, 0x747261696e));
  run.model = train_ngram(sequences, config.order, config.alpha);
  write_file_atomic(out_dir / "model.json",
                    with_meta(command, cfg, run.model.to_json()) + "\n");
  return run;
}

std::vector<Decoded> decoded_of(std::span<const GenerationItem> items) {
  std::vector<Decoded> out;
  out.reserve(items.size());
  for (const auto &item: items)
    out.push_back(item.decoded);
  return out;
}

}  // namespace

std::string report_document(std::string_view command, const ojson &config,
                            const MetricsReport &report) {
  return "{\"meta\":" + meta_object(command, config).dump() + ",\"report\":"
         + report_to_json(report) + "}\n";
}

std::string samples_document(std::string_view command, const ojson &config,
                             std::span<const GenerationItem> items) {
  std::string out = meta_line(command, config);
  out += '\n';
  for (const auto &item: items) {
    out += sample_record(item);
    out += '\n';
  }
  return out;
}

RunResult run_pipeline(const RunConfig &config, const fs::path &out_dir) {
  PreparedRun prep = prepare_run(config, out_dir, "run");
  const ojson cfg = config.to_json();

  RunResult result;
  result.ingest = prep.ingest;
  const std::vector<MolGraph> prompts = graphs_of(prep.train);
  result.items =
      generate_batch(prep.model, prompts, config.count, config.generation());
  write_file_atomic(out_dir / "samples.jsonl",
                    samples_document("run", cfg, result.items));

  const std::vector<MolGraph> ref = graphs_of(prep.ref);
  result.report =
      evaluate_report(decoded_of(result.items), key_set(prep.train), ref);
  write_file_atomic(out_dir / "report.json",
                    report_document("run", cfg, result.report));
  return result;
}

AblationResult run_ablation(const RunConfig &config, const fs::path &out_dir) {
  PreparedRun prep = prepare_run(config, out_dir, "ablate");
  const ojson cfg = config.to_json();
  const std::vector<MolGraph> prompts = graphs_of(prep.train);
  const std::vector<MolGraph> ref = graphs_of(prep.ref);
  const auto train_keys = key_set(prep.train);

  AblationResult result;
  for (bool constrained: { true, false }) {
    RunConfig arm = config;
    arm.constrained = constrained;
    const std::string name = constrained ? "constrained" : "unconstrained";
    const auto items =
        generate_batch(prep.model, prompts, arm.count, arm.generation());
    const ojson arm_cfg = arm.to_json();
    write_file_atomic(out_dir / ("samples_" + name + ".jsonl"),
                      samples_document("ablate", arm_cfg, items));
    const MetricsReport report =
        evaluate_report(decoded_of(items), train_keys, ref);
    write_file_atomic(out_dir / ("report_" + name + ".json"),
                      report_document("ablate", arm_cfg, report));
    (constrained ? result.constrained : result.unconstrained) = report;
  }

  std::string doc = "{\"meta\":" + meta_object("ablate", cfg).dump();
  doc += ",\"constrained\":" + report_to_json(result.constrained);
  doc += ",\"unconstrained\":" + report_to_json(result.unconstrained);
  doc += ",\"validity_gap\":"
         + format_fraction(result.constrained.validity
                           - result.unconstrained.validity);
  doc += "}\n";
  write_file_atomic(out_dir / "ablation.json", doc);
  return result;
}

}  // namespace g2t
