//
// Project g2t - Copyright 2026 The g2t Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef G2T_PIPELINE_H_
#define G2T_PIPELINE_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "g2t/constrain.h"
#include "g2t/error.h"
#include "g2t/genmodel.h"
#include "g2t/metrics.h"
#include "g2t/molgraph.h"
#include "g2t/tree.h"

namespace g2t {

inline constexpr std::string_view kToolName = "g2t";
inline constexpr std::string_view kToolVersion = "0.1.0";

enum class IngestErrorKind {
  kValenceViolation,
  kAtomBudgetExceeded,
  kExplicitHydrogen,
  kAllRejected,
};

std::string_view ingest_error_name(IngestErrorKind kind);

using IngestError = TypedError<IngestErrorKind>;

class IoError: public Error {
public:
  using Error::Error;
};

struct CorpusEntry {
  std::string id;
  MolGraph graph;
};

/* ingestion */

/// parse_smiles, then removal of neutral explicit hydrogens bonded to one
/// heavy atom, then the valence and atom-budget checks. Throws SmilesError or
/// IngestError.
MolGraph prepare_molecule(std::string_view smiles, int atom_budget,
                          const ValenceTable &table
                          = ValenceTable::standard());

struct CorpusLine {
  std::string smiles;
  std::string id;
};

/// One SMILES per line with an optional whitespace-separated id column.
/// Blank lines are skipped; a missing id becomes "line_<n>" (1-based).
std::vector<CorpusLine> read_corpus(const std::filesystem::path &path);

struct IngestOptions {
  int sample_size = 5000;
  std::uint64_t seed = 0;
  int atom_budget = 60;
  bool shuffle = true;
};

struct IngestReport {
  std::int64_t lines = 0;
  std::int64_t attempted = 0;
  std::int64_t accepted = 0;
  std::map<std::string, std::int64_t> rejected;

  std::int64_t total_rejected() const;
  nlohmann::ordered_json to_json() const;
};

struct IngestResult {
  std::vector<CorpusEntry> entries;
  IngestReport report;
};

/// Visits lines in seeded shuffled order until sample_size molecules are
/// accepted or the corpus is exhausted. Throws IngestError(kAllRejected)
/// when nothing is accepted.
IngestResult ingest(std::span<const CorpusLine> lines,
                    const IngestOptions &options,
                    const ValenceTable &table = ValenceTable::standard());

/* encoded corpus */

/// {"id":...,"tree":...}; the tree is an inline JSON object, or a string of
/// XML text.
std::string encode_record(const CorpusEntry &entry,
                          TreeFormat format = TreeFormat::kJson);

CorpusEntry decode_record(std::string_view line);

/// {"meta":{"tool","version","command","config"}}.
std::string meta_line(std::string_view command,
                      const nlohmann::ordered_json &config);

std::vector<std::string> read_lines(const std::filesystem::path &path);

/// Reads an encoded-corpus file, skipping the meta header.
std::vector<CorpusEntry> read_encoded_corpus(const std::filesystem::path &path);

/// Writes via a temporary sibling and rename.
void write_file_atomic(const std::filesystem::path &path,
                       std::string_view content);

/* training */

/// Canonical encoding of every molecule plus `random_roots` encodings from
/// seeded-random roots.
std::vector<std::vector<Token>> training_sequences(
    std::span<const CorpusEntry> entries, int random_roots,
    std::uint64_t seed);

std::vector<std::vector<Token>> canonical_sequences(
    std::span<const CorpusEntry> entries);

/* samples */

/// {"tokens":[...],"tree":...,"status":...,"smiles":...,"source":...,
/// "prompt_len":...}; tree and smiles are null when unavailable.
std::string sample_record(const GenerationItem &item);

/// Re-decodes the stored tokens; the status is recomputed, not trusted.
Decoded decode_sample_record(std::string_view line,
                             const ValenceTable &table
                             = ValenceTable::standard());

std::vector<MolGraph> graphs_of(std::span<const CorpusEntry> entries);

std::unordered_set<std::string> key_set(std::span<const CorpusEntry> entries);

/* roundtrip verification */

struct RoundtripReport {
  std::int64_t molecules = 0;
  std::int64_t json_key_failures = 0;
  std::int64_t xml_key_failures = 0;
  std::int64_t json_tree_failures = 0;
  std::int64_t xml_tree_failures = 0;
  // Ids of the first failing molecules, at most 20.
  std::vector<std::string> failing_ids;

  bool ok() const;
  nlohmann::ordered_json to_json() const;
};

/// For each molecule: canonical encode, serialize in both formats, parse back,
/// compare trees structurally and compare canonical keys after decoding.
RoundtripReport roundtrip_check(std::span<const CorpusEntry> entries);

/* end-to-end runs */

struct RunConfig {
  std::string dataset;
  int sample_size = 5000;
  int ref_size = 1000;
  int order = 4;
  double alpha = 0.01;
  int random_roots = 2;
  double temperature = 1.0;
  int count = 1000;
  std::uint64_t seed = 0;
  bool constrained = true;
  bool schema_only = false;
  TreeFormat format = TreeFormat::kJson;
  int atom_budget = 60;
  double fraction_min = 0.05;
  double fraction_max = 0.5;
  int max_len = 4096;
  int jobs = 1;

  nlohmann::ordered_json to_json() const;
  GenerationConfig generation() const;
  std::shared_ptr<const DecoderConfig> decoder() const;
};

/// {"meta":{...},"report":{...}} with the report in canonical form.
std::string report_document(std::string_view command,
                            const nlohmann::ordered_json &config,
                            const MetricsReport &report);

std::string samples_document(std::string_view command,
                             const nlohmann::ordered_json &config,
                             std::span<const GenerationItem> items);

struct RunResult {
  IngestReport ingest;
  MetricsReport report;
  std::vector<GenerationItem> items;
};

/// ingest -> train -> generate -> decode -> evaluate. The first sample_size
/// accepted molecules train the model and prompt generation; the next
/// ref_size form the reference set. Writes corpus.jsonl, ref.jsonl,
/// ingest_report.json, model.json, samples.jsonl and report.json into
/// out_dir.
RunResult run_pipeline(const RunConfig &config,
                       const std::filesystem::path &out_dir);

struct AblationResult {
  MetricsReport constrained;
  MetricsReport unconstrained;
};

/// One model, two generation passes with identical prompts and seeds.
/// Writes samples_{constrained,unconstrained}.jsonl, the two reports and
/// ablation.json into out_dir.
AblationResult run_ablation(const RunConfig &config,
                            const std::filesystem::path &out_dir);

}  // namespace g2t

#endif  // G2T_PIPELINE_H_
