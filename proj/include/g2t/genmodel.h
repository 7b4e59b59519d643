//
// Project g2t - Copyright 2026 The g2t Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef G2T_GENMODEL_H_
#define G2T_GENMODEL_H_

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "g2t/constrain.h"
#include "g2t/error.h"
#include "g2t/molgraph.h"
#include "g2t/tree.h"

namespace g2t {

enum class GenErrorKind {
  kEmptyCorpus,
  kBadParameter,
  kPromptRejected,
  kModelFormat,
};

std::string_view gen_error_name(GenErrorKind kind);

using GenError = TypedError<GenErrorKind>;

/// Context padding symbol. It is not part of the token alphabet and only
/// appears in n-gram contexts.
inline constexpr int kBos = tok::kVocabSize;

using Distribution = std::array<double, tok::kVocabSize>;

/// Order-k token model with add-alpha smoothing over the 40-token alphabet
/// (END included). Contexts are the k-1 preceding tokens, left-padded with
/// kBos.
class NGramModel {
public:
  static constexpr int kMaxOrder = 9;

  NGramModel(int order, double alpha);

  /// Untrained proposer: no counts, so every distribution is uniform.
  static NGramModel uniform(int order = 2);

  int order() const { return order_; }
  double alpha() const { return alpha_; }

  /// Counts every k-gram of `sequence` followed by END.
  void add_sequence(std::span<const Token> sequence);

  /// Next-token distribution given the full history; only the last k-1
  /// tokens are used.
  Distribution distribution(std::span<const Token> history) const;

  double probability(std::span<const Token> history, Token next) const;

  std::size_t num_contexts() const { return counts_.size(); }

  /// Versioned canonical JSON: {"version","order","alpha","counts"} where
  /// counts is a list of [context token names, {token name: count}] sorted
  /// by context id.
  std::string to_json() const;
  static NGramModel from_json(std::string_view text);

  friend bool operator==(const NGramModel &, const NGramModel &) = default;

private:
  struct Counts {
    std::array<std::uint32_t, tok::kVocabSize> next {};
    std::uint64_t total = 0;

    friend bool operator==(const Counts &, const Counts &) = default;
  };

  std::uint64_t context_key(std::span<const Token> history) const;

  int order_;
  double alpha_;
  std::unordered_map<std::uint64_t, Counts> counts_;
};

NGramModel train_ngram(std::span<const std::vector<Token>> corpus, int order,
                       double alpha);

/// exp of the mean negative log-likelihood per token, END included.
double perplexity(const NGramModel &model,
                  std::span<const std::vector<Token>> corpus);

struct CompletionPair {
  std::vector<Token> prompt;
  std::vector<Token> target;
};

/// Encodes `graph` from a seeded-random root and splits the token stream at
/// max(1, round(fraction * length)).
CompletionPair make_completion_pair(const MolGraph &graph, double fraction,
                                    std::uint64_t seed);

enum class SampleStatus {
  kOk,
  kParseFail,
  kDecodeFail,
  kValenceFail,
  kTruncated,
};

std::string_view sample_status_name(SampleStatus status);
std::optional<SampleStatus> sample_status_from_name(std::string_view name);

struct Sample {
  // Prompt followed by generated tokens; END is not included.
  std::vector<Token> tokens;
  bool truncated = false;
};

/// Masked sampling: the model distribution is restricted to the automaton's
/// allowed set, temperature-scaled and renormalized at every step. Throws
/// GenError(kPromptRejected) if the prompt does not replay. `max_len` only
/// matters in schema-only mode, where ring closures can repeat without
/// bound.
Sample sample_constrained(const NGramModel &model,
                          std::span<const Token> prompt, double temperature,
                          std::uint64_t seed,
                          std::shared_ptr<const DecoderConfig> config
                          = DecoderState::default_config(),
                          int max_len = 4096);

/// Plain model sampling until END or `max_len` tokens.
Sample sample_unconstrained(const NGramModel &model,
                            std::span<const Token> prompt, double temperature,
                            std::uint64_t seed, int max_len = 4096);

struct Decoded {
  SampleStatus status = SampleStatus::kOk;
  std::optional<MolGraph> graph;
  std::string error;
};

/// Classifies a sample: detokenize + parse_tree (parse_fail), tree_to_graph
/// (decode_fail), validate_valence (valence_fail).
Decoded decode_sample(const Sample &sample,
                      const ValenceTable &table = ValenceTable::standard());

struct GenerationConfig {
  double fraction_min = 0.05;
  double fraction_max = 0.5;
  double temperature = 1.0;
  std::uint64_t seed = 0;
  bool constrained = true;
  int max_len = 4096;
  std::shared_ptr<const DecoderConfig> decoder
      = DecoderState::default_config();
  int jobs = 1;
};

struct GenerationItem {
  int source = 0;  // index of the prompt molecule
  double fraction = 0;
  std::size_t prompt_len = 0;
  Sample sample;
  Decoded decoded;
};

/// n attempts; item i draws its prompt molecule, prefix fraction and seeds
/// from derive_seed(cfg.seed, i), so results do not depend on cfg.jobs.
std::vector<GenerationItem> generate_batch(const NGramModel &model,
                                           std::span<const MolGraph> prompts,
                                           int n, const GenerationConfig &cfg);

}  // namespace g2t

#endif  // G2T_GENMODEL_H_
