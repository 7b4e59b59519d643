//
// Project g2t - Copyright 2026 The g2t Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef G2T_METRICS_H_
#define G2T_METRICS_H_

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "g2t/error.h"
#include "g2t/genmodel.h"
#include "g2t/molgraph.h"

namespace g2t {

enum class MetricsErrorKind {
  kEmptySet,
  kLengthMismatch,
  kReportFormat,
};

std::string_view metrics_error_name(MetricsErrorKind kind);

using MetricsError = TypedError<MetricsErrorKind>;

/* fingerprints */

class Fingerprint {
public:
  static constexpr int kDefaultBits = 2048;

  explicit Fingerprint(int nbits = kDefaultBits);

  int size() const { return nbits_; }
  void set(int bit) { words_[bit >> 6] |= 1ULL << (bit & 63); }
  bool test(int bit) const { return (words_[bit >> 6] >> (bit & 63)) & 1; }
  int count() const;
  std::vector<int> on_bits() const;

  std::span<const std::uint64_t> words() const { return words_; }

  friend bool operator==(const Fingerprint &, const Fingerprint &) = default;

private:
  int nbits_;
  std::vector<std::uint64_t> words_;
};

/// Order-sensitive hash of an integer sequence:
/// h0 = mix64(seed), h_{i+1} = mix64(h_i ^ v_i).
std::uint64_t hash_sequence(std::uint64_t seed,
                            std::span<const std::uint64_t> values);

/// Morgan (ECFP-style) identifiers per atom and radius.
///
/// Radius 0 hashes (atomic number, degree, implicit H, charge + 8, in-ring)
/// with seed 0. Radius r hashes (previous id, then (bond order, neighbor
/// previous id) pairs sorted ascending) with seed r. An environment is kept
/// only if its bond set differs from every environment kept at a smaller
/// radius and, within one radius, from every kept environment with a smaller
/// identifier. Bits are identifiers mod nbits.
Fingerprint morgan_fingerprint(const MolGraph &graph, int radius = 2,
                               int nbits = Fingerprint::kDefaultBits,
                               const ValenceTable &table
                               = ValenceTable::standard());

/// |a & b| / |a | b|, and 1 when both are empty.
double tanimoto(const Fingerprint &a, const Fingerprint &b);

/// Per-atom ring membership from a bridge search: an atom is in a ring iff
/// it has an incident non-bridge bond.
std::vector<char> ring_atoms(const MolGraph &graph);

/* scaffolds */

inline constexpr std::string_view kAcyclicScaffold = "ACYCLIC";

struct Scaffold {
  // Empty for acyclic molecules.
  std::optional<MolGraph> graph;

  bool acyclic() const { return !graph.has_value(); }
  /// canonical_key of the scaffold graph, or "ACYCLIC".
  std::string key() const;
};

/// Bemis-Murcko framework: degree-1 atoms are removed until none remain,
/// leaving ring systems and the linkers between them.
Scaffold murcko_scaffold(const MolGraph &graph);
Scaffold murcko_scaffold(const Scaffold &scaffold);

/// Cosine similarity of scaffold-key frequency vectors.
double scaf_similarity(std::span<const MolGraph> gen,
                       std::span<const MolGraph> ref);

/// Same, from precomputed scaffold keys.
double scaf_similarity_keys(std::span<const std::string> gen,
                            std::span<const std::string> ref);

/* set metrics */

double validity(std::span<const SampleStatus> statuses);
double uniqueness(std::span<const MolGraph> mols);
double novelty(std::span<const MolGraph> mols,
               const std::unordered_set<std::string> &train_keys);

inline constexpr std::array<SampleStatus, 5> kAllStatuses {
  SampleStatus::kOk,          SampleStatus::kParseFail,
  SampleStatus::kDecodeFail,  SampleStatus::kValenceFail,
  SampleStatus::kTruncated,
};

struct MetricsReport {
  std::int64_t samples = 0;
  std::int64_t valid = 0;
  std::array<std::int64_t, kAllStatuses.size()> status_counts {};

  double validity = 0;
  // Undefined (null) when there are no valid molecules.
  std::optional<double> uniqueness;
  std::optional<double> novelty;
  std::optional<double> scaf_similarity;
  std::optional<double> mean_nearest_tanimoto;

  friend bool operator==(const MetricsReport &,
                         const MetricsReport &) = default;
};

/// Validity over all attempts; uniqueness, novelty, scaffold similarity and
/// mean nearest-neighbor Tanimoto over valid molecules only.
MetricsReport evaluate_report(std::span<const Decoded> attempts,
                              const std::unordered_set<std::string> &train_keys,
                              std::span<const MolGraph> ref);

/// Canonical JSON: fixed key order, fractions with 4 decimals, null for
/// undefined values and for the externally computed fcd and nspdk fields.
std::string report_to_json(const MetricsReport &report);
MetricsReport report_from_json(std::string_view text);

/// Fixed 4-decimal text of a fraction.
std::string format_fraction(double value);

}  // namespace g2t

#endif  // G2T_METRICS_H_
