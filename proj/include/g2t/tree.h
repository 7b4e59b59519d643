//
// Project g2t - Copyright 2026 The g2t Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef G2T_TREE_H_
#define G2T_TREE_H_

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "g2t/error.h"
#include "g2t/molgraph.h"

namespace g2t {

struct BondEntry;

/// One atom of the hierarchical encoding.
///
/// The first node carrying a given atom_id defines that atom. Any later node
/// with the same id is a back-reference closing a ring: it has no bonds, no
/// charge, and repeats the defining node's atom_name.
struct TreeNode {
  std::string atom_name;
  int atom_id = 0;
  int charge = 0;
  std::vector<BondEntry> bonds;

  friend bool operator==(const TreeNode &, const TreeNode &);
};

struct BondEntry {
  std::string bond_type;
  TreeNode atom;

  friend bool operator==(const BondEntry &, const BondEntry &);
};

enum class TreeFormat {
  kJson,
  kXml,
};

std::string_view tree_format_name(TreeFormat format);

struct RootPolicy {
  enum class Kind {
    kCanonical,
    kSeededRandom,
  };

  Kind kind = Kind::kCanonical;
  std::uint64_t seed = 0;

  static RootPolicy canonical() { return {}; }
  static RootPolicy seeded(std::uint64_t seed) {
    return { Kind::kSeededRandom, seed };
  }
};

enum class TreeErrorKind {
  kSyntax,
  kSchema,
  kInvariantViolation,
  kDanglingReference,
  kDuplicateDefinition,
  kNameMismatch,
  kParallelEdge,
  kInvalidBondType,
  kUnknownElement,
  kChargeOutOfRange,
};

std::string_view tree_error_name(TreeErrorKind kind);

using TreeError = TypedError<TreeErrorKind>;

/// Depth-first encoding of a molecular graph.
///
/// The root is the rank-0 atom (canonical) or a uniformly drawn atom
/// (seeded-random); neighbors are visited in canonical rank order. An
/// unvisited neighbor becomes a definition node with the next free id; an
/// already visited one becomes a back-reference. Every graph bond appears
/// exactly once.
TreeNode graph_to_tree(const MolGraph &graph,
                       RootPolicy policy = RootPolicy::canonical());

/// Inverse of graph_to_tree: one atom per definition node, one bond per
/// BondEntry. Throws TreeError for dangling or duplicate ids, name mismatches,
/// parallel edges or self-loops, and unknown bond types or elements.
MolGraph tree_to_graph(const TreeNode &tree);

/// Canonical text. JSON is compact with key order atom_name, atom_id,
/// [charge], bonds and bond_type, atom. XML mirrors it one-to-one:
/// <atom name=".." id=".." [charge=".."]><bond type=".."><atom .../></bond>
/// ...</atom>.
std::string serialize_tree(const TreeNode &tree,
                           TreeFormat format = TreeFormat::kJson);

/// Accepts canonical and whitespace-padded text and checks the id invariants
/// while parsing.
TreeNode parse_tree(std::string_view text,
                    TreeFormat format = TreeFormat::kJson);

struct TreeStats {
  int definitions = 0;
  int back_references = 0;
  int bond_entries = 0;
};

TreeStats tree_stats(const TreeNode &tree);

}  // namespace g2t

#endif  // G2T_TREE_H_
