//
// Project g2t - Copyright 2026 The g2t Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef G2T_SMILES_H_
#define G2T_SMILES_H_

#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "g2t/error.h"
#include "g2t/molgraph.h"

namespace g2t {

enum class SmilesErrorKind {
  kEmptyInput,
  kUnknownElement,
  kUnclosedRing,
  kUnsupportedFeature,
  kKekulizationFailure,
  kSyntax,
};

/// Stable names used as ingest-report categories ("UnknownElement", ...).
std::string_view smiles_error_name(SmilesErrorKind kind);

using SmilesError = TypedError<SmilesErrorKind>;

/// Parses the supported SMILES subset: organic-subset and bracket atoms with
/// charge and hydrogen count, bonds `- = # :`, ring closures (digits and
/// %nn), branches and lowercase aromatic atoms. Stereo, isotopes, atom
/// classes and multi-fragment input are rejected as kUnsupportedFeature.
///
/// Atom order follows reading order. Aromatic systems are kekulized, and
/// hydrogen counts from bracket atoms are used for that step only; the
/// returned graph stores no hydrogens.
MolGraph parse_smiles(std::string_view smiles,
                      const ValenceTable &table = ValenceTable::standard());

/// Assigns single/double orders to aromatic bonds. `needs_double[i]` marks
/// atoms that must receive exactly one double bond; `bonds` indexes into that
/// array. Returns one order per input bond. Throws kKekulizationFailure when
/// no perfect matching of the marked atoms exists.
std::vector<BondOrder> kekulize(std::span<const char> needs_double,
                                std::span<const std::pair<int, int>> bonds);

/// Canonical-order Kekulé SMILES; equal to canonical_key(graph).
std::string write_smiles(const MolGraph &graph);

}  // namespace g2t

#endif  // G2T_SMILES_H_
