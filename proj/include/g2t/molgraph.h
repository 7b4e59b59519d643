//
// Project g2t - Copyright 2026 The g2t Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef G2T_MOLGRAPH_H_
#define G2T_MOLGRAPH_H_

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "g2t/error.h"

namespace g2t {

// Elements the library can represent. The order is significant: it is the
// primary key of the canonical atom ordering and the token order of the
// ELEM alphabet.
enum class Element : std::uint8_t {
  kB,
  kC,
  kN,
  kO,
  kF,
  kP,
  kS,
  kCl,
  kBr,
  kI,
  kH,
};

inline constexpr int kNumElements = 11;

inline constexpr std::array<Element, kNumElements> kAllElements {
  Element::kB, Element::kC,  Element::kN,  Element::kO,
  Element::kF, Element::kP,  Element::kS,  Element::kCl,
  Element::kBr, Element::kI, Element::kH,
};

// Everything except hydrogen; the alphabet generated trees may use.
inline constexpr std::array<Element, kNumElements - 1> kHeavyElements {
  Element::kB, Element::kC, Element::kN,  Element::kO,  Element::kF,
  Element::kP, Element::kS, Element::kCl, Element::kBr, Element::kI,
};

std::string_view element_symbol(Element e);
std::optional<Element> element_from_symbol(std::string_view symbol);
int atomic_number(Element e);

constexpr int element_index(Element e) { return static_cast<int>(e); }

enum class BondOrder : std::uint8_t {
  kSingle = 1,
  kDouble = 2,
  kTriple = 3,
};

inline constexpr std::array<BondOrder, 3> kAllBondOrders {
  BondOrder::kSingle,
  BondOrder::kDouble,
  BondOrder::kTriple,
};

constexpr int bond_valence(BondOrder o) { return static_cast<int>(o); }

/// "single", "double" or "triple".
std::string_view bond_order_name(BondOrder o);
std::optional<BondOrder> bond_order_from_name(std::string_view name);
std::optional<BondOrder> bond_order_from_valence(int v);

inline constexpr int kMinCharge = -2;
inline constexpr int kMaxCharge = 2;

struct Atom {
  Element element;
  int charge = 0;

  friend bool operator==(const Atom &, const Atom &) = default;
};

struct Bond {
  int begin;
  int end;
  BondOrder order;

  friend bool operator==(const Bond &, const Bond &) = default;
};

enum class GraphErrorKind {
  kEmpty,
  kChargeOutOfRange,
  kBadIndex,
  kSelfLoop,
  kDuplicateBond,
  kDisconnected,
};

std::string_view graph_error_name(GraphErrorKind kind);

using GraphError = TypedError<GraphErrorKind>;

/// Undirected, connected, simple molecular graph with implicit hydrogens.
///
/// Instances are immutable; the constructor validates every structural
/// invariant and throws GraphError otherwise. Bonds are stored normalized
/// (begin < end) and sorted, so two graphs built from the same atom list and
/// the same bond set compare equal regardless of input order.
class MolGraph {
public:
  struct Neighbor {
    int atom;
    BondOrder order;
    int bond;
  };

  MolGraph(std::vector<Atom> atoms, std::vector<Bond> bonds);

  int num_atoms() const { return static_cast<int>(atoms_.size()); }
  int num_bonds() const { return static_cast<int>(bonds_.size()); }

  const Atom &atom(int i) const { return atoms_[i]; }
  std::span<const Atom> atoms() const { return atoms_; }
  const Bond &bond(int b) const { return bonds_[b]; }
  std::span<const Bond> bonds() const { return bonds_; }

  std::span<const Neighbor> neighbors(int i) const { return adjacency_[i]; }
  int degree(int i) const { return static_cast<int>(adjacency_[i].size()); }

  // Sum of incident bond orders.
  int bond_order_sum(int i) const;

  std::optional<BondOrder> bond_order(int i, int j) const;

  /// Relabels atoms: atom i of this graph becomes atom perm[i] of the result.
  MolGraph permuted(std::span<const int> perm) const;

  /// |E| - |V| + 1.
  int cyclomatic_number() const { return num_bonds() - num_atoms() + 1; }

  friend bool operator==(const MolGraph &a, const MolGraph &b) {
    return a.atoms_ == b.atoms_ && a.bonds_ == b.bonds_;
  }

private:
  std::vector<Atom> atoms_;
  std::vector<Bond> bonds_;
  std::vector<std::vector<Neighbor>> adjacency_;
};

/// Allowed total bond-order sums per element, shifted by formal charge.
class ValenceTable {
public:
  /// B:3 C:4 N:3 O:2 F:1 P:3,5 S:2,4,6 Cl/Br/I:1 H:1.
  static const ValenceTable &standard();

  explicit ValenceTable(std::array<std::vector<int>, kNumElements> base);

  /// { v + charge : v in base(e) } restricted to positive values, ascending.
  std::vector<int> allowed(Element e, int charge) const;

  /// Largest allowed valence, or 0 when the allowed set is empty.
  int max_valence(Element e, int charge) const;

  /// Implicit hydrogen count: distance from sum to the smallest allowed
  /// valence >= sum, or 0 if sum already exceeds every allowed value.
  int implicit_hydrogens(Element e, int charge, int sum) const;

  const std::vector<int> &base(Element e) const {
    return base_[element_index(e)];
  }

private:
  std::array<std::vector<int>, kNumElements> base_;
};

struct ValenceVerdict {
  std::vector<int> violations;

  bool ok() const { return violations.empty(); }
};

/// Flags atoms whose bond-order sum exceeds the largest allowed valence.
/// Shortfalls are implicit hydrogens and never a violation.
ValenceVerdict validate_valence(const MolGraph &graph,
                                const ValenceTable &table
                                = ValenceTable::standard());

/// Canonical atom ranks (a permutation of 0..n-1) from iterative
/// neighborhood refinement with individualization of residual ties.
std::vector<int> canonical_ranks(const MolGraph &graph);

/// Relabeling-invariant identity text. It is the canonical SMILES emitted by
/// a DFS in canonical rank order, so equal keys mean equal molecules.
std::string canonical_key(const MolGraph &graph);

}  // namespace g2t

#endif  // G2T_MOLGRAPH_H_
