//
// Project g2t - Copyright 2026 The g2t Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "g2t/molgraph.h"

#include <algorithm>
#include <string>
#include <utility>
#include <vector>

namespace g2t {
namespace {

constexpr std::array<std::string_view, kNumElements> kSymbols {
  "B", "C", "N", "O", "F", "P", "S", "Cl", "Br", "I", "H",
};

constexpr std::array<int, kNumElements> kAtomicNumbers {
  5, 6, 7, 8, 9, 15, 16, 17, 35, 53, 1,
};

constexpr std::array<std::string_view, 3> kBondNames {
  "single",
  "double",
  "triple",
};

}  // namespace

std::string_view element_symbol(Element e) {
  return kSymbols[element_index(e)];
}

std::optional<Element> element_from_symbol(std::string_view symbol) {
  for (int i = 0; i < kNumElements; ++i)
    if (kSymbols[i] == symbol)
      return static_cast<Element>(i);
  return std::nullopt;
}

int atomic_number(Element e) {
  return kAtomicNumbers[element_index(e)];
}

std::string_view bond_order_name(BondOrder o) {
  return kBondNames[bond_valence(o) - 1];
}

std::optional<BondOrder> bond_order_from_name(std::string_view name) {
  for (int i = 0; i < 3; ++i)
    if (kBondNames[i] == name)
      return static_cast<BondOrder>(i + 1);
  return std::nullopt;
}

std::optional<BondOrder> bond_order_from_valence(int v) {
  if (v < 1 || v > 3)
    return std::nullopt;
  return static_cast<BondOrder>(v);
}

std::string_view graph_error_name(GraphErrorKind kind) {
  switch (kind) {
  case GraphErrorKind::kEmpty:
    return "EmptyGraph";
  case GraphErrorKind::kChargeOutOfRange:
    return "ChargeOutOfRange";
  case GraphErrorKind::kBadIndex:
    return "BadAtomIndex";
  case GraphErrorKind::kSelfLoop:
    return "SelfLoop";
  case GraphErrorKind::kDuplicateBond:
    return "DuplicateBond";
  case GraphErrorKind::kDisconnected:
    return "Disconnected";
  }
  return "GraphError";
}

MolGraph::MolGraph(std::vector<Atom> atoms, std::vector<Bond> bonds)
    : atoms_(std::move(atoms)), bonds_(std::move(bonds)) {
  const int n = num_atoms();
  if (n == 0)
    throw GraphError(GraphErrorKind::kEmpty, "molecular graph has no atoms");

  for (int i = 0; i < n; ++i) {
    const int q = atoms_[i].charge;
    if (q < kMinCharge || q > kMaxCharge)
      throw GraphError(GraphErrorKind::kChargeOutOfRange,
                       "formal charge " + std::to_string(q) + " on atom "
                           + std::to_string(i) + " outside [-2, 2]");
  }

  for (Bond &b: bonds_) {
    if (b.begin < 0 || b.begin >= n || b.end < 0 || b.end >= n)
      throw GraphError(GraphErrorKind::kBadIndex,
                       "bond endpoint out of range");
    if (b.begin == b.end)
      throw GraphError(GraphErrorKind::kSelfLoop,
                       "self-loop on atom " + std::to_string(b.begin));
    if (b.begin > b.end)
      std::swap(b.begin, b.end);
  }

  std::sort(bonds_.begin(), bonds_.end(), [](const Bond &x, const Bond &y) {
    return std::pair(x.begin, x.end) < std::pair(y.begin, y.end);
  });
  for (size_t k = 1; k < bonds_.size(); ++k) {
    if (bonds_[k].begin == bonds_[k - 1].begin
        && bonds_[k].end == bonds_[k - 1].end)
      throw GraphError(GraphErrorKind::kDuplicateBond,
                       "duplicate bond " + std::to_string(bonds_[k].begin)
                           + "-" + std::to_string(bonds_[k].end));
  }

  adjacency_.resize(n);
  for (int k = 0; k < num_bonds(); ++k) {
    const Bond &b = bonds_[k];
    adjacency_[b.begin].push_back({ b.end, b.order, k });
    adjacency_[b.end].push_back({ b.begin, b.order, k });
  }

  std::vector<char> seen(n, 0);
  std::vector<int> stack { 0 };
  seen[0] = 1;
  int reached = 1;
  while (!stack.empty()) {
    const int a = stack.back();
    stack.pop_back();
    for (const Neighbor &nb: adjacency_[a]) {
      if (!seen[nb.atom]) {
        seen[nb.atom] = 1;
        ++reached;
        stack.push_back(nb.atom);
      }
    }
  }
  if (reached != n)
    throw GraphError(GraphErrorKind::kDisconnected,
                     "molecular graph has more than one fragment");
}

int MolGraph::bond_order_sum(int i) const {
  int sum = 0;
  for (const Neighbor &nb: adjacency_[i])
    sum += bond_valence(nb.order);
  return sum;
}

std::optional<BondOrder> MolGraph::bond_order(int i, int j) const {
  for (const Neighbor &nb: adjacency_[i])
    if (nb.atom == j)
      return nb.order;
  return std::nullopt;
}

MolGraph MolGraph::permuted(std::span<const int> perm) const {
  std::vector<Atom> atoms(atoms_.size());
  for (int i = 0; i < num_atoms(); ++i)
    atoms[perm[i]] = atoms_[i];
  std::vector<Bond> bonds;
  bonds.reserve(bonds_.size());
  for (const Bond &b: bonds_)
    bonds.push_back({ perm[b.begin], perm[b.end], b.order });
  return MolGraph(std::move(atoms), std::move(bonds));
}

/* ValenceTable */

const ValenceTable &ValenceTable::standard() {
  static const ValenceTable table({ {
      { 3 },        // B
      { 4 },        // C
      { 3 },        // N
      { 2 },        // O
      { 1 },        // F
      { 3, 5 },     // P
      { 2, 4, 6 },  // S
      { 1 },        // Cl
      { 1 },        // Br
      { 1 },        // I
      { 1 },        // H
  } });
  return table;
}

ValenceTable::ValenceTable(std::array<std::vector<int>, kNumElements> base)
    : base_(std::move(base)) {
  for (auto &v: base_)
    std::sort(v.begin(), v.end());
}

std::vector<int> ValenceTable::allowed(Element e, int charge) const {
  std::vector<int> out;
  for (int v: base_[element_index(e)])
    if (v + charge > 0)
      out.push_back(v + charge);
  return out;
}

int ValenceTable::max_valence(Element e, int charge) const {
  const auto &b = base_[element_index(e)];
  if (b.empty())
    return 0;
  return std::max(0, b.back() + charge);
}

int ValenceTable::implicit_hydrogens(Element e, int charge, int sum) const {
  for (int v: base_[element_index(e)])
    if (v + charge > 0 && v + charge >= sum)
      return v + charge - sum;
  return 0;
}

ValenceVerdict validate_valence(const MolGraph &graph,
                                const ValenceTable &table) {
  ValenceVerdict verdict;
  for (int i = 0; i < graph.num_atoms(); ++i) {
    const Atom &a = graph.atom(i);
    if (graph.bond_order_sum(i) > table.max_valence(a.element, a.charge))
      verdict.violations.push_back(i);
  }
  return verdict;
}

}  // namespace g2t
