//
// Project g2t - Copyright 2026 The g2t Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <algorithm>
#include <array>
#include <numeric>
#include <string>
#include <vector>

#include "dfs_writer.h"
#include "g2t/molgraph.h"

namespace g2t {
namespace {

using Key = std::vector<int>;

// Dense class ids: equal keys share an id, ids ordered by key.
int dense_rank(const std::vector<Key> &keys, std::vector<int> &classes) {
  const int n = static_cast<int>(keys.size());
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return keys[a] < keys[b]; });
  classes.assign(n, 0);
  int cls = 0;
  for (int k = 0; k < n; ++k) {
    if (k > 0 && keys[order[k]] != keys[order[k - 1]])
      ++cls;
    classes[order[k]] = cls;
  }
  return n == 0 ? 0 : cls + 1;
}

Key initial_invariant(const MolGraph &g, int a) {
  const Atom &atom = g.atom(a);
  Key key { element_index(atom.element), atom.charge, g.degree(a) };
  std::vector<int> orders;
  for (const auto &nb: g.neighbors(a))
    orders.push_back(-bond_valence(nb.order));
  // Higher bond orders sort first.
  std::sort(orders.begin(), orders.end());
  key.insert(key.end(), orders.begin(), orders.end());
  return key;
}

int refine(const MolGraph &g, std::vector<int> &classes, int count) {
  const int n = g.num_atoms();
  std::vector<Key> keys(n);
  std::vector<std::pair<int, int>> nbrs;
  while (true) {
    for (int a = 0; a < n; ++a) {
      nbrs.clear();
      for (const auto &nb: g.neighbors(a))
        nbrs.emplace_back(classes[nb.atom], bond_valence(nb.order));
      std::sort(nbrs.begin(), nbrs.end());
      Key &key = keys[a];
      key.assign(1, classes[a]);
      for (auto [c, o]: nbrs) {
        key.push_back(c);
        key.push_back(o);
      }
    }
    const int next = dense_rank(keys, classes);
    if (next == count)
      return count;
    count = next;
  }
}

std::string atom_text(const Atom &atom) {
  const std::string_view sym = element_symbol(atom.element);
  if (atom.charge == 0 && atom.element != Element::kH)
    return std::string(sym);
  std::string out = "[";
  out += sym;
  if (atom.charge > 0)
    out += '+';
  else if (atom.charge < 0)
    out += '-';
  if (atom.charge > 1 || atom.charge < -1)
    out += std::to_string(atom.charge > 0 ? atom.charge : -atom.charge);
  out += ']';
  return out;
}

std::string_view bond_symbol(BondOrder o) {
  switch (o) {
  case BondOrder::kSingle:
    return "";
  case BondOrder::kDouble:
    return "=";
  case BondOrder::kTriple:
    return "#";
  }
  return "";
}

class DfsWriter {
public:
  DfsWriter(const MolGraph &g, std::span<const int> ranks)
      : g_(g), ranks_(ranks), children_(g.num_atoms()),
        parent_order_(g.num_atoms(), BondOrder::kSingle),
        closures_at_(g.num_atoms()), preorder_(g.num_atoms(), -1),
        edge_used_(g.num_bonds(), 0) { }

  std::string run() {
    const int root = static_cast<int>(
        std::min_element(ranks_.begin(), ranks_.end()) - ranks_.begin());
    visit(root);
    emit(root);
    return std::move(out_);
  }

private:
  struct Closure {
    int opener;
    int closer;
    BondOrder order;
    int digit = 0;
  };

  void visit(int a) {
    preorder_[a] = counter_++;
    std::vector<MolGraph::Neighbor> nbrs(g_.neighbors(a).begin(),
                                         g_.neighbors(a).end());
    std::sort(nbrs.begin(), nbrs.end(), [&](const auto &x, const auto &y) {
      return ranks_[x.atom] < ranks_[y.atom];
    });
    for (const auto &nb: nbrs) {
      if (edge_used_[nb.bond])
        continue;
      edge_used_[nb.bond] = 1;
      if (preorder_[nb.atom] < 0) {
        children_[a].push_back(nb.atom);
        parent_order_[nb.atom] = nb.order;
        visit(nb.atom);
      } else {
        const int cid = static_cast<int>(closures_.size());
        closures_.push_back({ nb.atom, a, nb.order });
        closures_at_[nb.atom].push_back(cid);
        closures_at_[a].push_back(cid);
      }
    }
  }

  void emit(int a) {
    out_ += atom_text(g_.atom(a));

    auto &mine = closures_at_[a];
    std::sort(mine.begin(), mine.end(), [&](int x, int y) {
      return preorder_[partner(x, a)] < preorder_[partner(y, a)];
    });
    std::vector<int> released;
    for (int cid: mine) {
      Closure &c = closures_[cid];
      if (c.closer == a) {
        out_ += bond_symbol(c.order);
        write_digit(c.digit);
        released.push_back(c.digit);
      } else {
        c.digit = acquire_digit();
        write_digit(c.digit);
      }
    }
    for (int d: released)
      digits_in_use_[d] = false;

    const auto &kids = children_[a];
    for (size_t k = 0; k < kids.size(); ++k) {
      const bool branch = k + 1 < kids.size();
      if (branch)
        out_ += '(';
      out_ += bond_symbol(parent_order_[kids[k]]);
      emit(kids[k]);
      if (branch)
        out_ += ')';
    }
  }

  int partner(int cid, int a) const {
    const Closure &c = closures_[cid];
    return c.opener == a ? c.closer : c.opener;
  }

  int acquire_digit() {
    for (int d = 1; d < 100; ++d) {
      if (!digits_in_use_[d]) {
        digits_in_use_[d] = true;
        return d;
      }
    }
    // More than 99 simultaneously open rings is outside any supported input.
    throw Error("ring-closure digits exhausted");
  }

  void write_digit(int d) {
    if (d < 10) {
      out_ += static_cast<char>('0' + d);
    } else {
      out_ += '%';
      out_ += std::to_string(d);
    }
  }

  const MolGraph &g_;
  std::span<const int> ranks_;
  std::vector<std::vector<int>> children_;
  std::vector<BondOrder> parent_order_;
  std::vector<std::vector<int>> closures_at_;
  std::vector<int> preorder_;
  std::vector<char> edge_used_;
  std::vector<Closure> closures_;
  std::array<bool, 100> digits_in_use_ {};
  int counter_ = 0;
  std::string out_;
};

}  // namespace

std::vector<int> canonical_ranks(const MolGraph &graph) {
  const int n = graph.num_atoms();
  std::vector<Key> keys(n);
  for (int a = 0; a < n; ++a)
    keys[a] = initial_invariant(graph, a);

  std::vector<int> classes;
  int count = dense_rank(keys, classes);
  count = refine(graph, classes, count);

  while (count < n) {
    // Individualize the lowest-indexed atom of the first tied class.
    std::vector<int> size(count, 0);
    for (int c: classes)
      ++size[c];
    const int tied = static_cast<int>(
        std::find_if(size.begin(), size.end(), [](int s) { return s > 1; })
        - size.begin());
    const int chosen = static_cast<int>(
        std::find(classes.begin(), classes.end(), tied) - classes.begin());
    for (int a = 0; a < n; ++a)
      keys[a] = { classes[a], a == chosen ? 0 : 1 };
    count = dense_rank(keys, classes);
    count = refine(graph, classes, count);
  }
  return classes;
}

std::string canonical_key(const MolGraph &graph) {
  const std::vector<int> ranks = canonical_ranks(graph);
  return internal::write_dfs_smiles(graph, ranks);
}

namespace internal {

std::string write_dfs_smiles(const MolGraph &graph,
                             std::span<const int> ranks) {
  return DfsWriter(graph, ranks).run();
}

}  // namespace internal
}  // namespace g2t
