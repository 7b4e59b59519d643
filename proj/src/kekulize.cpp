//
// Project g2t - Copyright 2026 The g2t Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <numeric>
#include <queue>
#include <vector>

#include "g2t/smiles.h"

namespace g2t {
namespace {

// Edmonds' blossom algorithm for maximum matching in a general graph.
// Aromatic systems with odd rings (azulene, fused 5-rings) are not
// bipartite, so a bipartite matcher is not enough.
class BlossomMatcher {
public:
  explicit BlossomMatcher(int n)
      : n_(n), adj_(n), match_(n, -1), parent_(n), base_(n), used_(n),
        blossom_(n) { }

  void add_edge(int a, int b) {
    adj_[a].push_back(b);
    adj_[b].push_back(a);
  }

  const std::vector<int> &solve() {
    // Greedy seed, then augment from every exposed vertex.
    for (int v = 0; v < n_; ++v) {
      if (match_[v] != -1)
        continue;
      for (int to: adj_[v]) {
        if (match_[to] == -1) {
          match_[to] = v;
          match_[v] = to;
          break;
        }
      }
    }
    for (int v = 0; v < n_; ++v) {
      if (match_[v] != -1)
        continue;
      int u = find_path(v);
      while (u != -1) {
        const int pv = parent_[u];
        const int ppv = match_[pv];
        match_[u] = pv;
        match_[pv] = u;
        u = ppv;
      }
    }
    return match_;
  }

private:
  int lca(int a, int b) {
    std::vector<char> seen(n_, 0);
    while (true) {
      a = base_[a];
      seen[a] = 1;
      if (match_[a] == -1)
        break;
      a = parent_[match_[a]];
    }
    while (true) {
      b = base_[b];
      if (seen[b])
        return b;
      b = parent_[match_[b]];
    }
  }

  void mark_path(int v, int b, int child) {
    while (base_[v] != b) {
      blossom_[base_[v]] = blossom_[base_[match_[v]]] = 1;
      parent_[v] = child;
      child = match_[v];
      v = parent_[match_[v]];
    }
  }

  int find_path(int root) {
    std::fill(used_.begin(), used_.end(), 0);
    std::fill(parent_.begin(), parent_.end(), -1);
    std::iota(base_.begin(), base_.end(), 0);
    used_[root] = 1;
    std::queue<int> q;
    q.push(root);
    while (!q.empty()) {
      const int v = q.front();
      q.pop();
      for (int to: adj_[v]) {
        if (base_[v] == base_[to] || match_[v] == to)
          continue;
        if (to == root || (match_[to] != -1 && parent_[match_[to]] != -1)) {
          const int cur = lca(v, to);
          std::fill(blossom_.begin(), blossom_.end(), 0);
          mark_path(v, cur, to);
          mark_path(to, cur, v);
          for (int i = 0; i < n_; ++i) {
            if (blossom_[base_[i]]) {
              base_[i] = cur;
              if (!used_[i]) {
                used_[i] = 1;
                q.push(i);
              }
            }
          }
        } else if (parent_[to] == -1) {
          parent_[to] = v;
          if (match_[to] == -1)
            return to;
          used_[match_[to]] = 1;
          q.push(match_[to]);
        }
      }
    }
    return -1;
  }

  int n_;
  std::vector<std::vector<int>> adj_;
  std::vector<int> match_, parent_, base_;
  std::vector<char> used_, blossom_;
};

}  // namespace

std::vector<BondOrder> kekulize(std::span<const char> needs_double,
                                std::span<const std::pair<int, int>> bonds) {
  const int n = static_cast<int>(needs_double.size());
  BlossomMatcher matcher(n);
  for (auto [a, b]: bonds) {
    if (needs_double[a] && needs_double[b])
      matcher.add_edge(a, b);
  }
  const std::vector<int> &match = matcher.solve();
  for (int v = 0; v < n; ++v) {
    if (needs_double[v] && match[v] == -1)
      throw SmilesError(SmilesErrorKind::kKekulizationFailure,
                        "cannot kekulize aromatic system: atom "
                            + std::to_string(v)
                            + " has no partner for a double bond");
  }

  std::vector<BondOrder> orders;
  orders.reserve(bonds.size());
  for (auto [a, b]: bonds) {
    orders.push_back(needs_double[a] && match[a] == b ? BondOrder::kDouble
                                                      : BondOrder::kSingle);
  }
  return orders;
}

}  // namespace g2t
