//
// Project g2t - Copyright 2026 The g2t Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "g2t/tree.h"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "g2t/random.h"

namespace g2t {

bool operator==(const TreeNode &a, const TreeNode &b) {
  return a.atom_name == b.atom_name && a.atom_id == b.atom_id
         && a.charge == b.charge && a.bonds == b.bonds;
}

bool operator==(const BondEntry &a, const BondEntry &b) {
  return a.bond_type == b.bond_type && a.atom == b.atom;
}

std::string_view tree_format_name(TreeFormat format) {
  return format == TreeFormat::kJson ? "json" : "xml";
}

std::string_view tree_error_name(TreeErrorKind kind) {
  switch (kind) {
  case TreeErrorKind::kSyntax:
    return "SyntaxError";
  case TreeErrorKind::kSchema:
    return "SchemaError";
  case TreeErrorKind::kInvariantViolation:
    return "InvariantViolation";
  case TreeErrorKind::kDanglingReference:
    return "DanglingReference";
  case TreeErrorKind::kDuplicateDefinition:
    return "DuplicateDefinition";
  case TreeErrorKind::kNameMismatch:
    return "NameMismatch";
  case TreeErrorKind::kParallelEdge:
    return "ParallelEdge";
  case TreeErrorKind::kInvalidBondType:
    return "InvalidBondType";
  case TreeErrorKind::kUnknownElement:
    return "UnknownElement";
  case TreeErrorKind::kChargeOutOfRange:
    return "ChargeOutOfRange";
  }
  return "TreeError";
}

namespace {

[[noreturn]] void fail(TreeErrorKind kind, const std::string &msg) {
  throw TreeError(kind, msg);
}

/* graph -> tree */

class TreeEncoder {
public:
  explicit TreeEncoder(const MolGraph &g)
      : g_(g), ranks_(canonical_ranks(g)), id_of_(g.num_atoms(), -1),
        edge_used_(g.num_bonds(), 0) { }

  TreeNode run(int root) { return visit(root); }

  int lowest_rank() const {
    return static_cast<int>(std::min_element(ranks_.begin(), ranks_.end())
                            - ranks_.begin());
  }

private:
  TreeNode visit(int a) {
    TreeNode node;
    node.atom_name = element_symbol(g_.atom(a).element);
    node.atom_id = id_of_[a] = next_id_++;
    node.charge = g_.atom(a).charge;

    std::vector<MolGraph::Neighbor> nbrs(g_.neighbors(a).begin(),
                                         g_.neighbors(a).end());
    std::sort(nbrs.begin(), nbrs.end(), [&](const auto &x, const auto &y) {
      return ranks_[x.atom] < ranks_[y.atom];
    });

    for (const auto &nb: nbrs) {
      if (edge_used_[nb.bond])
        continue;
      edge_used_[nb.bond] = 1;

      BondEntry entry;
      entry.bond_type = bond_order_name(nb.order);
      if (id_of_[nb.atom] < 0) {
        entry.atom = visit(nb.atom);
      } else {
        entry.atom.atom_name = element_symbol(g_.atom(nb.atom).element);
        entry.atom.atom_id = id_of_[nb.atom];
      }
      node.bonds.push_back(std::move(entry));
    }
    return node;
  }

  const MolGraph &g_;
  std::vector<int> ranks_;
  std::vector<int> id_of_;
  std::vector<char> edge_used_;
  int next_id_ = 0;
};

/* tree -> graph */

class TreeDecoder {
public:
  MolGraph run(const TreeNode &root) {
    define(root);
    walk(root);
    try {
      return MolGraph(std::move(atoms_), std::move(bonds_));
    } catch (const GraphError &e) {
      fail(TreeErrorKind::kInvariantViolation, e.what());
    }
  }

private:
  void define(const TreeNode &node) {
    if (node.atom_id != static_cast<int>(atoms_.size()))
      fail(TreeErrorKind::kDanglingReference,
           "atom_id " + std::to_string(node.atom_id)
               + " is not the next free id "
               + std::to_string(atoms_.size()));
    auto e = element_from_symbol(node.atom_name);
    if (!e)
      fail(TreeErrorKind::kUnknownElement,
           "unknown atom_name '" + node.atom_name + "'");
    if (node.charge < kMinCharge || node.charge > kMaxCharge)
      fail(TreeErrorKind::kChargeOutOfRange,
           "charge " + std::to_string(node.charge) + " out of range");
    atoms_.push_back({ *e, node.charge });
    names_.push_back(node.atom_name);
  }

  void walk(const TreeNode &node) {
    const int self = node.atom_id;
    for (const BondEntry &entry: node.bonds) {
      auto order = bond_order_from_name(entry.bond_type);
      if (!order)
        fail(TreeErrorKind::kInvalidBondType,
             "invalid bond_type '" + entry.bond_type + "'");

      const TreeNode &child = entry.atom;
      const int defined = static_cast<int>(atoms_.size());
      if (child.atom_id < 0 || child.atom_id > defined)
        fail(TreeErrorKind::kDanglingReference,
             "atom_id " + std::to_string(child.atom_id)
                 + " refers to an undefined atom");

      if (child.atom_id == defined) {
        define(child);
        add_bond(self, child.atom_id, *order);
        walk(child);
        continue;
      }

      if (!child.bonds.empty())
        fail(TreeErrorKind::kDuplicateDefinition,
             "atom_id " + std::to_string(child.atom_id)
                 + " is defined twice");
      if (child.atom_name != names_[child.atom_id])
        fail(TreeErrorKind::kNameMismatch,
             "back-reference to atom " + std::to_string(child.atom_id)
                 + " names '" + child.atom_name + "' but it was defined as '"
                 + names_[child.atom_id] + "'");
      if (child.charge != 0)
        fail(TreeErrorKind::kInvariantViolation,
             "back-reference to atom " + std::to_string(child.atom_id)
                 + " carries a charge");
      add_bond(self, child.atom_id, *order);
    }
  }

  void add_bond(int a, int b, BondOrder order) {
    if (a == b)
      fail(TreeErrorKind::kParallelEdge,
           "atom " + std::to_string(a) + " bonds to itself");
    if (!edges_.emplace(std::min(a, b), std::max(a, b)).second)
      fail(TreeErrorKind::kParallelEdge,
           "duplicate bond between atoms " + std::to_string(a) + " and "
               + std::to_string(b));
    bonds_.push_back({ a, b, order });
  }

  std::vector<Atom> atoms_;
  std::vector<std::string> names_;
  std::vector<Bond> bonds_;
  std::set<std::pair<int, int>> edges_;
};

/* serialization */

void write_json(const TreeNode &node, std::string &out) {
  out += R"({"atom_name":")";
  out += node.atom_name;
  out += R"(","atom_id":)";
  out += std::to_string(node.atom_id);
  if (node.charge != 0) {
    out += R"(,"charge":)";
    out += std::to_string(node.charge);
  }
  out += R"(,"bonds":[)";
  for (size_t k = 0; k < node.bonds.size(); ++k) {
    if (k > 0)
      out += ',';
    out += R"({"bond_type":")";
    out += node.bonds[k].bond_type;
    out += R"(","atom":)";
    write_json(node.bonds[k].atom, out);
    out += '}';
  }
  out += "]}";
}

void write_xml(const TreeNode &node, std::string &out) {
  out += R"(<atom name=")";
  out += node.atom_name;
  out += R"(" id=")";
  out += std::to_string(node.atom_id);
  out += '"';
  if (node.charge != 0) {
    out += R"( charge=")";
    out += std::to_string(node.charge);
    out += '"';
  }
  out += '>';
  for (const BondEntry &b: node.bonds) {
    out += R"(<bond type=")";
    out += b.bond_type;
    out += R"(">)";
    write_xml(b.atom, out);
    out += "</bond>";
  }
  out += "</atom>";
}

/* parsing */

// Enforces the id invariants that can be checked without element semantics:
// dense definition order and empty, uncharged back-references. An id past
// the next free one is a dangling reference when the node has no bonds and
// a gap in the definitions otherwise.
class IdChecker {
public:
  void check(int id, int charge, bool has_bonds) {
    if (id == next_id_) {
      ++next_id_;
      return;
    }
    if (id > next_id_ && !has_bonds)
      fail(TreeErrorKind::kDanglingReference,
           "atom_id " + std::to_string(id) + " refers to an undefined atom");
    if (id > next_id_)
      fail(TreeErrorKind::kInvariantViolation,
           "atom_id " + std::to_string(id) + " skips the next free id "
               + std::to_string(next_id_));
    if (has_bonds)
      fail(TreeErrorKind::kInvariantViolation,
           "duplicate atom_id " + std::to_string(id) + " with non-empty bonds");
    if (charge != 0)
      fail(TreeErrorKind::kInvariantViolation,
           "back-reference " + std::to_string(id) + " carries a charge");
  }

private:
  int next_id_ = 0;
};

using nlohmann::json;

int json_int(const json &v, const char *key) {
  if (!v.is_number_integer())
    fail(TreeErrorKind::kSchema, std::string(key) + " must be an integer");
  const auto x = v.get<std::int64_t>();
  if (x < -(1LL << 30) || x > (1LL << 30))
    fail(TreeErrorKind::kSchema, std::string(key) + " out of range");
  return static_cast<int>(x);
}

TreeNode node_from_json(const json &j, IdChecker &ids) {
  if (!j.is_object())
    fail(TreeErrorKind::kSchema, "atom must be an object");
  TreeNode node;
  bool has_name = false, has_id = false, has_bonds = false;
  const json *bonds = nullptr;
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string &key = it.key();
    if (key == "atom_name") {
      if (!it->is_string())
        fail(TreeErrorKind::kSchema, "atom_name must be a string");
      node.atom_name = it->get<std::string>();
      has_name = true;
    } else if (key == "atom_id") {
      node.atom_id = json_int(*it, "atom_id");
      if (node.atom_id < 0)
        fail(TreeErrorKind::kSchema, "atom_id must be non-negative");
      has_id = true;
    } else if (key == "charge") {
      node.charge = json_int(*it, "charge");
    } else if (key == "bonds") {
      if (!it->is_array())
        fail(TreeErrorKind::kSchema, "bonds must be an array");
      bonds = &*it;
      has_bonds = true;
    } else {
      fail(TreeErrorKind::kSchema, "unknown atom key '" + key + "'");
    }
  }
  if (!has_name || !has_id || !has_bonds)
    fail(TreeErrorKind::kSchema,
         std::string("atom is missing required key ")
             + (!has_name ? "atom_name" : !has_id ? "atom_id" : "bonds"));

  ids.check(node.atom_id, node.charge, !bonds->empty());
  node.bonds.resize(bonds->size());
  for (size_t k = 0; k < bonds->size(); ++k) {
    const json &b = (*bonds)[k];
    if (!b.is_object())
      fail(TreeErrorKind::kSchema, "bond must be an object");
    const json *atom = nullptr;
    bool has_type = false;
    for (auto it = b.begin(); it != b.end(); ++it) {
      if (it.key() == "bond_type") {
        if (!it->is_string())
          fail(TreeErrorKind::kSchema, "bond_type must be a string");
        node.bonds[k].bond_type = it->get<std::string>();
        has_type = true;
      } else if (it.key() == "atom") {
        atom = &*it;
      } else {
        fail(TreeErrorKind::kSchema, "unknown bond key '" + it.key() + "'");
      }
    }
    if (!has_type || atom == nullptr)
      fail(TreeErrorKind::kSchema,
           std::string("bond is missing required key ")
               + (!has_type ? "bond_type" : "atom"));
    node.bonds[k].atom = node_from_json(*atom, ids);
  }
  return node;
}

class XmlReader {
public:
  explicit XmlReader(std::string_view s): s_(s) { }

  TreeNode run() {
    IdChecker ids;
    skip_ws();
    TreeNode root = read_atom(ids);
    skip_ws();
    if (pos_ != s_.size())
      syntax("trailing content after root element");
    return root;
  }

private:
  [[noreturn]] void syntax(const std::string &msg) const {
    fail(TreeErrorKind::kSyntax,
         msg + " at offset " + std::to_string(pos_));
  }

  void skip_ws() {
    while (pos_ < s_.size()
           && std::isspace(static_cast<unsigned char>(s_[pos_])))
      ++pos_;
  }

  bool consume(std::string_view lit) {
    if (s_.substr(pos_, lit.size()) != lit)
      return false;
    pos_ += lit.size();
    return true;
  }

  void expect(std::string_view lit) {
    if (!consume(lit))
      syntax("expected '" + std::string(lit) + "'");
  }

  std::string read_name() {
    const size_t start = pos_;
    while (pos_ < s_.size()
           && (std::isalnum(static_cast<unsigned char>(s_[pos_]))
               || s_[pos_] == '_'))
      ++pos_;
    if (start == pos_)
      syntax("expected a name");
    return std::string(s_.substr(start, pos_ - start));
  }

  // Reads attributes up to '>' or '/>'. Returns true for a self-closing tag.
  bool read_attributes(std::vector<std::pair<std::string, std::string>> &out) {
    while (true) {
      skip_ws();
      if (consume("/>"))
        return true;
      if (consume(">"))
        return false;
      std::string name = read_name();
      skip_ws();
      expect("=");
      skip_ws();
      if (pos_ >= s_.size() || (s_[pos_] != '"' && s_[pos_] != '\''))
        syntax("expected a quoted attribute value");
      const char quote = s_[pos_++];
      const size_t start = pos_;
      while (pos_ < s_.size() && s_[pos_] != quote) {
        if (s_[pos_] == '<' || s_[pos_] == '&')
          syntax("unsupported character in attribute value");
        ++pos_;
      }
      if (pos_ == s_.size())
        syntax("unterminated attribute value");
      std::string value(s_.substr(start, pos_ - start));
      ++pos_;
      for (const auto &[k, v]: out)
        if (k == name)
          fail(TreeErrorKind::kSchema, "duplicate attribute '" + name + "'");
      out.emplace_back(std::move(name), std::move(value));
    }
  }

  static int parse_int(const std::string &v, const char *what) {
    int x = 0;
    const char *first = v.data(), *last = v.data() + v.size();
    if (first != last && *first == '+')
      fail(TreeErrorKind::kSchema, std::string(what) + " must be an integer");
    auto [p, ec] = std::from_chars(first, last, x);
    if (ec != std::errc() || p != last || v.empty())
      fail(TreeErrorKind::kSchema, std::string(what) + " must be an integer");
    return x;
  }

  TreeNode read_atom(IdChecker &ids) {
    if (!consume("<"))
      syntax("expected '<atom'");
    const std::string tag = read_name();
    if (tag != "atom")
      fail(TreeErrorKind::kSchema, "expected element <atom>, got <" + tag + ">");

    std::vector<std::pair<std::string, std::string>> attrs;
    const bool closed = read_attributes(attrs);
    TreeNode node;
    bool has_name = false, has_id = false;
    for (const auto &[k, v]: attrs) {
      if (k == "name") {
        node.atom_name = v;
        has_name = true;
      } else if (k == "id") {
        node.atom_id = parse_int(v, "id");
        if (node.atom_id < 0)
          fail(TreeErrorKind::kSchema, "id must be non-negative");
        has_id = true;
      } else if (k == "charge") {
        node.charge = parse_int(v, "charge");
      } else {
        fail(TreeErrorKind::kSchema, "unknown atom attribute '" + k + "'");
      }
    }
    if (!has_name || !has_id)
      fail(TreeErrorKind::kSchema,
           std::string("atom is missing attribute ")
               + (!has_name ? "name" : "id"));
    if (closed) {
      ids.check(node.atom_id, node.charge, false);
      return node;
    }

    // Ids are checked in document order, so this node registers before its
    // children are read.
    skip_ws();
    ids.check(node.atom_id, node.charge, s_.substr(pos_, 2) != "</");

    while (true) {
      skip_ws();
      if (consume("</")) {
        if (read_name() != "atom")
          syntax("mismatched closing tag");
        skip_ws();
        expect(">");
        return node;
      }
      node.bonds.push_back(read_bond(ids));
    }
  }

  BondEntry read_bond(IdChecker &ids) {
    if (!consume("<"))
      syntax("expected '<bond'");
    const std::string tag = read_name();
    if (tag != "bond")
      fail(TreeErrorKind::kSchema, "expected element <bond>, got <" + tag + ">");
    std::vector<std::pair<std::string, std::string>> attrs;
    if (read_attributes(attrs))
      fail(TreeErrorKind::kSchema, "bond must contain an atom");
    BondEntry entry;
    bool has_type = false;
    for (const auto &[k, v]: attrs) {
      if (k != "type")
        fail(TreeErrorKind::kSchema, "unknown bond attribute '" + k + "'");
      entry.bond_type = v;
      has_type = true;
    }
    if (!has_type)
      fail(TreeErrorKind::kSchema, "bond is missing attribute type");
    skip_ws();
    if (s_.substr(pos_, 2) == "</")
      fail(TreeErrorKind::kSchema, "bond must contain an atom");
    entry.atom = read_atom(ids);
    skip_ws();
    if (!consume("</"))
      fail(TreeErrorKind::kSchema, "bond must contain exactly one atom");
    if (read_name() != "bond")
      syntax("mismatched closing tag");
    skip_ws();
    expect(">");
    return entry;
  }

  std::string_view s_;
  size_t pos_ = 0;
};

}  // namespace

TreeNode graph_to_tree(const MolGraph &graph, RootPolicy policy) {
  TreeEncoder encoder(graph);
  int root = encoder.lowest_rank();
  if (policy.kind == RootPolicy::Kind::kSeededRandom) {
    Rng rng(policy.seed);
    root = static_cast<int>(rng.below(graph.num_atoms()));
  }
  return encoder.run(root);
}

MolGraph tree_to_graph(const TreeNode &tree) {
  return TreeDecoder().run(tree);
}

std::string serialize_tree(const TreeNode &tree, TreeFormat format) {
  std::string out;
  if (format == TreeFormat::kJson)
    write_json(tree, out);
  else
    write_xml(tree, out);
  return out;
}

TreeNode parse_tree(std::string_view text, TreeFormat format) {
  if (format == TreeFormat::kXml)
    return XmlReader(text).run();

  json j;
  try {
    j = json::parse(text.begin(), text.end());
  } catch (const json::parse_error &e) {
    fail(TreeErrorKind::kSyntax, e.what());
  }
  IdChecker ids;
  return node_from_json(j, ids);
}

TreeStats tree_stats(const TreeNode &tree) {
  TreeStats stats;
  std::vector<char> seen;
  auto rec = [&](auto &self, const TreeNode &node) -> void {
    if (node.atom_id >= static_cast<int>(seen.size()))
      seen.resize(node.atom_id + 1, 0);
    if (seen[node.atom_id]) {
      ++stats.back_references;
    } else {
      seen[node.atom_id] = 1;
      ++stats.definitions;
    }
    for (const BondEntry &b: node.bonds) {
      ++stats.bond_entries;
      self(self, b.atom);
    }
  };
  rec(rec, tree);
  return stats;
}

}  // namespace g2t
