//
// Project g2t - Copyright 2026 The g2t Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "g2t/smiles.h"

#include <cctype>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace g2t {

std::string_view smiles_error_name(SmilesErrorKind kind) {
  switch (kind) {
  case SmilesErrorKind::kEmptyInput:
    return "EmptyInput";
  case SmilesErrorKind::kUnknownElement:
    return "UnknownElement";
  case SmilesErrorKind::kUnclosedRing:
    return "UnclosedRing";
  case SmilesErrorKind::kUnsupportedFeature:
    return "UnsupportedFeature";
  case SmilesErrorKind::kKekulizationFailure:
    return "KekulizationFailure";
  case SmilesErrorKind::kSyntax:
    return "SyntaxError";
  }
  return "SmilesError";
}

namespace {

struct ParsedAtom {
  Element element;
  int charge = 0;
  bool aromatic = false;
  int hcount = 0;
};

struct ParsedBond {
  int a;
  int b;
  char symbol;  // 0 when implicit
};

struct RingOpening {
  int atom;
  char symbol;
};

class SmilesParser {
public:
  explicit SmilesParser(std::string_view text): s_(text) { }

  void run() {
    if (s_.empty())
      fail(SmilesErrorKind::kEmptyInput, "empty SMILES");

    while (pos_ < s_.size()) {
      const char c = s_[pos_];
      if (c == '[') {
        add_atom(parse_bracket_atom());
      } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '*') {
        add_atom(parse_organic_atom());
      } else if (c == '(') {
        if (prev_ < 0 || pending_ != 0)
          fail(SmilesErrorKind::kSyntax, "misplaced '('");
        branches_.push_back(prev_);
        ++pos_;
      } else if (c == ')') {
        if (branches_.empty() || pending_ != 0)
          fail(SmilesErrorKind::kSyntax, "misplaced ')'");
        prev_ = branches_.back();
        branches_.pop_back();
        ++pos_;
      } else if (c == '-' || c == '=' || c == '#' || c == ':') {
        if (pending_ != 0 || prev_ < 0)
          fail(SmilesErrorKind::kSyntax, "misplaced bond symbol");
        pending_ = c;
        ++pos_;
      } else if (c == '/' || c == '\\') {
        fail(SmilesErrorKind::kUnsupportedFeature,
             "directional (stereo) bonds are not supported");
      } else if (c == '$') {
        fail(SmilesErrorKind::kUnsupportedFeature,
             "quadruple bonds are not supported");
      } else if (c == '.') {
        fail(SmilesErrorKind::kUnsupportedFeature,
             "multi-fragment SMILES are not supported");
      } else if (std::isdigit(static_cast<unsigned char>(c)) || c == '%') {
        ring_bond(parse_ring_number());
      } else {
        fail(SmilesErrorKind::kSyntax,
             std::string("unexpected character '") + c + "'");
      }
    }

    if (atoms_.empty())
      fail(SmilesErrorKind::kSyntax, "no atoms");
    if (pending_ != 0)
      fail(SmilesErrorKind::kSyntax, "dangling bond symbol");
    if (!branches_.empty())
      fail(SmilesErrorKind::kSyntax, "unclosed branch");
    if (!rings_.empty())
      fail(SmilesErrorKind::kUnclosedRing,
           "unclosed ring bond " + std::to_string(rings_.begin()->first));
  }

  MolGraph build(const ValenceTable &table) const {
    const int n = static_cast<int>(atoms_.size());
    std::vector<int> sum(n, 0);
    std::vector<char> aromatic_bond(bonds_.size(), 0);
    for (size_t k = 0; k < bonds_.size(); ++k) {
      const ParsedBond &b = bonds_[k];
      int order = 1;
      if (b.symbol == ':'
          || (b.symbol == 0 && atoms_[b.a].aromatic && atoms_[b.b].aromatic))
        aromatic_bond[k] = 1;
      else if (b.symbol == '=')
        order = 2;
      else if (b.symbol == '#')
        order = 3;
      sum[b.a] += order;
      sum[b.b] += order;
    }

    std::vector<char> needs(n, 0);
    for (int i = 0; i < n; ++i) {
      const ParsedAtom &a = atoms_[i];
      if (!a.aromatic)
        continue;
      needs[i] = table.implicit_hydrogens(a.element, a.charge,
                                          sum[i] + a.hcount)
                 >= 1;
    }

    std::vector<std::pair<int, int>> arom;
    for (size_t k = 0; k < bonds_.size(); ++k)
      if (aromatic_bond[k])
        arom.emplace_back(bonds_[k].a, bonds_[k].b);
    const std::vector<BondOrder> kekule = kekulize(needs, arom);

    std::vector<Atom> atoms;
    atoms.reserve(n);
    for (const ParsedAtom &a: atoms_)
      atoms.push_back({ a.element, a.charge });
    std::vector<Bond> bonds;
    bonds.reserve(bonds_.size());
    size_t next_arom = 0;
    for (size_t k = 0; k < bonds_.size(); ++k) {
      const ParsedBond &b = bonds_[k];
      BondOrder order = BondOrder::kSingle;
      if (aromatic_bond[k])
        order = kekule[next_arom++];
      else if (b.symbol == '=')
        order = BondOrder::kDouble;
      else if (b.symbol == '#')
        order = BondOrder::kTriple;
      bonds.push_back({ b.a, b.b, order });
    }

    try {
      return MolGraph(std::move(atoms), std::move(bonds));
    } catch (const GraphError &e) {
      throw SmilesError(SmilesErrorKind::kSyntax, e.what());
    }
  }

private:
  [[noreturn]] void fail(SmilesErrorKind kind, const std::string &msg) const {
    throw SmilesError(kind, msg + " at position " + std::to_string(pos_));
  }

  char peek(size_t off = 0) const {
    return pos_ + off < s_.size() ? s_[pos_ + off] : '\0';
  }

  void add_atom(const ParsedAtom &atom) {
    const int idx = static_cast<int>(atoms_.size());
    atoms_.push_back(atom);
    if (prev_ >= 0)
      bonds_.push_back({ prev_, idx, pending_ });
    else if (idx > 0)
      fail(SmilesErrorKind::kSyntax, "atom without attachment point");
    prev_ = idx;
    pending_ = 0;
  }

  ParsedAtom parse_organic_atom() {
    const char c = s_[pos_++];
    ParsedAtom a;
    switch (c) {
    case 'B':
      if (peek() == 'r') {
        ++pos_;
        a.element = Element::kBr;
      } else {
        a.element = Element::kB;
      }
      return a;
    case 'C':
      if (peek() == 'l') {
        ++pos_;
        a.element = Element::kCl;
      } else {
        a.element = Element::kC;
      }
      return a;
    case 'N':
      a.element = Element::kN;
      return a;
    case 'O':
      a.element = Element::kO;
      return a;
    case 'P':
      a.element = Element::kP;
      return a;
    case 'S':
      a.element = Element::kS;
      return a;
    case 'F':
      a.element = Element::kF;
      return a;
    case 'I':
      a.element = Element::kI;
      return a;
    case 'b':
    case 'c':
    case 'n':
    case 'o':
    case 'p':
    case 's':
      a.element = *aromatic_element(std::string(1, c));
      a.aromatic = true;
      return a;
    default:
      --pos_;
      fail(SmilesErrorKind::kUnknownElement,
           std::string("unknown atom symbol '") + c + "'");
    }
  }

  static std::optional<Element> aromatic_element(const std::string &sym) {
    if (sym == "b")
      return Element::kB;
    if (sym == "c")
      return Element::kC;
    if (sym == "n")
      return Element::kN;
    if (sym == "o")
      return Element::kO;
    if (sym == "p")
      return Element::kP;
    if (sym == "s")
      return Element::kS;
    return std::nullopt;
  }

  ParsedAtom parse_bracket_atom() {
    ++pos_;  // '['
    if (std::isdigit(static_cast<unsigned char>(peek())))
      fail(SmilesErrorKind::kUnsupportedFeature, "isotopes are not supported");

    ParsedAtom a;
    std::string sym;
    if (std::isupper(static_cast<unsigned char>(peek()))) {
      sym += s_[pos_++];
      while (std::islower(static_cast<unsigned char>(peek())))
        sym += s_[pos_++];
      auto e = element_from_symbol(sym);
      if (!e)
        fail(SmilesErrorKind::kUnknownElement,
             "unsupported element '" + sym + "'");
      a.element = *e;
    } else if (std::islower(static_cast<unsigned char>(peek()))) {
      while (std::islower(static_cast<unsigned char>(peek())))
        sym += s_[pos_++];
      auto e = aromatic_element(sym);
      if (!e)
        fail(SmilesErrorKind::kUnknownElement,
             "unsupported aromatic element '" + sym + "'");
      a.element = *e;
      a.aromatic = true;
    } else if (peek() == '*') {
      fail(SmilesErrorKind::kUnknownElement, "wildcard atom");
    } else {
      fail(SmilesErrorKind::kSyntax, "missing element in bracket atom");
    }

    if (peek() == '@')
      fail(SmilesErrorKind::kUnsupportedFeature,
           "chirality is not supported");

    if (peek() == 'H') {
      ++pos_;
      a.hcount = 1;
      if (std::isdigit(static_cast<unsigned char>(peek())))
        a.hcount = s_[pos_++] - '0';
    }

    if (peek() == '+' || peek() == '-') {
      const char sign = s_[pos_++];
      int mag = 1;
      if (std::isdigit(static_cast<unsigned char>(peek()))) {
        mag = 0;
        while (std::isdigit(static_cast<unsigned char>(peek())))
          mag = mag * 10 + (s_[pos_++] - '0');
      } else {
        while (peek() == sign) {
          ++pos_;
          ++mag;
        }
      }
      if (mag > kMaxCharge)
        fail(SmilesErrorKind::kUnsupportedFeature,
             "formal charge magnitude above 2");
      a.charge = sign == '+' ? mag : -mag;
    }

    if (peek() == ':')
      fail(SmilesErrorKind::kUnsupportedFeature,
           "atom classes are not supported");
    if (peek() != ']')
      fail(SmilesErrorKind::kSyntax, "malformed bracket atom");
    ++pos_;
    return a;
  }

  int parse_ring_number() {
    if (peek() == '%') {
      ++pos_;
      if (!std::isdigit(static_cast<unsigned char>(peek()))
          || !std::isdigit(static_cast<unsigned char>(peek(1))))
        fail(SmilesErrorKind::kSyntax, "'%' must be followed by two digits");
      const int n = (s_[pos_] - '0') * 10 + (s_[pos_ + 1] - '0');
      pos_ += 2;
      return n;
    }
    return s_[pos_++] - '0';
  }

  void ring_bond(int number) {
    if (prev_ < 0)
      fail(SmilesErrorKind::kSyntax, "ring bond before any atom");
    auto it = rings_.find(number);
    if (it == rings_.end()) {
      rings_.emplace(number, RingOpening { prev_, pending_ });
      pending_ = 0;
      return;
    }

    const RingOpening open = it->second;
    rings_.erase(it);
    char symbol = pending_;
    if (open.symbol != 0 && pending_ != 0 && open.symbol != pending_)
      fail(SmilesErrorKind::kSyntax, "conflicting ring-closure bond orders");
    if (symbol == 0)
      symbol = open.symbol;
    if (open.atom == prev_)
      fail(SmilesErrorKind::kSyntax, "ring closure onto the same atom");
    bonds_.push_back({ open.atom, prev_, symbol });
    pending_ = 0;
  }

  std::string_view s_;
  size_t pos_ = 0;
  std::vector<ParsedAtom> atoms_;
  std::vector<ParsedBond> bonds_;
  std::vector<int> branches_;
  std::map<int, RingOpening> rings_;
  int prev_ = -1;
  char pending_ = 0;
};

}  // namespace

MolGraph parse_smiles(std::string_view smiles, const ValenceTable &table) {
  SmilesParser parser(smiles);
  parser.run();
  return parser.build(table);
}

std::string write_smiles(const MolGraph &graph) {
  return canonical_key(graph);
}

}  // namespace g2t
