//
// Project g2t - Copyright 2026 The g2t Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "g2t/constrain.h"

#include <algorithm>
#include <array>
#include <string>
#include <utility>
#include <vector>

namespace g2t {
namespace {

constexpr std::array<std::string_view, tok::kVocabSize> kTokenText {
  "{",      "}",      "[",         "]",       ",",      ":",     "\"",
  "atom_name", "atom_id", "charge", "bonds", "bond_type", "atom",
  "B",      "C",      "N",         "O",       "F",      "P",     "S",
  "Cl",     "Br",     "I",         "H",
  "single", "double", "triple",
  "0",      "1",      "2",         "3",       "4",      "5",     "6",
  "7",      "8",      "9",
  "+",      "-",      "<END>",
};

// Tokens grouped by first character, longest text first.
const std::array<std::vector<Token>, 128> &lex_table() {
  static const auto table = [] {
    std::array<std::vector<Token>, 128> t;
    for (int i = 0; i < tok::kEnd; ++i)
      t[static_cast<unsigned char>(kTokenText[i][0])].push_back(
          static_cast<Token>(i));
    for (auto &bucket: t)
      std::stable_sort(bucket.begin(), bucket.end(), [](Token a, Token b) {
        return kTokenText[a].size() > kTokenText[b].size();
      });
    return t;
  }();
  return table;
}

std::string id_text(int id) { return std::to_string(id); }

}  // namespace

TokenKind token_kind(Token t) {
  if (t <= tok::kQuote)
    return TokenKind::kStruct;
  if (t < tok::kFirstElem)
    return TokenKind::kKey;
  if (t < tok::kFirstBondType)
    return TokenKind::kElem;
  if (t < tok::kFirstDigit)
    return TokenKind::kBondType;
  if (t < tok::kPlus)
    return TokenKind::kDigit;
  if (t < tok::kEnd)
    return TokenKind::kSign;
  return TokenKind::kEnd;
}

std::string_view token_text(Token t) { return kTokenText.at(t); }

std::optional<Token> token_from_text(std::string_view text) {
  for (int i = 0; i < tok::kVocabSize; ++i)
    if (kTokenText[i] == text)
      return static_cast<Token>(i);
  return std::nullopt;
}

std::optional<Element> token_element(Token t) {
  if (token_kind(t) != TokenKind::kElem)
    return std::nullopt;
  return kAllElements[t - tok::kFirstElem];
}

std::optional<BondOrder> token_bond_order(Token t) {
  if (token_kind(t) != TokenKind::kBondType)
    return std::nullopt;
  return bond_order_from_valence(t - tok::kFirstBondType + 1);
}

std::optional<int> token_digit(Token t) {
  if (token_kind(t) != TokenKind::kDigit)
    return std::nullopt;
  return t - tok::kFirstDigit;
}

std::string_view constrain_error_name(ConstrainErrorKind kind) {
  switch (kind) {
  case ConstrainErrorKind::kLex:
    return "LexError";
  case ConstrainErrorKind::kEmptyInput:
    return "EmptyInput";
  case ConstrainErrorKind::kIllegalToken:
    return "IllegalToken";
  }
  return "ConstrainError";
}

std::vector<Token> tokenize(std::string_view text) {
  if (text.empty())
    throw ConstrainError(ConstrainErrorKind::kEmptyInput, "empty tree text");

  const auto &table = lex_table();
  std::vector<Token> out;
  out.reserve(text.size() / 2);
  size_t pos = 0;
  while (pos < text.size()) {
    const auto c = static_cast<unsigned char>(text[pos]);
    bool matched = false;
    if (c < 128) {
      for (Token t: table[c]) {
        if (text.substr(pos, kTokenText[t].size()) == kTokenText[t]) {
          out.push_back(t);
          pos += kTokenText[t].size();
          matched = true;
          break;
        }
      }
    }
    if (!matched)
      throw ConstrainError(ConstrainErrorKind::kLex,
                           "no token matches at offset " + std::to_string(pos));
  }
  return out;
}

std::string detokenize(std::span<const Token> tokens) {
  std::string out;
  for (Token t: tokens) {
    if (t == tok::kEnd)
      throw ConstrainError(ConstrainErrorKind::kIllegalToken,
                           "END has no surface text");
    out += kTokenText.at(t);
  }
  return out;
}

/* DecoderState */

using namespace tok;

std::shared_ptr<const DecoderConfig> DecoderState::default_config() {
  static const auto config = std::make_shared<const DecoderConfig>();
  return config;
}

DecoderState::DecoderState(std::shared_ptr<const DecoderConfig> config)
    : config_(std::move(config)) {
  if (config_->atom_budget < 1)
    throw Error("atom budget must be positive");
  set_literal({ kLBrace, kQuote, kAtomName, kQuote, kColon, kQuote },
              Slot::kElement);
}

void DecoderState::set_literal(std::initializer_list<Token> tokens,
                               Slot next) {
  literal_.assign(tokens);
  literal_pos_ = 0;
  slot_ = next;
}

int DecoderState::remaining_valence(int id) const {
  const AtomInfo &a = atoms_[id];
  return config_->table.max_valence(a.element, a.charge) - a.used;
}

bool DecoderState::is_bonded(int a, int b) const {
  const auto &nb = atoms_[a].neighbors;
  return std::find(nb.begin(), nb.end(), b) != nb.end();
}

bool DecoderState::legal_target(int owner, int target, int order) const {
  return target != owner && !is_bonded(owner, target)
         && remaining_valence(target) >= order;
}

bool DecoderState::any_target(int owner, int order,
                              std::optional<Element> element) const {
  for (int t = 0; t < num_defined(); ++t) {
    if (element && atoms_[t].element != *element)
      continue;
    if (legal_target(owner, t, order))
      return true;
  }
  return false;
}

bool DecoderState::can_define() const {
  return num_defined() < config_->atom_budget;
}

bool DecoderState::element_feasible(Element e, int order) const {
  if (config_->schema_only)
    return can_define() || num_defined() > 0;

  if (can_define()) {
    for (int c = kMinCharge; c <= kMaxCharge; ++c)
      if (config_->table.max_valence(e, c) >= order)
        return true;
  }
  return order > 0 && any_target(frames_.back(), order, e);
}

bool DecoderState::charge_feasible(int charge) const {
  if (config_->schema_only)
    return true;
  return config_->table.max_valence(atoms_.back().element, charge)
         >= atoms_.back().used;
}

bool DecoderState::child_feasible(int order) const {
  for (Element e: kHeavyElements)
    if (element_feasible(e, order))
      return true;
  return false;
}

bool DecoderState::can_open_bond() const {
  if (config_->schema_only)
    return true;
  const int owner = frames_.back();
  return remaining_valence(owner) >= 1
         && (can_define() || any_target(owner, 1));
}

std::vector<int> DecoderState::id_candidates() const {
  std::vector<int> ids;
  const int order = pending_order_;
  const Element e = pending_element_;
  if (config_->schema_only) {
    for (int t = 0; t < num_defined(); ++t)
      ids.push_back(t);
    if (can_define())
      ids.push_back(next_id());
    return ids;
  }

  if (order > 0) {
    const int owner = frames_.back();
    for (int t = 0; t < num_defined(); ++t)
      if (atoms_[t].element == e && legal_target(owner, t, order))
        ids.push_back(t);
  }
  if (can_define()) {
    for (int c = kMinCharge; c <= kMaxCharge; ++c) {
      if (config_->table.max_valence(e, c) >= order) {
        ids.push_back(next_id());
        break;
      }
    }
  }
  return ids;
}

TokenSet DecoderState::allowed() const {
  TokenSet set;
  if (literal_pos_ < literal_.size()) {
    set.set(literal_[literal_pos_]);
    return set;
  }

  switch (slot_) {
  case Slot::kElement:
    for (Element e: kHeavyElements)
      if (element_feasible(e, pending_order_))
        set.set(elem(e));
    break;

  case Slot::kIdDigits:
    for (int id: id_candidates()) {
      const std::string s = id_text(id);
      if (s.compare(0, id_prefix_.size(), id_prefix_) != 0)
        continue;
      if (s.size() == id_prefix_.size())
        set.set(kComma);
      else
        set.set(digit(s[id_prefix_.size()] - '0'));
    }
    break;

  case Slot::kKeyAfterId:
    if (charge_feasible(0))
      set.set(kBonds);
    for (int c: { -2, -1, 1, 2 })
      if (charge_feasible(c))
        set.set(kCharge);
    break;

  case Slot::kChargeSign:
    if (charge_feasible(-1) || charge_feasible(-2))
      set.set(kMinus);
    for (int d: { 1, 2 })
      if (charge_feasible(d))
        set.set(digit(d));
    break;

  case Slot::kChargeDigit:
    for (int d: { 1, 2 })
      if (charge_feasible(-d))
        set.set(digit(d));
    break;

  case Slot::kListOpen:
    set.set(kRBracket);
    if (can_open_bond())
      set.set(kLBrace);
    break;

  case Slot::kListNext:
    set.set(kRBracket);
    if (can_open_bond())
      set.set(kComma);
    break;

  case Slot::kBondType:
    for (BondOrder o: kAllBondOrders) {
      const int v = bond_valence(o);
      if (config_->schema_only
          || (v <= remaining_valence(frames_.back()) && child_feasible(v)))
        set.set(bond_type(o));
    }
    break;

  case Slot::kDone:
    set.set(kEnd);
    break;

  case Slot::kFinished:
    break;
  }
  return set;
}

void DecoderState::resolve_id(int id) {
  const int order = pending_order_;
  if (id == next_id()) {
    atoms_.push_back({ pending_element_, 0, order, {} });
    if (order > 0) {
      const int owner = frames_.back();
      atoms_[owner].neighbors.push_back(id);
      atoms_.back().neighbors.push_back(owner);
    }
    set_literal({ kQuote }, Slot::kKeyAfterId);
    return;
  }

  const int owner = frames_.back();
  atoms_[id].used += order;
  atoms_[id].neighbors.push_back(owner);
  atoms_[owner].neighbors.push_back(id);
  set_literal({ kQuote, kBonds, kQuote, kColon, kLBracket, kRBracket, kRBrace,
                kRBrace },
              Slot::kListNext);
}

void DecoderState::close_list() {
  frames_.pop_back();
  if (frames_.empty())
    set_literal({ kRBrace }, Slot::kDone);
  else
    set_literal({ kRBrace, kRBrace }, Slot::kListNext);
}

void DecoderState::accept(Token t) {
  if (t >= kVocabSize || !allowed().test(t))
    throw ConstrainError(ConstrainErrorKind::kIllegalToken,
                         "token '"
                             + std::string(t < kVocabSize ? token_text(t)
                                                          : "?")
                             + "' is not allowed here");

  if (literal_pos_ < literal_.size()) {
    ++literal_pos_;
    return;
  }

  switch (slot_) {
  case Slot::kElement:
    pending_element_ = *token_element(t);
    id_prefix_.clear();
    set_literal({ kQuote, kComma, kQuote, kAtomId, kQuote, kColon },
                Slot::kIdDigits);
    break;

  case Slot::kIdDigits:
    if (t == kComma)
      resolve_id(std::stoi(id_prefix_));
    else
      id_prefix_ += static_cast<char>('0' + *token_digit(t));
    break;

  case Slot::kKeyAfterId:
    if (t == kCharge) {
      set_literal({ kQuote, kColon }, Slot::kChargeSign);
    } else {
      frames_.push_back(num_defined() - 1);
      set_literal({ kQuote, kColon, kLBracket }, Slot::kListOpen);
    }
    break;

  case Slot::kChargeSign:
  case Slot::kChargeDigit:
    if (t == kMinus) {
      slot_ = Slot::kChargeDigit;
      break;
    }
    atoms_.back().charge =
        slot_ == Slot::kChargeDigit ? -*token_digit(t) : *token_digit(t);
    frames_.push_back(num_defined() - 1);
    set_literal({ kComma, kQuote, kBonds, kQuote, kColon, kLBracket },
                Slot::kListOpen);
    break;

  case Slot::kListOpen:
  case Slot::kListNext:
    if (t == kRBracket) {
      close_list();
    } else if (t == kLBrace) {
      set_literal({ kQuote, kBondType, kQuote, kColon, kQuote },
                  Slot::kBondType);
    } else {
      set_literal({ kLBrace, kQuote, kBondType, kQuote, kColon, kQuote },
                  Slot::kBondType);
    }
    break;

  case Slot::kBondType:
    pending_order_ = bond_valence(*token_bond_order(t));
    atoms_[frames_.back()].used += pending_order_;
    set_literal({ kQuote, kComma, kQuote, kAtom, kQuote, kColon, kLBrace,
                  kQuote, kAtomName, kQuote, kColon, kQuote },
                Slot::kElement);
    break;

  case Slot::kDone:
    slot_ = Slot::kFinished;
    break;

  case Slot::kFinished:
    break;
  }
}

TokenSet allowed_next(const DecoderState &state) { return state.allowed(); }

DecoderState advance(const DecoderState &state, Token t) {
  DecoderState next = state;
  next.accept(t);
  return next;
}

bool is_complete(const DecoderState &state) { return state.complete(); }

DecoderState replay(std::span<const Token> tokens,
                    std::shared_ptr<const DecoderConfig> config) {
  DecoderState state(std::move(config));
  for (size_t i = 0; i < tokens.size(); ++i) {
    try {
      state.accept(tokens[i]);
    } catch (const ConstrainError &e) {
      throw ConstrainError(e.kind(), std::string(e.what()) + " at token "
                                         + std::to_string(i));
    }
  }
  return state;
}

std::vector<Token> token_list(const TokenSet &set) {
  std::vector<Token> out;
  for (int i = 0; i < kVocabSize; ++i)
    if (set.test(i))
      out.push_back(static_cast<Token>(i));
  return out;
}

}  // namespace g2t
