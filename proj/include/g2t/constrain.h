//
// Project g2t - Copyright 2026 The g2t Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef G2T_CONSTRAIN_H_
#define G2T_CONSTRAIN_H_

#include <bitset>
#include <cstdint>
#include <initializer_list>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "g2t/error.h"
#include "g2t/molgraph.h"

namespace g2t {

/* Token alphabet */

using Token = std::uint8_t;

enum class TokenKind {
  kStruct,
  kKey,
  kElem,
  kBondType,
  kDigit,
  kSign,
  kEnd,
};

namespace tok {

inline constexpr Token kLBrace = 0;
inline constexpr Token kRBrace = 1;
inline constexpr Token kLBracket = 2;
inline constexpr Token kRBracket = 3;
inline constexpr Token kComma = 4;
inline constexpr Token kColon = 5;
inline constexpr Token kQuote = 6;

inline constexpr Token kAtomName = 7;
inline constexpr Token kAtomId = 8;
inline constexpr Token kCharge = 9;
inline constexpr Token kBonds = 10;
inline constexpr Token kBondType = 11;
inline constexpr Token kAtom = 12;

inline constexpr Token kFirstElem = 13;
inline constexpr Token kFirstBondType = kFirstElem + kNumElements;  // 24
inline constexpr Token kFirstDigit = kFirstBondType + 3;            // 27
inline constexpr Token kPlus = kFirstDigit + 10;                    // 37
inline constexpr Token kMinus = kPlus + 1;
inline constexpr Token kEnd = kMinus + 1;  // 39

inline constexpr int kVocabSize = kEnd + 1;

constexpr Token elem(Element e) { return kFirstElem + element_index(e); }
constexpr Token bond_type(BondOrder o) {
  return kFirstBondType + bond_valence(o) - 1;
}
constexpr Token digit(int d) { return kFirstDigit + d; }

}  // namespace tok

using TokenSet = std::bitset<tok::kVocabSize>;

TokenKind token_kind(Token t);

/// Surface text; for END this is "<END>", which never occurs in tree text.
std::string_view token_text(Token t);

std::optional<Token> token_from_text(std::string_view text);

std::optional<Element> token_element(Token t);
std::optional<BondOrder> token_bond_order(Token t);
std::optional<int> token_digit(Token t);

enum class ConstrainErrorKind {
  kLex,
  kEmptyInput,
  kIllegalToken,
};

std::string_view constrain_error_name(ConstrainErrorKind kind);

using ConstrainError = TypedError<ConstrainErrorKind>;

/// Splits JSON tree text into tokens by longest match. Whitespace and any
/// character outside the alphabet are lex errors; END is never produced.
std::vector<Token> tokenize(std::string_view text);

std::string detokenize(std::span<const Token> tokens);

/* Decoder automaton */

struct DecoderConfig {
  ValenceTable table = ValenceTable::standard();
  int atom_budget = 60;
  // Schema-level constraints only: elements, bond types and dense ids are
  // enforced, valence and ring-closure legality are not.
  bool schema_only = false;
};

/// Incremental recognizer of canonical JSON trees. allowed() is the exact set
/// of tokens after which the sequence can still be completed to a tree that
/// decodes to a valence-valid molecule (schema-valid only, in schema-only
/// mode).
///
/// DecoderState is a value; copies are independent.
class DecoderState {
public:
  explicit DecoderState(std::shared_ptr<const DecoderConfig> config
                        = default_config());

  static std::shared_ptr<const DecoderConfig> default_config();

  TokenSet allowed() const;

  /// Throws ConstrainError(kIllegalToken) for a token outside allowed().
  void accept(Token t);

  /// A full root object has been read (END may or may not have followed).
  bool complete() const {
    return literal_pos_ == literal_.size()
           && (slot_ == Slot::kDone || slot_ == Slot::kFinished);
  }

  /// END has been accepted.
  bool finished() const { return slot_ == Slot::kFinished; }

  int num_defined() const { return static_cast<int>(atoms_.size()); }
  int next_id() const { return num_defined(); }
  int depth() const { return static_cast<int>(frames_.size()); }

  /// Remaining valence of a defined atom.
  int remaining_valence(int id) const;

  const DecoderConfig &config() const { return *config_; }

private:
  enum class Slot : std::uint8_t {
    kElement,
    kIdDigits,
    kKeyAfterId,
    kChargeSign,
    kChargeDigit,
    kListOpen,
    kListNext,
    kBondType,
    kDone,
    kFinished,
  };

  struct AtomInfo {
    Element element;
    int charge = 0;
    int used = 0;
    std::vector<int> neighbors;
  };

  bool is_bonded(int a, int b) const;
  bool legal_target(int owner, int target, int order) const;
  bool any_target(int owner, int order,
                  std::optional<Element> element = std::nullopt) const;
  bool can_define() const;
  bool element_feasible(Element e, int order) const;
  bool charge_feasible(int charge) const;
  bool child_feasible(int order) const;
  bool can_open_bond() const;
  std::vector<int> id_candidates() const;

  void set_literal(std::initializer_list<Token> tokens, Slot next);
  void resolve_id(int id);
  void close_list();

  std::shared_ptr<const DecoderConfig> config_;

  // Forced tokens preceding the next choice slot, consumed front to back.
  std::vector<Token> literal_;
  std::size_t literal_pos_ = 0;
  Slot slot_ = Slot::kElement;

  std::vector<AtomInfo> atoms_;
  // Atoms whose bonds list is open, innermost last.
  std::vector<int> frames_;

  // Incoming bond order of the node being read (0 at the root).
  int pending_order_ = 0;
  Element pending_element_ = Element::kC;
  std::string id_prefix_;
};

/// Free-function forms of the automaton interface.
TokenSet allowed_next(const DecoderState &state);
DecoderState advance(const DecoderState &state, Token t);
bool is_complete(const DecoderState &state);

/// Runs tokens from the initial state. Throws ConstrainError(kIllegalToken)
/// naming the first rejected position.
DecoderState replay(std::span<const Token> tokens,
                    std::shared_ptr<const DecoderConfig> config
                    = DecoderState::default_config());

std::vector<Token> token_list(const TokenSet &set);

}  // namespace g2t

#endif  // G2T_CONSTRAIN_H_
