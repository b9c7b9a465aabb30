// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "t2tl/ltl/alphabet.hpp"
#include "t2tl/ltl/formula.hpp"

namespace t2tl::ltl {

enum class TokenKind : std::uint8_t {
  True,
  False,
  Ident,
  Not,
  And,
  Or,
  Next,
  Eventually,
  Always,
  Until,
  LParen,
  RParen,
  End
};

struct Token {
  TokenKind kind;
  std::string text;
  std::size_t offset;

  bool operator==(const Token& other) const { return kind == other.kind && text == other.text; }
};

std::string_view token_kind_name(TokenKind kind);

// Splits formula text into tokens.  The single capitals X F G U are operators
// only when they stand alone; "Fx" is an identifier.  Throws LexError.
std::vector<Token> tokenize(std::string_view text);

// Precedence, tightest first: unary {! X F G}, U (right associative), &, |.
// Throws LexError, ParseError or UnknownProposition.
Formula parse(std::string_view text, const Alphabet& alphabet);

}  // namespace t2tl::ltl
