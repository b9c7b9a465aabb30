// SPDX-License-Identifier: Apache-2.0
#include "t2tl/ltl/parser.hpp"

#include "t2tl/error.hpp"

namespace t2tl::ltl {

std::string_view token_kind_name(TokenKind kind) {
  switch (kind) {
    case TokenKind::True: return "'true'";
    case TokenKind::False: return "'false'";
    case TokenKind::Ident: return "proposition";
    case TokenKind::Not: return "'!'";
    case TokenKind::And: return "'&'";
    case TokenKind::Or: return "'|'";
    case TokenKind::Next: return "'X'";
    case TokenKind::Eventually: return "'F'";
    case TokenKind::Always: return "'G'";
    case TokenKind::Until: return "'U'";
    case TokenKind::LParen: return "'('";
    case TokenKind::RParen: return "')'";
    case TokenKind::End: return "end of input";
  }
  return "?";
}

std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> out;
  std::size_t i = 0;
  auto ident_start = [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
  };
  auto ident_char = [&](char c) { return ident_start(c) || (c >= '0' && c <= '9'); };
  while (i < text.size()) {
    char c = text[i];
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
      ++i;
      continue;
    }
    std::size_t start = i;
    switch (c) {
      case '!': out.push_back({TokenKind::Not, "!", start}); ++i; continue;
      case '&': out.push_back({TokenKind::And, "&", start}); ++i; continue;
      case '|': out.push_back({TokenKind::Or, "|", start}); ++i; continue;
      case '(': out.push_back({TokenKind::LParen, "(", start}); ++i; continue;
      case ')': out.push_back({TokenKind::RParen, ")", start}); ++i; continue;
      default: break;
    }
    if (!ident_start(c)) throw LexError(start, "unexpected character '" + std::string(1, c) + "'");
    while (i < text.size() && ident_char(text[i])) ++i;
    std::string word(text.substr(start, i - start));
    TokenKind kind = TokenKind::Ident;
    if (word == "true") kind = TokenKind::True;
    else if (word == "false") kind = TokenKind::False;
    else if (word == "X") kind = TokenKind::Next;
    else if (word == "F") kind = TokenKind::Eventually;
    else if (word == "G") kind = TokenKind::Always;
    else if (word == "U") kind = TokenKind::Until;
    out.push_back({kind, std::move(word), start});
  }
  out.push_back({TokenKind::End, "", text.size()});
  return out;
}

namespace {

class Parser {
 public:
  Parser(std::vector<Token> tokens, const Alphabet& alphabet)
      : tokens_(std::move(tokens)), alphabet_(alphabet) {}

  Formula run() {
    Formula f = disjunction();
    expect(TokenKind::End, "end of input");
    return f;
  }

 private:
  const Token& peek() const { return tokens_[pos_]; }
  bool accept(TokenKind kind) {
    if (peek().kind != kind) return false;
    ++pos_;
    return true;
  }
  void expect(TokenKind kind, const std::string& what) {
    if (!accept(kind)) fail(what);
  }
  [[noreturn]] void fail(const std::string& expected) const {
    const Token& t = peek();
    std::string found = t.kind == TokenKind::End ? "end of input" : "'" + t.text + "'";
    throw ParseError(t.offset, expected, found);
  }

  Formula disjunction() {
    Formula f = conjunction();
    while (accept(TokenKind::Or)) f = Formula::disjunction(f, conjunction());
    return f;
  }

  Formula conjunction() {
    Formula f = until();
    while (accept(TokenKind::And)) f = Formula::conjunction(f, until());
    return f;
  }

  Formula until() {
    Formula f = unary();
    if (accept(TokenKind::Until)) return Formula::until(f, until());
    return f;
  }

  Formula unary() {
    if (accept(TokenKind::Not)) return Formula::negation(unary());
    if (accept(TokenKind::Next)) return Formula::next(unary());
    if (accept(TokenKind::Eventually)) return Formula::eventually(unary());
    if (accept(TokenKind::Always)) return Formula::always(unary());
    return primary();
  }

  Formula primary() {
    const Token& t = peek();
    switch (t.kind) {
      case TokenKind::True: ++pos_; return Formula::truth();
      case TokenKind::False: ++pos_; return Formula::falsity();
      case TokenKind::Ident: {
        ++pos_;
        return Formula::prop(t.text, alphabet_.id(t.text));
      }
      case TokenKind::LParen: {
        ++pos_;
        Formula f = disjunction();
        expect(TokenKind::RParen, "')'");
        return f;
      }
      default:
        fail("one of {'true', 'false', proposition, '!', 'X', 'F', 'G', '('}");
    }
  }

  std::vector<Token> tokens_;
  const Alphabet& alphabet_;
  std::size_t pos_ = 0;
};

}  // namespace

Formula parse(std::string_view text, const Alphabet& alphabet) {
  return Parser(tokenize(text), alphabet).run();
}

}  // namespace t2tl::ltl
