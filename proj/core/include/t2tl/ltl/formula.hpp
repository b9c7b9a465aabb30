// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <memory>
#include <string>

#include "t2tl/ltl/alphabet.hpp"

namespace t2tl::ltl {

enum class Kind : std::uint8_t { True, False, Prop, Not, And, Or, Next, Eventually, Always, Until };

// Immutable sc-LTL syntax tree.  Nodes are shared, so copying a Formula is
// cheap and structurally equal formulas compare equal through their key: the
// fully parenthesized printed form computed once at construction.
class Formula {
 public:
  Formula();  // true

  static Formula truth();
  static Formula falsity();
  static Formula constant(bool value) { return value ? truth() : falsity(); }
  static Formula prop(std::string name, PropId id);
  static Formula negation(Formula child);
  static Formula conjunction(Formula left, Formula right);
  static Formula disjunction(Formula left, Formula right);
  static Formula next(Formula child);
  static Formula eventually(Formula child);
  static Formula always(Formula child);
  static Formula until(Formula left, Formula right);

  Kind kind() const noexcept;
  bool is_true() const noexcept { return kind() == Kind::True; }
  bool is_false() const noexcept { return kind() == Kind::False; }
  bool is_constant() const noexcept { return is_true() || is_false(); }
  bool is_binary() const noexcept;
  bool is_temporal() const noexcept;

  const std::string& name() const;  // Prop only
  PropId prop_id() const;           // Prop only
  const Formula& child() const;     // unary nodes
  const Formula& left() const;      // binary nodes
  const Formula& right() const;     // binary nodes

  const std::string& key() const noexcept;
  std::size_t size() const noexcept;
  std::size_t depth() const noexcept;

  friend bool operator==(const Formula& a, const Formula& b) {
    return a.node_ == b.node_ || a.key() == b.key();
  }
  friend bool operator<(const Formula& a, const Formula& b) { return a.key() < b.key(); }

 private:
  struct Node;
  explicit Formula(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  static Formula make(Kind kind, std::string name, PropId id, const Formula* l, const Formula* r);

  std::shared_ptr<const Node> node_;
};

// Fully parenthesized deterministic text: "true", "a", "(! a)", "(a & b)",
// "(X a)", "(a U b)".  parse(format(f)) reproduces f.
std::string format(const Formula& formula);

// Conventional infix text with minimal parentheses, for humans.
std::string pretty(const Formula& formula);

}  // namespace t2tl::ltl

template <>
struct std::hash<t2tl::ltl::Formula> {
  std::size_t operator()(const t2tl::ltl::Formula& f) const noexcept {
    return std::hash<std::string>{}(f.key());
  }
};
