// SPDX-License-Identifier: Apache-2.0
#include "t2tl/ltl/formula.hpp"

#include <algorithm>
#include <stdexcept>

#include "t2tl/error.hpp"

namespace t2tl::ltl {

bool is_valid_proposition_name(std::string_view name) {
  if (name.empty()) return false;
  auto alpha = [](char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_'; };
  auto digit = [](char c) { return c >= '0' && c <= '9'; };
  if (!alpha(name.front())) return false;
  for (char c : name) {
    if (!alpha(c) && !digit(c)) return false;
  }
  return name != "true" && name != "false" && name != "X" && name != "F" && name != "G" &&
         name != "U";
}

Alphabet::Alphabet(std::vector<std::string> names) : names_(std::move(names)) {
  if (names_.size() > kMaxPropositions) {
    throw Error("alphabet holds at most " + std::to_string(kMaxPropositions) + " propositions");
  }
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (!is_valid_proposition_name(names_[i])) {
      throw Error("invalid proposition name '" + names_[i] + "'");
    }
    if (!index_.emplace(names_[i], static_cast<PropId>(i)).second) {
      throw Error("duplicate proposition '" + names_[i] + "'");
    }
  }
}

std::optional<PropId> Alphabet::find(std::string_view name) const {
  auto it = index_.find(std::string(name));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

PropId Alphabet::id(std::string_view name) const {
  if (auto found = find(name)) return *found;
  throw UnknownProposition(std::string(name));
}

LabelSet LabelSet::of(const Alphabet& alphabet, const std::vector<std::string>& names) {
  LabelSet set;
  for (const auto& n : names) set.insert(alphabet.id(n));
  return set;
}

bool LabelSet::fits(const Alphabet& alphabet) const noexcept {
  if (alphabet.size() >= 64) return true;
  return (bits_ >> alphabet.size()) == 0;
}

std::vector<std::string> LabelSet::names(const Alphabet& alphabet) const {
  std::vector<std::string> out;
  for (PropId id = 0; id < alphabet.size(); ++id) {
    if (contains(id)) out.push_back(alphabet.name(id));
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::string LabelSet::to_string(const Alphabet& alphabet) const {
  std::string out = "{";
  bool first = true;
  for (const auto& n : names(alphabet)) {
    if (!first) out += ',';
    out += n;
    first = false;
  }
  return out + "}";
}

struct Formula::Node {
  Kind kind;
  std::string name;
  PropId id = 0;
  Formula left;
  Formula right;
  std::string key;
  std::size_t size = 1;
  std::size_t depth = 1;
};

namespace {

const char* op_symbol(Kind kind) {
  switch (kind) {
    case Kind::Not: return "!";
    case Kind::And: return "&";
    case Kind::Or: return "|";
    case Kind::Next: return "X";
    case Kind::Eventually: return "F";
    case Kind::Always: return "G";
    case Kind::Until: return "U";
    default: return "";
  }
}

bool unary(Kind k) {
  return k == Kind::Not || k == Kind::Next || k == Kind::Eventually || k == Kind::Always;
}
bool binary(Kind k) { return k == Kind::And || k == Kind::Or || k == Kind::Until; }

}  // namespace

Formula Formula::make(Kind kind, std::string name, PropId id, const Formula* l, const Formula* r) {
  auto node = std::make_shared<Node>();
  node->kind = kind;
  node->name = std::move(name);
  node->id = id;
  switch (kind) {
    case Kind::True: node->key = "true"; break;
    case Kind::False: node->key = "false"; break;
    case Kind::Prop: node->key = node->name; break;
    default:
      if (unary(kind)) {
        node->left = *l;
        node->key = std::string("(") + op_symbol(kind) + " " + l->key() + ")";
        node->size = 1 + l->size();
        node->depth = 1 + l->depth();
      } else {
        node->left = *l;
        node->right = *r;
        node->key = "(" + l->key() + " " + op_symbol(kind) + " " + r->key() + ")";
        node->size = 1 + l->size() + r->size();
        node->depth = 1 + std::max(l->depth(), r->depth());
      }
  }
  return Formula(std::move(node));
}

Formula::Formula() : node_(truth().node_) {}

// The constants hold null children; every other node's unused children
// default to the shared true constant.
Formula Formula::truth() {
  static const Formula t = [] {
    auto node = std::make_shared<Node>(Node{Kind::True, {}, 0, Formula(nullptr), Formula(nullptr),
                                            "true", 1, 1});
    return Formula(std::move(node));
  }();
  return t;
}

Formula Formula::falsity() {
  static const Formula f = [] {
    auto node = std::make_shared<Node>(Node{Kind::False, {}, 0, Formula(nullptr),
                                            Formula(nullptr), "false", 1, 1});
    return Formula(std::move(node));
  }();
  return f;
}

Formula Formula::prop(std::string name, PropId id) {
  return make(Kind::Prop, std::move(name), id, nullptr, nullptr);
}
Formula Formula::negation(Formula child) { return make(Kind::Not, {}, 0, &child, nullptr); }
Formula Formula::conjunction(Formula left, Formula right) {
  return make(Kind::And, {}, 0, &left, &right);
}
Formula Formula::disjunction(Formula left, Formula right) {
  return make(Kind::Or, {}, 0, &left, &right);
}
Formula Formula::next(Formula child) { return make(Kind::Next, {}, 0, &child, nullptr); }
Formula Formula::eventually(Formula child) {
  return make(Kind::Eventually, {}, 0, &child, nullptr);
}
Formula Formula::always(Formula child) { return make(Kind::Always, {}, 0, &child, nullptr); }
Formula Formula::until(Formula left, Formula right) {
  return make(Kind::Until, {}, 0, &left, &right);
}

Kind Formula::kind() const noexcept { return node_->kind; }
bool Formula::is_binary() const noexcept { return binary(kind()); }
bool Formula::is_temporal() const noexcept {
  Kind k = kind();
  return k == Kind::Next || k == Kind::Eventually || k == Kind::Always || k == Kind::Until;
}

const std::string& Formula::name() const {
  if (kind() != Kind::Prop) throw std::logic_error("name() on non-proposition");
  return node_->name;
}
PropId Formula::prop_id() const {
  if (kind() != Kind::Prop) throw std::logic_error("prop_id() on non-proposition");
  return node_->id;
}
const Formula& Formula::child() const {
  if (!unary(kind())) throw std::logic_error("child() on non-unary formula");
  return node_->left;
}
const Formula& Formula::left() const {
  if (!binary(kind())) throw std::logic_error("left() on non-binary formula");
  return node_->left;
}
const Formula& Formula::right() const {
  if (!binary(kind())) throw std::logic_error("right() on non-binary formula");
  return node_->right;
}
const std::string& Formula::key() const noexcept { return node_->key; }
std::size_t Formula::size() const noexcept { return node_->size; }
std::size_t Formula::depth() const noexcept { return node_->depth; }

std::string format(const Formula& formula) { return formula.key(); }

namespace {

int precedence(Kind k) {
  switch (k) {
    case Kind::Or: return 1;
    case Kind::And: return 2;
    case Kind::Until: return 3;
    case Kind::Not:
    case Kind::Next:
    case Kind::Eventually:
    case Kind::Always: return 4;
    default: return 5;
  }
}

std::string pretty_at(const Formula& f, int context) {
  Kind k = f.kind();
  std::string out;
  switch (k) {
    case Kind::True: return "true";
    case Kind::False: return "false";
    case Kind::Prop: return f.name();
    case Kind::Not: out = "!" + pretty_at(f.child(), 4); break;
    case Kind::Next:
    case Kind::Eventually:
    case Kind::Always: out = std::string(op_symbol(k)) + " " + pretty_at(f.child(), 4); break;
    case Kind::Until:
      // right associative
      out = pretty_at(f.left(), 4) + " U " + pretty_at(f.right(), 3);
      break;
    case Kind::And:
    case Kind::Or: {
      int p = precedence(k);
      // the parser groups & and | to the left
      out = pretty_at(f.left(), p) + " " + op_symbol(k) + " " + pretty_at(f.right(), p + 1);
      break;
    }
  }
  return precedence(k) < context ? "(" + out + ")" : out;
}

}  // namespace

std::string pretty(const Formula& formula) { return pretty_at(formula, 0); }

}  // namespace t2tl::ltl
