// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <map>
#include <vector>

#include "t2tl/ltl/progression.hpp"

namespace t2tl::ltl {

namespace {

// Memo keyed on node identity; both operands stay alive for the whole query.
using EntailMemo = std::map<std::pair<const void*, const void*>, bool>;

bool entails_memo(const Formula& s, const Formula& w, EntailMemo& memo);

bool entails_uncached(const Formula& s, const Formula& w, EntailMemo& memo) {
  auto entails = [&memo](const Formula& a, const Formula& b) { return entails_memo(a, b, memo); };
  if (s == w || w.is_true() || s.is_false()) return true;

  switch (s.kind()) {
    case Kind::And:
      if (entails(s.left(), w) || entails(s.right(), w)) return true;
      break;
    case Kind::Or:
      if (entails(s.left(), w) && entails(s.right(), w)) return true;
      break;
    case Kind::Always:
      // G b holds at i only if b does.
      if (entails(s.child(), w)) return true;
      break;
    default:
      break;
  }

  switch (w.kind()) {
    case Kind::And:
      return entails(s, w.left()) && entails(s, w.right());
    case Kind::Or:
      return entails(s, w.left()) || entails(s, w.right());
    case Kind::Eventually:
      // Anything that forces F a at some later position forces it now.
      if (entails(s, w.child())) return true;
      switch (s.kind()) {
        case Kind::Eventually:
        case Kind::Next: return entails(s.child(), w);
        case Kind::Until: return entails(s.right(), w);
        default: return false;
      }
    case Kind::Until:
      if (entails(s, w.right())) return true;
      return s.kind() == Kind::Until && entails(s.left(), w.left()) &&
             entails(s.right(), w.right());
    case Kind::Always:
      return s.kind() == Kind::Always && entails(s.child(), w.child());
    case Kind::Next:
      return s.kind() == Kind::Next && entails(s.child(), w.child());
    case Kind::Not:
      return s.kind() == Kind::Not && entails(w.child(), s.child());
    default:
      return false;
  }
}

bool entails_memo(const Formula& s, const Formula& w, EntailMemo& memo) {
  const std::pair<const void*, const void*> id{&s.key(), &w.key()};
  if (auto it = memo.find(id); it != memo.end()) return it->second;
  const bool result = entails_uncached(s, w, memo);
  memo.emplace(id, result);
  return result;
}

}  // namespace

bool entails(const Formula& stronger, const Formula& weaker) {
  EntailMemo memo;
  return entails_memo(stronger, weaker, memo);
}

namespace {

Formula simplify_once(const Formula& f);

void flatten(Kind kind, const Formula& f, std::vector<Formula>& out) {
  if (f.kind() == kind) {
    flatten(kind, f.left(), out);
    flatten(kind, f.right(), out);
  } else {
    out.push_back(f);
  }
}

// Builds a canonical n-ary conjunction or disjunction from already simplified
// operands.
Formula build_nary(Kind kind, const std::vector<Formula>& operands) {
  const bool is_and = kind == Kind::And;
  std::map<std::string, Formula> unique;
  for (const auto& raw : operands) {
    std::vector<Formula> flat;
    flatten(kind, raw, flat);
    for (auto& op : flat) {
      if (op.is_constant()) {
        if (op.is_true() == is_and) continue;  // identity element
        return op;                             // absorbing element
      }
      unique.emplace(op.key(), op);
    }
  }

  std::vector<Formula> ops;
  ops.reserve(unique.size());
  for (auto& [k, op] : unique) ops.push_back(op);

  // Drop operands made redundant by a sibling that is still present.
  for (std::size_t i = 0; i < ops.size();) {
    bool redundant = false;
    for (std::size_t j = 0; j < ops.size() && !redundant; ++j) {
      if (j == i) continue;
      const Formula& x = ops[i];
      const Formula& y = ops[j];
      bool dominated = is_and ? entails(y, x) : entails(x, y);
      if (!dominated) continue;
      bool mutual = is_and ? entails(x, y) : entails(y, x);
      redundant = !mutual || y.key() < x.key();
    }
    if (redundant) {
      ops.erase(ops.begin() + static_cast<std::ptrdiff_t>(i));
    } else {
      ++i;
    }
  }

  if (ops.empty()) return Formula::constant(is_and);
  Formula acc = ops.back();
  for (std::size_t i = ops.size() - 1; i-- > 0;) {
    acc = is_and ? Formula::conjunction(ops[i], acc) : Formula::disjunction(ops[i], acc);
  }
  return acc;
}

using Cube = std::vector<Formula>;

constexpr std::size_t kMaxCubes = 256;

Formula join(Kind kind, const std::vector<Formula>& sorted_ops) {
  Formula acc = sorted_ops.back();
  for (std::size_t i = sorted_ops.size() - 1; i-- > 0;) {
    acc = kind == Kind::And ? Formula::conjunction(sorted_ops[i], acc)
                            : Formula::disjunction(sorted_ops[i], acc);
  }
  return acc;
}

// Disjunctive normal form over non-boolean operands.  Returns false when the
// cube count would exceed the cap.
bool to_dnf(const Formula& f, std::vector<Cube>& out) {
  switch (f.kind()) {
    case Kind::Or: {
      std::vector<Cube> l, r;
      if (!to_dnf(f.left(), l) || !to_dnf(f.right(), r)) return false;
      if (l.size() + r.size() > kMaxCubes) return false;
      out = std::move(l);
      out.insert(out.end(), r.begin(), r.end());
      return true;
    }
    case Kind::And: {
      std::vector<Cube> l, r;
      if (!to_dnf(f.left(), l) || !to_dnf(f.right(), r)) return false;
      if (l.size() * r.size() > kMaxCubes) return false;
      out.clear();
      for (const auto& a : l) {
        for (const auto& b : r) {
          Cube c = a;
          c.insert(c.end(), b.begin(), b.end());
          out.push_back(std::move(c));
        }
      }
      return true;
    }
    case Kind::True:
      out = {Cube{}};
      return true;
    case Kind::False:
      out.clear();
      return true;
    default:
      out = {Cube{f}};
      return true;
  }
}

// Dedupes a cube, drops literals implied by a sibling and reports
// contradictions by returning false.
bool reduce_cube(Cube& cube) {
  std::map<std::string, Formula> unique;
  for (auto& lit : cube) unique.emplace(lit.key(), lit);
  for (auto& [k, lit] : unique) {
    if (lit.kind() == Kind::Not && unique.count(lit.child().key())) return false;
  }
  Cube ops;
  for (auto& [k, lit] : unique) ops.push_back(lit);
  for (std::size_t i = 0; i < ops.size();) {
    bool redundant = false;
    for (std::size_t j = 0; j < ops.size() && !redundant; ++j) {
      if (j == i || !entails(ops[j], ops[i])) continue;
      redundant = !entails(ops[i], ops[j]) || ops[j].key() < ops[i].key();
    }
    if (redundant) {
      ops.erase(ops.begin() + static_cast<std::ptrdiff_t>(i));
    } else {
      ++i;
    }
  }
  cube = std::move(ops);
  return true;
}

// Canonical boolean combination of two simplified operands: a disjunction of
// conjunctions with absorbed and subsumed cubes removed.
Formula combine(Kind kind, const Formula& l, const Formula& r) {
  const Formula raw = kind == Kind::And ? Formula::conjunction(l, r) : Formula::disjunction(l, r);
  std::vector<Cube> cubes;
  if (!to_dnf(raw, cubes)) return build_nary(kind, {l, r});

  std::map<std::string, Formula> terms;
  for (auto& cube : cubes) {
    if (!reduce_cube(cube)) continue;
    if (cube.empty()) return Formula::truth();
    Formula term = join(Kind::And, cube);
    terms.emplace(term.key(), term);
  }
  std::vector<Formula> ops;
  for (auto& [k, t] : terms) ops.push_back(t);
  for (std::size_t i = 0; i < ops.size();) {
    bool redundant = false;
    for (std::size_t j = 0; j < ops.size() && !redundant; ++j) {
      if (j == i || !entails(ops[i], ops[j])) continue;
      redundant = !entails(ops[j], ops[i]) || ops[j].key() < ops[i].key();
    }
    if (redundant) {
      ops.erase(ops.begin() + static_cast<std::ptrdiff_t>(i));
    } else {
      ++i;
    }
  }
  if (ops.empty()) return Formula::falsity();
  return join(Kind::Or, ops);
}

// Negation of an already simplified formula, pushed off & and |.
Formula negate(const Formula& f) {
  switch (f.kind()) {
    case Kind::True: return Formula::falsity();
    case Kind::False: return Formula::truth();
    case Kind::Not: return f.child();
    case Kind::And: return build_nary(Kind::Or, {negate(f.left()), negate(f.right())});
    case Kind::Or: return build_nary(Kind::And, {negate(f.left()), negate(f.right())});
    default: return Formula::negation(f);
  }
}

Formula simplify_once(const Formula& f) {
  switch (f.kind()) {
    case Kind::True:
    case Kind::False:
    case Kind::Prop:
      return f;
    case Kind::Not:
      return negate(simplify_once(f.child()));
    case Kind::And:
    case Kind::Or:
      return combine(f.kind(), simplify_once(f.left()), simplify_once(f.right()));
    case Kind::Next:
      // X true is false at the last position, so no folding here.
      return Formula::next(simplify_once(f.child()));
    case Kind::Eventually: {
      Formula c = simplify_once(f.child());
      if (c.is_constant() || c.kind() == Kind::Eventually) return c;
      return Formula::eventually(c);
    }
    case Kind::Always: {
      Formula c = simplify_once(f.child());
      if (c.is_constant() || c.kind() == Kind::Always) return c;
      return Formula::always(c);
    }
    case Kind::Until: {
      Formula l = simplify_once(f.left());
      Formula r = simplify_once(f.right());
      if (r.is_constant()) return r;
      if (l.is_false()) return r;
      if (l.is_true()) return r.kind() == Kind::Eventually ? r : Formula::eventually(r);
      return Formula::until(l, r);
    }
  }
  return f;
}

}  // namespace

Formula simplify(const Formula& formula) {
  Formula current = formula;
  for (;;) {
    Formula next = simplify_once(current);
    if (next == current) return next;
    current = next;
  }
}

bool is_canonical(const Formula& formula) { return simplify(formula) == formula; }

}  // namespace t2tl::ltl
