// SPDX-License-Identifier: Apache-2.0
#include "t2tl/ltl/semantics.hpp"

#include <algorithm>
#include <string>
#include <unordered_map>
#include <vector>

#include "t2tl/error.hpp"

namespace t2tl::ltl {

namespace {

bool holds(const Word& w, std::size_t i, const Formula& f) {
  const std::size_t n = w.size();
  switch (f.kind()) {
    case Kind::True: return true;
    case Kind::False: return false;
    case Kind::Prop: return w[i].contains(f.prop_id());
    case Kind::Not: return !holds(w, i, f.child());
    case Kind::And: return holds(w, i, f.left()) && holds(w, i, f.right());
    case Kind::Or: return holds(w, i, f.left()) || holds(w, i, f.right());
    case Kind::Next: return i + 1 < n && holds(w, i + 1, f.child());
    case Kind::Eventually:
      for (std::size_t j = i; j < n; ++j) {
        if (holds(w, j, f.child())) return true;
      }
      return false;
    case Kind::Always:
      for (std::size_t j = i; j < n; ++j) {
        if (!holds(w, j, f.child())) return false;
      }
      return true;
    case Kind::Until:
      for (std::size_t j = i; j < n; ++j) {
        if (holds(w, j, f.right())) return true;
        if (!holds(w, j, f.left())) return false;
      }
      return false;
  }
  return false;
}

enum class K3 : std::int8_t { F = -1, U = 0, T = 1 };

K3 k_not(K3 a) { return static_cast<K3>(-static_cast<int>(a)); }
K3 k_and(K3 a, K3 b) { return static_cast<K3>(std::min(static_cast<int>(a), static_cast<int>(b))); }
K3 k_or(K3 a, K3 b) { return static_cast<K3>(std::max(static_cast<int>(a), static_cast<int>(b))); }

// Bottom-up tables over positions, one per distinct subformula.  For the
// three-valued table, index n stands for every position past the prefix.
template <typename V>
class Tables {
 public:
  explicit Tables(const Word& w) : w_(w) {}

  const std::vector<V>& get(const Formula& f) {
    auto it = memo_.find(&f.key());
    if (it != memo_.end()) return it->second;
    std::vector<V> t = build(f);
    return memo_.emplace(&f.key(), std::move(t)).first->second;
  }

 private:
  std::vector<V> build(const Formula& f);

  const Word& w_;
  std::unordered_map<const std::string*, std::vector<V>> memo_;
};

template <>
std::vector<char> Tables<char>::build(const Formula& f) {
  const std::size_t n = w_.size();
  std::vector<char> t(n, 0);
  switch (f.kind()) {
    case Kind::True: std::fill(t.begin(), t.end(), 1); break;
    case Kind::False: break;
    case Kind::Prop:
      for (std::size_t i = 0; i < n; ++i) t[i] = w_[i].contains(f.prop_id());
      break;
    case Kind::Not: {
      const auto& c = get(f.child());
      for (std::size_t i = 0; i < n; ++i) t[i] = !c[i];
      break;
    }
    case Kind::And:
    case Kind::Or: {
      const auto& l = get(f.left());
      const auto& r = get(f.right());
      for (std::size_t i = 0; i < n; ++i) {
        t[i] = f.kind() == Kind::And ? (l[i] && r[i]) : (l[i] || r[i]);
      }
      break;
    }
    case Kind::Next: {
      const auto& c = get(f.child());
      for (std::size_t i = 0; i + 1 < n; ++i) t[i] = c[i + 1];
      break;
    }
    case Kind::Eventually:
    case Kind::Always:
    case Kind::Until: {
      const bool until = f.kind() == Kind::Until;
      const auto& c = get(until ? f.right() : f.child());
      const std::vector<char>* l = until ? &get(f.left()) : nullptr;
      for (std::size_t i = n; i-- > 0;) {
        const char later = i + 1 < n ? t[i + 1] : (f.kind() == Kind::Always ? 1 : 0);
        switch (f.kind()) {
          case Kind::Eventually: t[i] = c[i] || later; break;
          case Kind::Always: t[i] = c[i] && later; break;
          default: t[i] = c[i] || ((*l)[i] && later); break;
        }
      }
      break;
    }
  }
  return t;
}

template <>
std::vector<K3> Tables<K3>::build(const Formula& f) {
  const std::size_t n = w_.size();
  std::vector<K3> t(n + 1, K3::U);
  switch (f.kind()) {
    case Kind::True: std::fill(t.begin(), t.end(), K3::T); break;
    case Kind::False: std::fill(t.begin(), t.end(), K3::F); break;
    case Kind::Prop:
      for (std::size_t i = 0; i < n; ++i) t[i] = w_[i].contains(f.prop_id()) ? K3::T : K3::F;
      break;
    case Kind::Not: {
      const auto& c = get(f.child());
      for (std::size_t i = 0; i <= n; ++i) t[i] = k_not(c[i]);
      break;
    }
    case Kind::And:
    case Kind::Or: {
      const auto& l = get(f.left());
      const auto& r = get(f.right());
      for (std::size_t i = 0; i <= n; ++i) {
        t[i] = f.kind() == Kind::And ? k_and(l[i], r[i]) : k_or(l[i], r[i]);
      }
      break;
    }
    case Kind::Next: {
      const auto& c = get(f.child());
      for (std::size_t i = 0; i + 1 < n; ++i) t[i] = c[i + 1];
      // The next position may not exist, and anything past the end is unknown.
      const K3 beyond = c[n] == K3::F ? K3::F : K3::U;
      if (n > 0) t[n - 1] = beyond;
      t[n] = beyond;
      break;
    }
    case Kind::Eventually:
    case Kind::Always:
    case Kind::Until: {
      const bool until = f.kind() == Kind::Until;
      const auto& c = get(until ? f.right() : f.child());
      const std::vector<K3>* l = until ? &get(f.left()) : nullptr;
      // Index n is any position past the prefix; all of them look alike.
      t[n] = c[n];
      // The word may also stop right after the prefix: then Eventually and
      // Until fail and Always holds.
      const K3 tail = f.kind() == Kind::Always ? (t[n] == K3::T ? K3::T : K3::U)
                                               : (t[n] == K3::F ? K3::F : K3::U);
      for (std::size_t i = n; i-- > 0;) {
        const K3 later = i + 1 < n ? t[i + 1] : tail;
        switch (f.kind()) {
          case Kind::Eventually: t[i] = k_or(c[i], later); break;
          case Kind::Always: t[i] = k_and(c[i], later); break;
          default: t[i] = k_or(c[i], k_and((*l)[i], later)); break;
        }
      }
      break;
    }
  }
  return t;
}

}  // namespace

bool evaluate(const Word& word, std::size_t position, const Formula& formula) {
  if (position >= word.size()) {
    throw PositionOutOfRange("position " + std::to_string(position) + " outside word of length " +
                             std::to_string(word.size()));
  }
  return holds(word, position, formula);
}

std::vector<bool> evaluate_all(const Word& word, const Formula& formula) {
  Tables<char> tables(word);
  const auto& t = tables.get(formula);
  return std::vector<bool>(t.begin(), t.end());
}

Verdict evaluate_prefix(const Word& prefix, const Formula& formula) {
  Tables<K3> tables(prefix);
  return static_cast<Verdict>(static_cast<int>(tables.get(formula).front()));
}

}  // namespace t2tl::ltl
