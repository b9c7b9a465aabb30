// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "t2tl/ltl/alphabet.hpp"
#include "t2tl/ltl/formula.hpp"

namespace t2tl::ltl {

// Rewrites to canonical form: constant folding, double negation, negation
// pushed through & and |, flattening, deduplication, removal of operands
// subsumed by a sibling, and sorted operand order.  Semantics preserving.
Formula simplify(const Formula& formula);

bool is_canonical(const Formula& formula);

// Sound but incomplete syntactic check that `stronger` entails `weaker` at
// every position of every finite word.
bool entails(const Formula& stronger, const Formula& weaker);

// One-letter progression; the result is canonical.
Formula progress(LabelSet label, const Formula& formula);

// True when nothing but safety obligations remain: the formula is True once
// every Always reachable from the root through & and | alone is replaced by
// True.  A task in that state ends the episode as a success.
bool accomplished(const Formula& formula);

// Task-level progression: progress() with accomplished results mapped to True.
Formula progress_task(LabelSet label, const Formula& formula);

// Successor of a task: another member, or one of the two terminal markers.
struct TaskRef {
  static constexpr int kTrue = -1;
  static constexpr int kFalse = -2;

  int value = 0;

  static constexpr TaskRef member(int index) { return TaskRef{index}; }
  static constexpr TaskRef accepted() { return TaskRef{kTrue}; }
  static constexpr TaskRef rejected() { return TaskRef{kFalse}; }

  constexpr bool terminal() const { return value < 0; }
  constexpr bool is_true() const { return value == kTrue; }
  constexpr bool is_false() const { return value == kFalse; }
  constexpr int index() const { return value; }
  constexpr int reward() const { return is_true() ? 1 : (is_false() ? -1 : 0); }
  friend constexpr bool operator==(TaskRef a, TaskRef b) { return a.value == b.value; }
};

struct ClosureOptions {
  std::size_t max_propositions = 16;
  std::size_t max_members = 4096;
};

// Progression closure of a root task, indexed in breadth-first discovery
// order with the root at 0.  True and false are never members.  The full
// successor table is computed at construction, so the set is immutable and
// safe to share between threads.
class TaskSet {
 public:
  TaskSet(const Formula& root, const Alphabet& alphabet, ClosureOptions options = {});

  const Formula& root() const noexcept { return members_.front(); }
  const Alphabet& alphabet() const noexcept { return alphabet_; }
  std::size_t size() const noexcept { return members_.size(); }
  const Formula& member(int index) const { return members_.at(static_cast<std::size_t>(index)); }
  const std::vector<Formula>& members() const noexcept { return members_; }
  std::optional<int> index_of(const Formula& formula) const;

  // Classifies a formula that must be a member or a constant.
  TaskRef classify(const Formula& formula) const;

  // progress_task(label, member(index)) as a TaskRef.
  TaskRef step(int index, LabelSet label) const;

 private:
  Alphabet alphabet_;
  std::vector<Formula> members_;
  std::unordered_map<std::string, int> index_;
  std::size_t column(LabelSet label) const;
  LabelSet label_of_column(std::size_t column) const;

  std::vector<PropId> relevant_;  // propositions occurring in the root
  std::size_t columns_ = 0;
  std::vector<TaskRef> table_;    // members x columns_ successor table
};

inline TaskSet closure(const Formula& root, const Alphabet& alphabet, ClosureOptions options = {}) {
  return TaskSet(root, alphabet, options);
}

}  // namespace t2tl::ltl
