// SPDX-License-Identifier: Apache-2.0
#include "t2tl/ltl/progression.hpp"

#include <deque>
#include <set>

#include "t2tl/error.hpp"

namespace t2tl::ltl {

namespace {

Formula progress_raw(LabelSet label, const Formula& f) {
  switch (f.kind()) {
    case Kind::True:
    case Kind::False:
      return f;
    case Kind::Prop:
      return Formula::constant(label.contains(f.prop_id()));
    case Kind::Not:
      return Formula::negation(progress_raw(label, f.child()));
    case Kind::And:
      return Formula::conjunction(progress_raw(label, f.left()), progress_raw(label, f.right()));
    case Kind::Or:
      return Formula::disjunction(progress_raw(label, f.left()), progress_raw(label, f.right()));
    case Kind::Next:
      return f.child();
    case Kind::Until:
      return Formula::disjunction(
          progress_raw(label, f.right()),
          Formula::conjunction(progress_raw(label, f.left()), f));
    case Kind::Eventually:
      return Formula::disjunction(progress_raw(label, f.child()), f);
    case Kind::Always:
      return Formula::conjunction(progress_raw(label, f.child()), f);
  }
  return f;
}

void collect_props(const Formula& f, std::set<PropId>& out) {
  switch (f.kind()) {
    case Kind::True:
    case Kind::False: return;
    case Kind::Prop: out.insert(f.prop_id()); return;
    case Kind::Not:
    case Kind::Next:
    case Kind::Eventually:
    case Kind::Always: collect_props(f.child(), out); return;
    default:
      collect_props(f.left(), out);
      collect_props(f.right(), out);
  }
}

Formula drop_safety(const Formula& f) {
  switch (f.kind()) {
    case Kind::Always: return Formula::truth();
    case Kind::And: return Formula::conjunction(drop_safety(f.left()), drop_safety(f.right()));
    case Kind::Or: return Formula::disjunction(drop_safety(f.left()), drop_safety(f.right()));
    default: return f;
  }
}

}  // namespace

Formula progress(LabelSet label, const Formula& formula) {
  return simplify(progress_raw(label, formula));
}

bool accomplished(const Formula& formula) {
  return simplify(drop_safety(formula)).is_true();
}

Formula progress_task(LabelSet label, const Formula& formula) {
  Formula next = progress(label, formula);
  return accomplished(next) ? Formula::truth() : next;
}

TaskSet::TaskSet(const Formula& root, const Alphabet& alphabet, ClosureOptions options)
    : alphabet_(alphabet) {
  if (alphabet.size() > options.max_propositions) {
    throw ClosureExplosion("alphabet has " + std::to_string(alphabet.size()) +
                           " propositions; closure enumeration is capped at " +
                           std::to_string(options.max_propositions));
  }
  Formula start = simplify(root);
  if (start.is_constant() || accomplished(start)) {
    throw TerminalRoot("task '" + format(root) + "' simplifies to " + format(start));
  }

  // Progression only reads the propositions that occur in the formula, and
  // every member mentions a subset of the root's propositions.
  std::set<PropId> props;
  collect_props(start, props);
  relevant_.assign(props.begin(), props.end());
  columns_ = std::size_t{1} << relevant_.size();

  members_.push_back(start);
  index_.emplace(start.key(), 0);
  std::vector<std::vector<TaskRef>> rows;
  for (std::size_t m = 0; m < members_.size(); ++m) {
    std::vector<TaskRef> row(columns_);
    for (std::size_t col = 0; col < columns_; ++col) {
      Formula next = progress_task(label_of_column(col), members_[m]);
      if (next.is_true()) {
        row[col] = TaskRef::accepted();
      } else if (next.is_false()) {
        row[col] = TaskRef::rejected();
      } else {
        auto [it, fresh] = index_.emplace(next.key(), static_cast<int>(members_.size()));
        if (fresh) {
          if (members_.size() >= options.max_members) {
            throw ClosureExplosion("progression closure of '" + format(start) + "' exceeds " +
                                   std::to_string(options.max_members) + " members");
          }
          members_.push_back(next);
        }
        row[col] = TaskRef::member(it->second);
      }
    }
    rows.push_back(std::move(row));
  }

  table_.reserve(rows.size() * columns_);
  for (auto& row : rows) table_.insert(table_.end(), row.begin(), row.end());
}

std::optional<int> TaskSet::index_of(const Formula& formula) const {
  auto it = index_.find(formula.key());
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

TaskRef TaskSet::classify(const Formula& formula) const {
  if (formula.is_true()) return TaskRef::accepted();
  if (formula.is_false()) return TaskRef::rejected();
  if (auto idx = index_of(formula)) return TaskRef::member(*idx);
  throw Error("formula '" + format(formula) + "' is not a member of the task set");
}

TaskRef TaskSet::step(int index, LabelSet label) const {
  if (index < 0 || static_cast<std::size_t>(index) >= members_.size()) {
    throw Error("task index " + std::to_string(index) + " out of range");
  }
  return table_[static_cast<std::size_t>(index) * columns_ + column(label)];
}

std::size_t TaskSet::column(LabelSet label) const {
  std::size_t mask = 0;
  for (std::size_t b = 0; b < relevant_.size(); ++b) {
    if (label.contains(relevant_[b])) mask |= std::size_t{1} << b;
  }
  return mask;
}

LabelSet TaskSet::label_of_column(std::size_t column) const {
  LabelSet label;
  for (std::size_t b = 0; b < relevant_.size(); ++b) {
    if ((column >> b) & 1U) label.insert(relevant_[b]);
  }
  return label;
}

}  // namespace t2tl::ltl
