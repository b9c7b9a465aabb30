// SPDX-License-Identifier: Apache-2.0
#include "t2tl/tl/tlmdp.hpp"

#include <ostream>

#include <json.hpp>

#include "t2tl/error.hpp"
#include "t2tl/ltl/semantics.hpp"

namespace t2tl::tl {

TlMdp::TlMdp(std::unique_ptr<env::Environment> environment,
             std::shared_ptr<const ltl::TaskSet> tasks, int step_cap)
    : env_(std::move(environment)), tasks_(std::move(tasks)) {
  if (!env_ || !tasks_) throw Error("TL-MDP needs an environment and a task set");
  if (!(tasks_->alphabet() == env_->alphabet())) {
    throw Error("task alphabet does not match the environment's alphabet");
  }
  step_cap_ = step_cap > 0 ? step_cap : env_->default_step_cap();
}

ltl::Formula TlMdp::formula_of(ltl::TaskRef ref) const {
  if (ref.is_true()) return ltl::Formula::truth();
  if (ref.is_false()) return ltl::Formula::falsity();
  return tasks_->member(ref.index());
}

TlState TlMdp::reset(std::uint64_t seed) {
  state_ = TlState{};
  state_.env = env_->reset(seed);
  state_.task = tasks_->step(0, state_.env.label);
  state_.done = state_.task.terminal() || state_.env.terminal;
  return state_;
}

TlTransition TlMdp::step(env::Action action) {
  if (state_.done) throw SteppedTerminal("step called on a finished episode; call reset first");
  TlTransition t;
  t.from = state_;
  t.action = action;
  const env::StepOutcome out = env_->step(action);
  t.to.env = out.state;
  t.to.steps = state_.steps + 1;
  t.to.task = tasks_->step(state_.task.index(), out.state.label);
  t.label = out.state.label;
  t.reward = t.to.task.reward();
  const bool finished = t.to.task.terminal() || out.state.terminal;
  t.truncated = !finished && t.to.steps >= step_cap_;
  t.done = t.to.done = finished || t.truncated;
  state_ = t.to;
  return t;
}

std::vector<TaskTransition> simultaneous_view(const TlTransition& t, const ltl::TaskSet& tasks) {
  std::vector<TaskTransition> out(tasks.size());
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    TaskTransition& v = out[i];
    v.task = static_cast<int>(i);
    v.next = tasks.step(v.task, t.label);
    v.reward = v.next.reward();
    const bool finished = v.next.terminal() || t.to.env.terminal;
    v.truncated = !finished && t.truncated;
    v.done = finished || t.truncated;
  }
  return out;
}

int nonmarkov_reward(const ltl::Word& word, const ltl::Formula& formula) {
  ltl::Word prefix;
  for (const auto& letter : word) {
    prefix.push_back(letter);
    if (ltl::evaluate_all(prefix, formula).front()) return 1;
    if (ltl::evaluate_prefix(prefix, formula) == ltl::Verdict::Violated) return -1;
  }
  return 0;
}

void TraceRecorder::on_reset(const TlState& s) {
  records_.clear();
  TraceRecord r;
  r.label = s.env.label.names(mdp_.environment().alphabet());
  r.formula = ltl::format(mdp_.formula_of(s.task));
  r.reward = s.task.reward();
  r.done = s.done;
  records_.push_back(std::move(r));
}

void TraceRecorder::on_step(const TlTransition& t) {
  TraceRecord r;
  r.step = t.to.steps;
  r.action = t.action;
  r.label = t.label.names(mdp_.environment().alphabet());
  r.formula = ltl::format(mdp_.formula_of(t.to.task));
  r.reward = t.reward;
  r.done = t.done;
  records_.push_back(std::move(r));
}

void write_trace(std::ostream& out, const std::vector<TraceRecord>& records) {
  for (const auto& r : records) {
    nlohmann::ordered_json j;
    j["step"] = r.step;
    j["action"] = r.action;
    j["label"] = r.label;
    j["formula"] = r.formula;
    j["reward"] = r.reward;
    j["done"] = r.done;
    out << j.dump() << '\n';
  }
}

}  // namespace t2tl::tl
