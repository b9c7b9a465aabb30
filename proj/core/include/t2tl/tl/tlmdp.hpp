// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "t2tl/env/environment.hpp"
#include "t2tl/ltl/progression.hpp"

namespace t2tl::tl {

struct TlState {
  env::EnvState env;
  ltl::TaskRef task;  // member index, or accepted/rejected
  int steps = 0;      // actions taken this episode
  bool done = false;
};

struct TlTransition {
  TlState from;
  env::Action action = 0;
  int reward = 0;  // -1, 0 or +1
  TlState to;
  bool done = false;
  bool truncated = false;  // ended by the step cap alone, so still bootstrappable
  ltl::LabelSet label;     // label of the state arrived at
};

// Product of a labeled environment with the progression closure of a task.
// Progression is applied to the label of every state arrived at, including
// the start state at reset.
class TlMdp {
 public:
  // step_cap <= 0 selects the environment's default.
  TlMdp(std::unique_ptr<env::Environment> environment, std::shared_ptr<const ltl::TaskSet> tasks,
        int step_cap = 0);

  TlState reset(std::uint64_t seed);
  TlTransition step(env::Action action);

  const TlState& state() const noexcept { return state_; }
  ltl::Formula formula() const { return formula_of(state_.task); }
  ltl::Formula formula_of(ltl::TaskRef ref) const;

  env::Environment& environment() noexcept { return *env_; }
  const env::Environment& environment() const noexcept { return *env_; }
  const ltl::TaskSet& tasks() const noexcept { return *tasks_; }
  const std::shared_ptr<const ltl::TaskSet>& task_set() const noexcept { return tasks_; }
  int step_cap() const noexcept { return step_cap_; }

 private:
  std::unique_ptr<env::Environment> env_;
  std::shared_ptr<const ltl::TaskSet> tasks_;
  int step_cap_;
  TlState state_;
};

// Per-member reading of one environment step: the outcome had the agent been
// pursuing member `task` instead of its current formula.
struct TaskTransition {
  int task = 0;
  ltl::TaskRef next;
  int reward = 0;
  bool done = false;
  bool truncated = false;
};

std::vector<TaskTransition> simultaneous_view(const TlTransition& t, const ltl::TaskSet& tasks);

// Reward of a finished trajectory computed from the raw label word with the
// recursive evaluator: +1 at the first prefix that satisfies the formula when
// the trace stops there, -1 at the first prefix no extension can satisfy, 0
// when neither happens.
int nonmarkov_reward(const ltl::Word& word, const ltl::Formula& formula);

struct TraceRecord {
  int step = 0;
  int action = -1;  // -1 for the reset record
  std::vector<std::string> label;
  std::string formula;
  int reward = 0;
  bool done = false;
};

// Collects trace records for one episode.
class TraceRecorder {
 public:
  explicit TraceRecorder(const TlMdp& mdp) : mdp_(mdp) {}
  void on_reset(const TlState& s);
  void on_step(const TlTransition& t);
  const std::vector<TraceRecord>& records() const noexcept { return records_; }

 private:
  const TlMdp& mdp_;
  std::vector<TraceRecord> records_;
};

// One JSON object per line.
void write_trace(std::ostream& out, const std::vector<TraceRecord>& records);

}  // namespace t2tl::tl
