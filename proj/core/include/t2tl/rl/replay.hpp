// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "t2tl/env/environment.hpp"
#include "t2tl/ltl/formula.hpp"
#include "t2tl/ltl/progression.hpp"
#include "t2tl/nn/params.hpp"

namespace t2tl::rl {

// One environment step, shared by the per-task entries fanned out from it.
// Features are not copied: they are a function of the state and are rebuilt
// from the environment when a batch is assembled.
struct StepRecord {
  env::EnvState state;
  env::EnvState next_state;
  env::Action action = 0;
  int reward = 0;                 // reward of the task being pursued
  std::int64_t episode_start = 0; // global index of the episode's first step
  nn::RowVec next_context;        // z' snapshot taken at collection time; empty without context
};

struct ReplayEntry {
  std::int64_t step = 0;          // global step index
  int task = 0;                   // member index within the episode's closure
  ltl::Formula formula;
  ltl::LabelSet label;            // label of the state arrived at
  env::Action action = 0;
  int reward = 0;
  ltl::TaskRef next;
  std::optional<ltl::Formula> next_formula;  // empty when next is terminal
  bool bootstrap = true;          // false at task or environment termination
};

// Ring buffer of entries plus the ring of steps they refer to.  The step ring
// keeps `window` extra records so context windows of the oldest entries can
// still be rebuilt.
class ReplayBuffer {
 public:
  ReplayBuffer(std::size_t capacity, std::size_t window = 0);

  std::int64_t add_step(StepRecord record);
  void add(ReplayEntry entry);

  std::size_t size() const noexcept { return entries_.size(); }
  std::size_t capacity() const noexcept { return capacity_; }
  std::int64_t steps_added() const noexcept { return next_step_; }

  // i-th live entry, oldest first.
  const ReplayEntry& entry(std::size_t i) const;
  const StepRecord& step(std::int64_t index) const;

  // Uniform with replacement.
  std::vector<std::size_t> sample(std::size_t n, nn::Rng& rng) const;

  // window x (features + actions + 1) records of the steps that preceded
  // `index` within its episode, oldest first and zero-filled at the top.
  nn::Mat window_records(std::int64_t index, const env::Environment& env, int window) const;

 private:
  std::size_t capacity_;
  std::size_t step_capacity_;
  std::vector<ReplayEntry> entries_;
  std::size_t head_ = 0;  // next overwrite position once full
  std::vector<StepRecord> steps_;
  std::int64_t next_step_ = 0;
};

// Writes one context record (features, one-hot action, reward) into `row`.
void write_context_record(nn::Mat& out, Eigen::Index row, const std::vector<double>& features,
                          int action, int action_count, double reward);

}  // namespace t2tl::rl
