// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <vector>

#include "t2tl/ltl/progression.hpp"
#include "t2tl/nn/params.hpp"

namespace t2tl::rl {

// Q-table keyed by (environment state id, closure member, action) with an
// optional lagged copy.  With sync period 1 the copy is the table itself.
class TabularQ {
 public:
  static constexpr std::size_t kDefaultLimit = std::size_t{1} << 26;

  TabularQ(std::size_t states, std::size_t tasks, int actions, int target_sync = 1,
           std::size_t limit = kDefaultLimit);

  std::size_t states() const noexcept { return states_; }
  std::size_t tasks() const noexcept { return tasks_; }
  int actions() const noexcept { return actions_; }

  double& at(std::size_t state, int task, int action);
  double at(std::size_t state, int task, int action) const;
  nn::RowVec row(std::size_t state, int task) const;
  nn::RowVec target_row(std::size_t state, int task) const;
  const std::vector<double>& values() const noexcept { return q_; }
  std::vector<double>& values() noexcept { return q_; }

  // Q(s, task, a) += alpha * (y - Q) with the double-Q target; returns the
  // TD error before the step.
  double update(std::size_t state, int task, int action, double reward, std::size_t next_state,
                ltl::TaskRef next, bool bootstrap, double alpha, double gamma);

  long updates() const noexcept { return updates_; }

 private:
  std::size_t offset(std::size_t state, int task) const;

  std::size_t states_;
  std::size_t tasks_;
  int actions_;
  int target_sync_;
  long updates_ = 0;
  std::vector<double> q_;
  std::vector<double> target_;  // empty when target_sync_ == 1
};

}  // namespace t2tl::rl
