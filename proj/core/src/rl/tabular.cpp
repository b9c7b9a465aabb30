// SPDX-License-Identifier: Apache-2.0
#include "t2tl/rl/tabular.hpp"

#include <string>

#include "t2tl/error.hpp"
#include "t2tl/rl/agent.hpp"

namespace t2tl::rl {

TabularQ::TabularQ(std::size_t states, std::size_t tasks, int actions, int target_sync,
                   std::size_t limit)
    : states_(states), tasks_(tasks), actions_(actions), target_sync_(target_sync) {
  if (actions < 1 || tasks == 0 || states == 0) throw ConfigInvalid("tabular", "empty table");
  if (target_sync < 1) throw ConfigInvalid("target_sync", "must be positive");
  const auto a = static_cast<std::size_t>(actions);
  if (states > limit / tasks / a) {
    throw StateSpaceTooLarge(std::to_string(states) + " states x " + std::to_string(tasks) +
                             " tasks x " + std::to_string(actions) + " actions exceeds the table limit");
  }
  q_.assign(states * tasks * a, 0.0);
  if (target_sync_ > 1) target_ = q_;
}

std::size_t TabularQ::offset(std::size_t state, int task) const {
  if (state >= states_ || task < 0 || static_cast<std::size_t>(task) >= tasks_) {
    throw Error("tabular index out of range");
  }
  return (state * tasks_ + static_cast<std::size_t>(task)) * static_cast<std::size_t>(actions_);
}

double& TabularQ::at(std::size_t state, int task, int action) {
  return q_[offset(state, task) + static_cast<std::size_t>(action)];
}

double TabularQ::at(std::size_t state, int task, int action) const {
  return q_[offset(state, task) + static_cast<std::size_t>(action)];
}

nn::RowVec TabularQ::row(std::size_t state, int task) const {
  return Eigen::Map<const nn::RowVec>(q_.data() + offset(state, task), actions_);
}

nn::RowVec TabularQ::target_row(std::size_t state, int task) const {
  const auto& t = target_sync_ > 1 ? target_ : q_;
  return Eigen::Map<const nn::RowVec>(t.data() + offset(state, task), actions_);
}

double TabularQ::update(std::size_t state, int task, int action, double reward,
                        std::size_t next_state, ltl::TaskRef next, bool bootstrap, double alpha,
                        double gamma) {
  if (action < 0 || action >= actions_) throw InvalidAction("action out of range");
  bootstrap = bootstrap && !next.terminal();
  double y = reward;
  if (bootstrap) {
    y = double_q_target(reward, gamma, row(next_state, next.index()),
                        target_row(next_state, next.index()), true);
  }
  double& q = at(state, task, action);
  const double err = y - q;
  q += alpha * err;
  ++updates_;
  if (target_sync_ > 1 && updates_ % target_sync_ == 0) target_ = q_;
  return err;
}

}  // namespace t2tl::rl
