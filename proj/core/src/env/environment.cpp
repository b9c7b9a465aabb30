// SPDX-License-Identifier: Apache-2.0
#include "t2tl/env/environment.hpp"

#include "t2tl/env/single_state.hpp"
#include "t2tl/error.hpp"

namespace t2tl::env {

StepOutcome Environment::step(Action a) {
  check_action(a);
  StepOutcome out;
  out.state = transition(state_, a);
  out.moved = out.state.x != state_.x || out.state.y != state_.y;
  state_ = out.state;
  return out;
}

void Environment::check_action(Action a) const {
  if (a < 0 || a >= action_count()) {
    throw InvalidAction("action " + std::to_string(a) + " outside [0, " +
                        std::to_string(action_count()) + ") for " + kind());
  }
}

SingleStateMdp::SingleStateMdp(ltl::Alphabet alphabet, int step_cap)
    : alphabet_(std::move(alphabet)), step_cap_(step_cap) {
  if (alphabet_.size() == 0) throw Error("single-state MDP needs a nonempty alphabet");
  state_ = EnvState{};
}

EnvState SingleStateMdp::reset(std::uint64_t) {
  state_ = EnvState{};
  return state_;
}

EnvState SingleStateMdp::transition(const EnvState&, Action a) const {
  check_action(a);
  EnvState next;
  next.label = ltl::LabelSet::single(static_cast<ltl::PropId>(a));
  return next;
}

EnvState SingleStateMdp::state_at(std::size_t id) const {
  if (id != 0) throw Error("single-state MDP has only state 0");
  return EnvState{};
}

std::unique_ptr<Environment> SingleStateMdp::clone() const {
  return std::make_unique<SingleStateMdp>(*this);
}

}  // namespace t2tl::env
