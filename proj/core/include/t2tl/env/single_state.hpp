// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "t2tl/env/environment.hpp"

namespace t2tl::env {

// One state s0; action p emits the label {p}.  Features are empty, so a
// policy sees only the task.
class SingleStateMdp : public Environment {
 public:
  explicit SingleStateMdp(ltl::Alphabet alphabet, int step_cap = 20);

  std::string kind() const override { return "single_state"; }
  const ltl::Alphabet& alphabet() const override { return alphabet_; }
  int action_count() const override { return static_cast<int>(alphabet_.size()); }
  std::size_t feature_size() const override { return 0; }
  std::size_t state_count() const override { return 1; }
  int default_step_cap() const override { return step_cap_; }

  EnvState reset(std::uint64_t seed) override;
  EnvState transition(const EnvState& s, Action a) const override;
  EnvState state_at(std::size_t id) const override;
  std::vector<double> features(const EnvState&) const override { return {}; }
  std::unique_ptr<Environment> clone() const override;

 private:
  ltl::Alphabet alphabet_;
  int step_cap_;
};

}  // namespace t2tl::env
