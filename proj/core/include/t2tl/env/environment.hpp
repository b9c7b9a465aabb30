// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "t2tl/ltl/alphabet.hpp"

namespace t2tl::env {

using Action = int;

// Grid moves.  y grows to the south.
enum Move : Action { kNorth = 0, kEast = 1, kSouth = 2, kWest = 3 };

struct EnvState {
  std::size_t id = 0;  // dense index in [0, state_count())
  int x = 0;
  int y = 0;
  ltl::LabelSet label;
  bool terminal = false;

  friend bool operator==(const EnvState&, const EnvState&) = default;
};

struct StepOutcome {
  EnvState state;
  bool moved = false;  // false when a move was blocked
};

// A labeled MDP.  Instances are single-owner and mutable; the transition
// model itself is deterministic and exposed through transition() so oracles
// can enumerate it without touching the live state.
class Environment {
 public:
  virtual ~Environment() = default;

  virtual std::string kind() const = 0;
  virtual const ltl::Alphabet& alphabet() const = 0;
  virtual int action_count() const = 0;
  virtual std::size_t feature_size() const = 0;
  virtual std::size_t state_count() const = 0;
  virtual int default_step_cap() const = 0;

  // Re-initialises the episode.  Grids whose layout depends on the seed
  // regenerate it here.
  virtual EnvState reset(std::uint64_t seed) = 0;

  virtual EnvState transition(const EnvState& s, Action a) const = 0;
  virtual EnvState state_at(std::size_t id) const = 0;
  virtual std::vector<double> features(const EnvState& s) const = 0;
  virtual std::unique_ptr<Environment> clone() const = 0;

  const EnvState& state() const noexcept { return state_; }
  StepOutcome step(Action a);

 protected:
  void check_action(Action a) const;
  EnvState state_;
};

}  // namespace t2tl::env
