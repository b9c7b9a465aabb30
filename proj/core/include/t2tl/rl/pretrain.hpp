// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "t2tl/ltl/alphabet.hpp"
#include "t2tl/ltl/formula.hpp"
#include "t2tl/rl/agent.hpp"
#include "t2tl/rl/config.hpp"

namespace t2tl::rl {

struct SamplerConfig {
  int max_depth = 3;  // operator nesting; "! p" counts as one level
  double until = 2.0;
  double eventually = 2.0;
  double always = 1.0;
  double conjunction = 2.0;
  double disjunction = 1.0;
  double negation = 1.0;  // applied to propositions only
  double leaf = 4.0;      // a bare proposition below the root
  int max_tries = 10000;
};

// Random task formulas.  sample() rejects draws that simplify to a constant,
// start out accomplished, are decided by the start label, have an oversized
// closure, or cannot be completed in the single-state pretraining MDP within
// `step_cap` steps.
class FormulaSampler {
 public:
  explicit FormulaSampler(ltl::Alphabet alphabet, SamplerConfig config = {});

  const ltl::Alphabet& alphabet() const noexcept { return alphabet_; }
  const SamplerConfig& config() const noexcept { return config_; }

  ltl::Formula draw(nn::Rng& rng) const;  // unfiltered
  ltl::Formula sample(nn::Rng& rng, int step_cap) const;

 private:
  ltl::Formula node(nn::Rng& rng, int depth_left, bool root) const;

  ltl::Alphabet alphabet_;
  SamplerConfig config_;
};

struct PretrainConfig {
  TrainConfig train{};  // episodes is the budget; max_steps the episode cap
  int window = 500;
  double threshold = 0.95;
};

struct PretrainPoint {
  int episode = 0;
  bool success = false;
  double rolling = 0.0;  // success rate over the trailing window (or fewer at the start)
};

struct PretrainResult {
  std::unique_ptr<QAgent> agent;
  std::vector<PretrainPoint> curve;
  bool converged = false;
  int episodes = 0;
};

// Trains the formula encoder and a task-only Q-head on the single-state MDP
// whose actions choose the next label.  Stops once the rolling success rate
// over a full window reaches the threshold, or when the budget runs out.
PretrainResult pretrain(const ltl::Alphabet& alphabet, const FormulaSampler& sampler,
                        const PretrainConfig& config);

// Same loop over tasks from an arbitrary source; each drawn task must have a
// non-terminal root.
using TaskSource = std::function<ltl::Formula(nn::Rng&)>;
PretrainResult pretrain(const ltl::Alphabet& alphabet, const TaskSource& source,
                        const PretrainConfig& config);

}  // namespace t2tl::rl
