// SPDX-License-Identifier: Apache-2.0
#include "t2tl/rl/config.hpp"

#include <algorithm>
#include <cmath>

#include "t2tl/error.hpp"

namespace t2tl::rl {

double EpsilonSchedule::at(int episode, int total_episodes) const {
  const int span = decay_episodes > 0
                       ? decay_episodes
                       : static_cast<int>(std::ceil(decay_fraction * std::max(total_episodes, 1)));
  if (span <= 0 || episode >= span) return end;
  return start + (end - start) * static_cast<double>(episode) / span;
}

void TrainConfig::validate() const {
  if (!(gamma > 0.0 && gamma <= 1.0)) throw ConfigInvalid("gamma", "must lie in (0, 1]");
  if (!(alpha >= 0.0)) throw ConfigInvalid("alpha", "must be non-negative");
  for (double e : {epsilon.start, epsilon.end}) {
    if (!(e >= 0.0 && e <= 1.0)) throw ConfigInvalid("epsilon", "must lie in [0, 1]");
  }
  if (epsilon.decay_fraction < 0.0) throw ConfigInvalid("epsilon.decay_fraction", "must be >= 0");
  if (episodes < 0) throw ConfigInvalid("episodes", "must be >= 0");
  if (max_steps < 0) throw ConfigInvalid("max_steps", "must be >= 0");
  if (buffer < 1) throw ConfigInvalid("buffer", "must be positive");
  if (batch < 1) throw ConfigInvalid("batch", "must be positive");
  if (target_sync < 1) throw ConfigInvalid("target_sync", "must be positive");
  if (train_every < 1) throw ConfigInvalid("train_every", "must be positive");
  if (eval_every < 0 || eval_episodes < 1) throw ConfigInvalid("eval", "bad evaluation settings");
  if (momentum < 0.0 || momentum >= 1.0) throw ConfigInvalid("momentum", "must lie in [0, 1)");
  network.formula.validate();
  if (network.context) {
    network.context_encoder.validate();
    if (network.window < 1) throw ConfigInvalid("context.window", "must be at least 1");
  }
}

}  // namespace t2tl::rl
