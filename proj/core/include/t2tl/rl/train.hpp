// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "t2tl/env/environment.hpp"
#include "t2tl/ltl/formula.hpp"
#include "t2tl/ltl/progression.hpp"
#include "t2tl/rl/agent.hpp"
#include "t2tl/rl/checkpoint.hpp"
#include "t2tl/nn/encoders.hpp"
#include "t2tl/rl/config.hpp"
#include "t2tl/rl/evaluate.hpp"
#include "t2tl/rl/replay.hpp"
#include "t2tl/rl/tabular.hpp"
#include "t2tl/tl/tlmdp.hpp"

namespace t2tl::rl {

using EnvFactory = std::function<std::unique_ptr<env::Environment>()>;

struct EpisodeMetrics {
  int episode = 0;
  int steps = 0;
  int episode_return = 0;
  double performance = 0.0;
  double epsilon = 0.0;
  double wall_ms = 0.0;
};

// Greedy evaluation taken after an episode.
struct EvalPoint {
  int episode = 0;
  double success_rate = 0.0;
  double mean_steps = 0.0;
  double mean_performance = 0.0;
};

struct TrainHooks {
  const Checkpoint* pretrained = nullptr;  // formula-encoder weights to start from
  std::optional<int> t_opti;               // overrides the search result
  bool record_wall_ms = false;
  // Called after every episode, before evaluation.  Neural mode only.
  std::function<void(int episode, const QAgent&)> on_episode;
};

struct TrainResult {
  std::shared_ptr<const ltl::TaskSet> tasks;
  int t_opti = 1;
  std::vector<EpisodeMetrics> metrics;
  std::vector<EvalPoint> evals;
  std::unique_ptr<QAgent> agent;     // neural mode
  std::unique_ptr<TabularQ> table;   // tabular mode
  std::unique_ptr<tl::TlMdp> mdp;    // the product the run used, reset to the start state
};

// Neural-mode experience collection and updates, shared by training and
// pretraining.  Replay entries carry formulas rather than closure indices, so
// one buffer can span episodes over different tasks.
class NeuralLearner {
 public:
  NeuralLearner(QAgent& agent, const TrainConfig& config, nn::Rng& rng);

  // Resets the product and clears the context window.
  tl::TlState begin_episode(tl::TlMdp& mdp, std::uint64_t seed);
  // One epsilon-greedy step on the pursued task, fanned out to the buffer
  // and pushed into the context window.  No update.
  tl::TlTransition collect_step(tl::TlMdp& mdp, double epsilon);
  // Samples a batch and updates when the buffer is warm and the step count
  // hits the training period.  Returns whether an update ran.
  bool maybe_update(const env::Environment& env);

  const ReplayBuffer& replay() const noexcept { return replay_; }
  const nn::ContextWindow* window() const noexcept { return window_ ? &*window_ : nullptr; }
  std::int64_t env_steps() const noexcept { return env_steps_; }

 private:
  QAgent& agent_;
  const TrainConfig& config_;
  nn::Rng& rng_;
  std::unique_ptr<Optimizer> optimizer_;
  ReplayBuffer replay_;
  std::optional<nn::ContextWindow> window_;
  std::int64_t episode_start_ = 0;
  std::int64_t env_steps_ = 0;
};

// Acts on the task being pursued, fans each step out to the closure members
// (or to the pursued one alone in single mode) and updates per step.
TrainResult train(const TrainConfig& config, const EnvFactory& make_env, const ltl::Formula& formula,
                  const TrainHooks& hooks = {});

// Episode index at which the mean greedy success over the trailing `window`
// evaluation points first reaches `threshold`; empty if it never does.
std::optional<int> episodes_to_success(const std::vector<EvalPoint>& evals, double threshold,
                                       int window = 1);

// Feature rows, context windows and formulas for the sampled entries.
TdBatch make_batch(const ReplayBuffer& replay, const std::vector<std::size_t>& picks,
                   const env::Environment& env, const QAgent& agent);

}  // namespace t2tl::rl
