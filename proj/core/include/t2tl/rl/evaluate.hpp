// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "t2tl/rl/agent.hpp"
#include "t2tl/rl/tabular.hpp"
#include "t2tl/tl/tlmdp.hpp"

namespace t2tl::rl {

// R + gamma^(steps / t_opti).  t_opti below 1 is treated as 1.
double performance(int episode_return, int steps, int t_opti, double gamma);

// Fewest actions that take the product from its current state to task
// acceptance without a violation, by breadth-first search over
// (environment state, closure member).  Empty when acceptance is unreachable.
std::optional<int> shortest_task_steps(const tl::TlMdp& mdp);

struct EpisodeOutcome {
  int steps = 0;
  int episode_return = 0;
  bool success() const noexcept { return episode_return > 0; }
};

// Greedy (epsilon = 0) rollouts.  Each resets the product with `seed`.
EpisodeOutcome run_greedy_episode(tl::TlMdp& mdp, const QAgent& agent, std::uint64_t seed);
EpisodeOutcome run_greedy_episode(tl::TlMdp& mdp, const TabularQ& table, std::uint64_t seed);

struct EvalSummary {
  int episodes = 0;
  int t_opti = 1;
  double mean_performance = 0.0;
  double median_performance = 0.0;
  double success_rate = 0.0;
  double mean_steps = 0.0;
  std::vector<EpisodeOutcome> runs;
  std::vector<double> performances;
};

EvalSummary summarize(const std::vector<EpisodeOutcome>& runs, int t_opti, double gamma);

}  // namespace t2tl::rl
