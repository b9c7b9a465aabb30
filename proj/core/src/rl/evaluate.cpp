// SPDX-License-Identifier: Apache-2.0
#include "t2tl/rl/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>

#include "t2tl/nn/encoders.hpp"

namespace t2tl::rl {

double performance(int episode_return, int steps, int t_opti, double gamma) {
  const double t = std::max(t_opti, 1);
  return static_cast<double>(episode_return) + std::pow(gamma, static_cast<double>(steps) / t);
}

std::optional<int> shortest_task_steps(const tl::TlMdp& mdp) {
  const auto& s0 = mdp.state();
  if (s0.task.is_true()) return 0;
  if (s0.done) return std::nullopt;
  const auto& env = mdp.environment();
  const auto& tasks = mdp.tasks();
  const std::size_t members = tasks.size();
  std::vector<int> dist(env.state_count() * members, -1);
  std::deque<std::pair<std::size_t, int>> queue;
  const auto key = [&](std::size_t s, int t) { return s * members + static_cast<std::size_t>(t); };
  dist[key(s0.env.id, s0.task.index())] = 0;
  queue.emplace_back(s0.env.id, s0.task.index());
  while (!queue.empty()) {
    const auto [sid, task] = queue.front();
    queue.pop_front();
    const int d = dist[key(sid, task)];
    const env::EnvState s = env.state_at(sid);
    for (int a = 0; a < env.action_count(); ++a) {
      const env::EnvState n = env.transition(s, a);
      const ltl::TaskRef next = tasks.step(task, n.label);
      if (next.is_true()) return d + 1;
      if (next.is_false() || n.terminal) continue;
      auto& slot = dist[key(n.id, next.index())];
      if (slot >= 0) continue;
      slot = d + 1;
      queue.emplace_back(n.id, next.index());
    }
  }
  return std::nullopt;
}

namespace {

template <typename QFn>
EpisodeOutcome greedy_rollout(tl::TlMdp& mdp, std::uint64_t seed, QFn&& q_of) {
  tl::TlState s = mdp.reset(seed);
  EpisodeOutcome out;
  while (!s.done) {
    const tl::TlTransition t = mdp.step(greedy_action(q_of(s)));
    out.episode_return += t.reward;
    out.steps = t.to.steps;
    s = t.to;
  }
  return out;
}

}  // namespace

EpisodeOutcome run_greedy_episode(tl::TlMdp& mdp, const QAgent& agent, std::uint64_t seed) {
  const auto& env = mdp.environment();
  const int window = agent.has_context() ? agent.config().window : 1;
  nn::ContextWindow ctx(window, static_cast<int>(env.feature_size()), env.action_count());
  // The context record of a step needs its features, action and reward, so the
  // rollout is written out rather than routed through greedy_rollout.
  tl::TlState s = mdp.reset(seed);
  EpisodeOutcome out;
  while (!s.done) {
    const auto features = env.features(s.env);
    const nn::RowVec z = agent.has_context() ? agent.context(ctx.records()) : nn::RowVec();
    const int a = greedy_action(agent.q_values(features, mdp.formula_of(s.task), z));
    const tl::TlTransition t = mdp.step(a);
    if (agent.has_context()) ctx.push(features, a, t.reward);
    out.episode_return += t.reward;
    out.steps = t.to.steps;
    s = t.to;
  }
  return out;
}

EpisodeOutcome run_greedy_episode(tl::TlMdp& mdp, const TabularQ& table, std::uint64_t seed) {
  return greedy_rollout(mdp, seed, [&](const tl::TlState& s) { return table.row(s.env.id, s.task.index()); });
}

EvalSummary summarize(const std::vector<EpisodeOutcome>& runs, int t_opti, double gamma) {
  EvalSummary out;
  out.episodes = static_cast<int>(runs.size());
  out.t_opti = t_opti;
  out.runs = runs;
  if (runs.empty()) return out;
  int wins = 0;
  double steps = 0.0;
  for (const auto& r : runs) {
    out.performances.push_back(performance(r.episode_return, r.steps, t_opti, gamma));
    wins += r.success() ? 1 : 0;
    steps += r.steps;
  }
  const double n = static_cast<double>(runs.size());
  out.mean_performance = std::accumulate(out.performances.begin(), out.performances.end(), 0.0) / n;
  std::vector<double> sorted = out.performances;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t m = sorted.size() / 2;
  out.median_performance = sorted.size() % 2 ? sorted[m] : 0.5 * (sorted[m - 1] + sorted[m]);
  out.success_rate = wins / n;
  out.mean_steps = steps / n;
  return out;
}

}  // namespace t2tl::rl
