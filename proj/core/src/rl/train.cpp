// SPDX-License-Identifier: Apache-2.0
#include "t2tl/rl/train.hpp"

#include <algorithm>
#include <chrono>

#include "t2tl/error.hpp"
#include "t2tl/nn/vocab.hpp"

namespace t2tl::rl {

namespace {

nn::RowVec to_row(const std::vector<double>& v) {
  return Eigen::Map<const nn::RowVec>(v.data(), static_cast<Eigen::Index>(v.size()));
}

bool bootstraps(const tl::TaskTransition& tt) { return !tt.next.terminal() && (!tt.done || tt.truncated); }

std::vector<tl::TaskTransition> fan_out(const tl::TlTransition& t, const ltl::TaskSet& tasks,
                                        UpdateMode mode) {
  auto view = tl::simultaneous_view(t, tasks);
  if (mode == UpdateMode::Single) {
    std::erase_if(view, [&](const tl::TaskTransition& tt) { return tt.task != t.from.task.index(); });
  }
  return view;
}

}  // namespace

TdBatch make_batch(const ReplayBuffer& replay, const std::vector<std::size_t>& picks,
                   const env::Environment& env, const QAgent& agent) {
  const auto b = static_cast<Eigen::Index>(picks.size());
  const int f = agent.feature_size();
  TdBatch batch;
  batch.features.resize(b, f);
  batch.next_features.resize(b, f);
  if (agent.has_context()) {
    const int w = agent.config().window;
    batch.windows.resize(b * w, f + agent.action_count() + 1);
    batch.next_context.resize(b, agent.context_size());
  }
  for (Eigen::Index j = 0; j < b; ++j) {
    const ReplayEntry& e = replay.entry(picks[static_cast<std::size_t>(j)]);
    const StepRecord& s = replay.step(e.step);
    if (f > 0) {
      batch.features.row(j) = to_row(env.features(s.state));
      batch.next_features.row(j) = to_row(env.features(s.next_state));
    }
    batch.formulas.push_back(e.formula);
    batch.actions.push_back(e.action);
    batch.rewards.push_back(e.reward);
    batch.next.push_back(e.bootstrap ? e.next_formula : std::nullopt);
    if (agent.has_context()) {
      const int w = agent.config().window;
      batch.windows.middleRows(j * w, w) = replay.window_records(e.step, env, w);
      batch.next_context.row(j) = s.next_context;
    }
  }
  return batch;
}

std::optional<int> episodes_to_success(const std::vector<EvalPoint>& evals, double threshold,
                                       int window) {
  window = std::max(window, 1);
  double sum = 0.0;
  for (std::size_t i = 0; i < evals.size(); ++i) {
    sum += evals[i].success_rate;
    if (i >= static_cast<std::size_t>(window)) sum -= evals[i - static_cast<std::size_t>(window)].success_rate;
    if (i + 1 >= static_cast<std::size_t>(window) && sum / window >= threshold - 1e-12) return evals[i].episode;
  }
  return std::nullopt;
}

NeuralLearner::NeuralLearner(QAgent& agent, const TrainConfig& config, nn::Rng& rng)
    : agent_(agent),
      config_(config),
      rng_(rng),
      optimizer_(make_optimizer(config)),
      replay_(static_cast<std::size_t>(config.buffer),
              static_cast<std::size_t>(agent.has_context() ? agent.config().window : 0)) {
  if (agent.has_context()) window_.emplace(agent.config().window, agent.feature_size(), agent.action_count());
}

tl::TlState NeuralLearner::begin_episode(tl::TlMdp& mdp, std::uint64_t seed) {
  if (window_) window_->clear();
  episode_start_ = replay_.steps_added();
  return mdp.reset(seed);
}

tl::TlTransition NeuralLearner::collect_step(tl::TlMdp& mdp, double epsilon) {
  const tl::TlState& s = mdp.state();
  if (s.done) throw SteppedTerminal("collect_step on a finished episode");
  const env::Environment& env = mdp.environment();
  const ltl::TaskSet& tasks = mdp.tasks();
  const std::vector<double> features = env.features(s.env);
  const nn::RowVec z = window_ ? agent_.context(window_->records()) : nn::RowVec();
  const int action = act_epsilon_greedy(agent_.q_values(features, mdp.formula_of(s.task), z), epsilon, rng_);
  const tl::TlTransition t = mdp.step(action);
  ++env_steps_;

  StepRecord rec;
  rec.state = t.from.env;
  rec.next_state = t.to.env;
  rec.action = action;
  rec.reward = t.reward;
  rec.episode_start = episode_start_;
  if (window_) {
    window_->push(features, action, t.reward);
    rec.next_context = agent_.context(window_->records());
  }
  const std::int64_t index = replay_.add_step(std::move(rec));
  for (const auto& tt : fan_out(t, tasks, config_.update)) {
    ReplayEntry e;
    e.step = index;
    e.task = tt.task;
    e.formula = tasks.member(tt.task);
    e.label = t.label;
    e.action = action;
    e.reward = tt.reward;
    e.next = tt.next;
    if (!tt.next.terminal()) e.next_formula = tasks.member(tt.next.index());
    e.bootstrap = bootstraps(tt);
    replay_.add(std::move(e));
  }
  return t;
}

bool NeuralLearner::maybe_update(const env::Environment& env) {
  if (static_cast<int>(replay_.size()) < std::max(config_.learning_starts, 1)) return false;
  if (env_steps_ % config_.train_every != 0) return false;
  const auto picks = replay_.sample(static_cast<std::size_t>(config_.batch), rng_);
  agent_.td_update(make_batch(replay_, picks, env, agent_), config_.gamma, *optimizer_, config_.grad_clip);
  return true;
}

TrainResult train(const TrainConfig& config, const EnvFactory& make_env, const ltl::Formula& formula,
                  const TrainHooks& hooks) {
  config.validate();
  TrainResult result;
  auto environment = make_env();
  if (!environment) throw ConfigInvalid("env", "factory returned no environment");
  result.tasks = std::make_shared<const ltl::TaskSet>(formula, environment->alphabet());
  result.mdp = std::make_unique<tl::TlMdp>(std::move(environment), result.tasks, config.max_steps);
  tl::TlMdp& mdp = *result.mdp;
  const env::Environment& env = mdp.environment();
  const ltl::TaskSet& tasks = *result.tasks;

  mdp.reset(config.seed);
  if (hooks.t_opti) {
    result.t_opti = std::max(*hooks.t_opti, 1);
  } else {
    result.t_opti = std::max(shortest_task_steps(mdp).value_or(mdp.step_cap()), 1);
  }

  nn::Rng rng(config.seed ^ 0x9E3779B97F4A7C15ULL);
  const bool neural = config.learner == LearnerKind::Neural;
  std::unique_ptr<NeuralLearner> learner;
  if (neural) {
    result.agent = std::make_unique<QAgent>(nn::Vocab(env.alphabet()), static_cast<int>(env.feature_size()),
                                            env.action_count(), config.network, config.seed, config.target_sync);
    if (hooks.pretrained) load_pretrained_encoder(*result.agent, *hooks.pretrained);
    learner = std::make_unique<NeuralLearner>(*result.agent, config, rng);
  } else {
    result.table = std::make_unique<TabularQ>(env.state_count(), tasks.size(), env.action_count(),
                                              config.target_sync);
  }
  TabularQ* table = result.table.get();

  for (int episode = 0; episode < config.episodes; ++episode) {
    const auto t0 = std::chrono::steady_clock::now();
    const double eps = config.epsilon.at(episode, config.episodes);
    tl::TlState s = neural ? learner->begin_episode(mdp, config.seed) : mdp.reset(config.seed);
    int ret = 0;
    while (!s.done) {
      tl::TlTransition t;
      if (neural) {
        t = learner->collect_step(mdp, eps);
        learner->maybe_update(env);
      } else {
        const int action = act_epsilon_greedy(table->row(s.env.id, s.task.index()), eps, rng);
        t = mdp.step(action);
        for (const auto& tt : fan_out(t, tasks, config.update)) {
          table->update(t.from.env.id, tt.task, action, tt.reward, t.to.env.id, tt.next, bootstraps(tt),
                        config.alpha, config.gamma);
        }
      }
      ret += t.reward;
      s = t.to;
    }

    EpisodeMetrics m;
    m.episode = episode;
    m.steps = s.steps;
    m.episode_return = ret;
    m.performance = performance(ret, s.steps, result.t_opti, config.gamma);
    m.epsilon = eps;
    if (hooks.record_wall_ms) {
      m.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    }
    result.metrics.push_back(m);
    if (neural && hooks.on_episode) hooks.on_episode(episode, *result.agent);

    if (config.eval_every > 0 && (episode + 1) % config.eval_every == 0) {
      std::vector<EpisodeOutcome> runs;
      for (int k = 0; k < config.eval_episodes; ++k) {
        runs.push_back(neural ? run_greedy_episode(mdp, *result.agent, config.seed)
                              : run_greedy_episode(mdp, *table, config.seed));
      }
      const EvalSummary sum = summarize(runs, result.t_opti, config.gamma);
      result.evals.push_back({episode, sum.success_rate, sum.mean_steps, sum.mean_performance});
    }
  }
  mdp.reset(config.seed);
  return result;
}

}  // namespace t2tl::rl
