// SPDX-License-Identifier: Apache-2.0
#include "t2tl/rl/pretrain.hpp"

#include <array>

#include "t2tl/env/single_state.hpp"
#include "t2tl/error.hpp"
#include "t2tl/ltl/progression.hpp"
#include "t2tl/nn/vocab.hpp"
#include "t2tl/rl/evaluate.hpp"
#include "t2tl/rl/train.hpp"
#include "t2tl/tl/tlmdp.hpp"

namespace t2tl::rl {

namespace {

enum class Pick { Leaf, Until, Eventually, Always, And, Or, Not };

}  // namespace

FormulaSampler::FormulaSampler(ltl::Alphabet alphabet, SamplerConfig config)
    : alphabet_(std::move(alphabet)), config_(config) {
  if (alphabet_.size() == 0) throw ConfigInvalid("pretrain.alphabet", "needs at least one proposition");
  if (config_.max_depth < 1) throw ConfigInvalid("sampler.max_depth", "must be at least 1");
}

ltl::Formula FormulaSampler::node(nn::Rng& rng, int depth_left, bool root) const {
  std::uniform_int_distribution<std::size_t> prop_pick(0, alphabet_.size() - 1);
  const auto prop = [&] {
    const auto id = static_cast<ltl::PropId>(prop_pick(rng));
    return ltl::Formula::prop(alphabet_.name(id), id);
  };
  if (depth_left <= 0) return prop();
  const std::array<Pick, 7> picks{Pick::Leaf, Pick::Until, Pick::Eventually, Pick::Always,
                                  Pick::And,  Pick::Or,    Pick::Not};
  const std::array<double, 7> weights{root ? 0.0 : config_.leaf, config_.until, config_.eventually,
                                      config_.always, config_.conjunction, config_.disjunction,
                                      config_.negation};
  std::discrete_distribution<std::size_t> choose(weights.begin(), weights.end());
  const int d = depth_left - 1;
  switch (picks[choose(rng)]) {
    case Pick::Leaf: return prop();
    case Pick::Until: {
      auto l = node(rng, d, false);
      return ltl::Formula::until(std::move(l), node(rng, d, false));
    }
    case Pick::Eventually: return ltl::Formula::eventually(node(rng, d, false));
    case Pick::Always: return ltl::Formula::always(node(rng, d, false));
    case Pick::And: {
      auto l = node(rng, d, false);
      return ltl::Formula::conjunction(std::move(l), node(rng, d, false));
    }
    case Pick::Or: {
      auto l = node(rng, d, false);
      return ltl::Formula::disjunction(std::move(l), node(rng, d, false));
    }
    case Pick::Not: return ltl::Formula::negation(prop());
  }
  return prop();
}

ltl::Formula FormulaSampler::draw(nn::Rng& rng) const { return node(rng, config_.max_depth, true); }

ltl::Formula FormulaSampler::sample(nn::Rng& rng, int step_cap) const {
  for (int attempt = 0; attempt < config_.max_tries; ++attempt) {
    const ltl::Formula f = ltl::simplify(draw(rng));
    if (f.kind() == ltl::Kind::True || f.kind() == ltl::Kind::False) continue;
    try {
      auto tasks = std::make_shared<const ltl::TaskSet>(f, alphabet_);
      tl::TlMdp mdp(std::make_unique<env::SingleStateMdp>(alphabet_, step_cap), tasks, step_cap);
      if (mdp.reset(0).done) continue;  // decided by the start label alone
      const auto best = shortest_task_steps(mdp);
      if (!best || *best > step_cap) continue;
      return f;
    } catch (const TerminalRoot&) {
    } catch (const ClosureExplosion&) {
    }
  }
  throw BudgetExhausted("formula sampler found no usable task in " + std::to_string(config_.max_tries) +
                        " draws");
}

PretrainResult pretrain(const ltl::Alphabet& alphabet, const FormulaSampler& sampler,
                        const PretrainConfig& config) {
  if (!(sampler.alphabet() == alphabet)) throw ConfigInvalid("pretrain.alphabet", "sampler alphabet differs");
  const TrainConfig& tc = config.train;
  const int cap = tc.max_steps > 0 ? tc.max_steps : env::SingleStateMdp(alphabet).default_step_cap();
  return pretrain(alphabet, TaskSource([&sampler, cap](nn::Rng& rng) { return sampler.sample(rng, cap); }),
                  config);
}

PretrainResult pretrain(const ltl::Alphabet& alphabet, const TaskSource& source,
                        const PretrainConfig& config) {
  config.train.validate();
  if (config.window < 1) throw ConfigInvalid("pretrain.window", "must be positive");
  if (!(config.threshold > 0.0 && config.threshold <= 1.0)) {
    throw ConfigInvalid("pretrain.threshold", "must lie in (0, 1]");
  }
  const TrainConfig& tc = config.train;
  const int cap = tc.max_steps > 0 ? tc.max_steps : env::SingleStateMdp(alphabet).default_step_cap();

  PretrainResult result;
  result.agent = std::make_unique<QAgent>(nn::Vocab(alphabet), 0, static_cast<int>(alphabet.size()),
                                          tc.network, tc.seed, tc.target_sync);
  nn::Rng rng(tc.seed ^ 0x9E3779B97F4A7C15ULL);
  nn::Rng task_rng(tc.seed ^ 0xD1B54A32D192ED03ULL);
  NeuralLearner learner(*result.agent, tc, rng);

  std::vector<char> outcomes;
  int wins = 0;
  for (int episode = 0; episode < tc.episodes; ++episode) {
    const ltl::Formula task = source(task_rng);
    auto tasks = std::make_shared<const ltl::TaskSet>(task, alphabet);
    tl::TlMdp mdp(std::make_unique<env::SingleStateMdp>(alphabet, cap), tasks, cap);
    const double eps = tc.epsilon.at(episode, tc.episodes);
    tl::TlState s = learner.begin_episode(mdp, tc.seed);
    int ret = 0;
    while (!s.done) {
      const tl::TlTransition t = learner.collect_step(mdp, eps);
      learner.maybe_update(mdp.environment());
      ret += t.reward;
      s = t.to;
    }
    const bool success = ret > 0;
    outcomes.push_back(success ? 1 : 0);
    wins += success ? 1 : 0;
    if (static_cast<int>(outcomes.size()) > config.window) {
      wins -= outcomes[outcomes.size() - 1 - static_cast<std::size_t>(config.window)];
    }
    const int n = std::min(static_cast<int>(outcomes.size()), config.window);
    const double rolling = static_cast<double>(wins) / n;
    result.curve.push_back({episode, success, rolling});
    result.episodes = episode + 1;
    if (n == config.window && rolling >= config.threshold) {
      result.converged = true;
      break;
    }
  }
  return result;
}

}  // namespace t2tl::rl
