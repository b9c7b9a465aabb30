// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "t2tl/ltl/formula.hpp"
#include "t2tl/nn/encoders.hpp"
#include "t2tl/nn/mlp.hpp"
#include "t2tl/rl/config.hpp"
#include "t2tl/rl/optimizer.hpp"

namespace t2tl::rl {

// Lowest action id among the maxima.
int greedy_action(const nn::RowVec& q);

// One uniform draw decides exploration; a second draw picks the action only
// when exploring.
int act_epsilon_greedy(const nn::RowVec& q, double epsilon, nn::Rng& rng);

// r + gamma * q_target_next[argmax q_online_next], or r without bootstrap.
double double_q_target(double reward, double gamma, const nn::RowVec& q_online_next,
                       const nn::RowVec& q_target_next, bool bootstrap);

// Materialised minibatch.  Rows align across all members.
struct TdBatch {
  nn::Mat features;                                   // B x F
  std::vector<ltl::Formula> formulas;
  std::vector<int> actions;
  std::vector<double> rewards;
  nn::Mat next_features;                              // B x F
  std::vector<std::optional<ltl::Formula>> next;      // empty: no bootstrap
  nn::Mat windows;                                    // (B * W) x R; empty without context
  nn::Mat next_context;                               // B x D_ctx; empty without context

  std::size_t size() const noexcept { return formulas.size(); }
};

struct TdResult {
  double loss = 0.0;
  double grad_norm = 0.0;
  std::vector<double> targets;
};

// Q-network over concat(features, pooled formula representation, z) with a
// lagged target copy.  All trainable tensors (formula encoder, context
// encoder, head) live in one ParamSet so a single optimizer step covers them.
class QAgent {
 public:
  QAgent(nn::Vocab vocab, int feature_size, int action_count, NetworkConfig config,
         std::uint64_t seed, int target_sync = 500);

  const nn::Vocab& vocab() const noexcept { return encoder_.vocab(); }
  int feature_size() const noexcept { return feature_size_; }
  int action_count() const noexcept { return action_count_; }
  const NetworkConfig& config() const noexcept { return config_; }
  bool has_context() const noexcept { return context_.has_value(); }
  int context_size() const noexcept { return context_ ? context_->config().d_out : 0; }
  const nn::FormulaEncoder& encoder() const noexcept { return encoder_; }
  const nn::ContextEncoder* context_encoder() const noexcept { return context_ ? &*context_ : nullptr; }
  const nn::Mlp& head() const noexcept { return head_; }

  nn::ParamSet& online() noexcept { return online_; }
  const nn::ParamSet& online() const noexcept { return online_; }
  const nn::ParamSet& target() const noexcept { return target_; }
  const nn::ParamSet& last_gradients() const noexcept { return grads_; }
  void sync_target() { target_.assign(online_); }
  long updates() const noexcept { return updates_; }
  int target_sync() const noexcept { return target_sync_; }

  // B x D_repr representations under the given parameters.
  nn::Mat encode(const nn::ParamSet& params, const std::vector<ltl::Formula>& formulas) const;
  // z for one window (length x record_size) under the online parameters.
  nn::RowVec context(const nn::Mat& window) const;
  // Online Q-values for one state.  `z` is ignored without context.
  nn::RowVec q_values(const std::vector<double>& features, const ltl::Formula& formula,
                      const nn::RowVec& z = {}) const;
  // Q-values for explicit rows of (features, representation, z).
  nn::Mat q_rows(const nn::ParamSet& params, const nn::Mat& features, const nn::Mat& repr,
                 const nn::Mat& z) const;

  // One double-DQN step on the batch: targets from the online argmax and the
  // target-network value, mean squared TD error, gradients through the head
  // into both encoders, one optimizer step, then the periodic target sync.
  TdResult td_update(const TdBatch& batch, double gamma, Optimizer& optimizer, double grad_clip = 0.0);

 private:
  nn::Mat head_input(const nn::Mat& features, const nn::Mat& repr, const nn::Mat& z) const;

  int feature_size_;
  int action_count_;
  NetworkConfig config_;
  nn::FormulaEncoder encoder_;
  std::optional<nn::ContextEncoder> context_;
  nn::Mlp head_;
  nn::ParamSet online_;
  nn::ParamSet target_;
  nn::ParamSet grads_;
  int target_sync_;
  long updates_ = 0;
};

}  // namespace t2tl::rl
