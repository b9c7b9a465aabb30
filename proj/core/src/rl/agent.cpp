// SPDX-License-Identifier: Apache-2.0
#include "t2tl/rl/agent.hpp"

#include <map>

#include "t2tl/error.hpp"
#include "t2tl/nn/vocab.hpp"

namespace t2tl::rl {

int greedy_action(const nn::RowVec& q) {
  if (q.size() == 0) throw ShapeMismatch("no actions to choose from");
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < q.size(); ++i) {
    if (q(i) > q(best)) best = i;
  }
  return static_cast<int>(best);
}

int act_epsilon_greedy(const nn::RowVec& q, double epsilon, nn::Rng& rng) {
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  if (coin(rng) < epsilon) {
    std::uniform_int_distribution<int> pick(0, static_cast<int>(q.size()) - 1);
    return pick(rng);
  }
  return greedy_action(q);
}

double double_q_target(double reward, double gamma, const nn::RowVec& q_online_next,
                       const nn::RowVec& q_target_next, bool bootstrap) {
  if (!bootstrap) return reward;
  return reward + gamma * q_target_next(greedy_action(q_online_next));
}

namespace {

int head_input_size(int features, const NetworkConfig& c) {
  return features + c.formula.d_out + (c.context ? c.context_encoder.d_out : 0);
}

}  // namespace

QAgent::QAgent(nn::Vocab vocab, int feature_size, int action_count, NetworkConfig config,
               std::uint64_t seed, int target_sync)
    : feature_size_(feature_size),
      action_count_(action_count),
      config_(std::move(config)),
      encoder_(std::move(vocab), config_.formula, "formula"),
      head_("qnet", head_input_size(feature_size, config_), config_.hidden, action_count),
      target_sync_(target_sync) {
  if (action_count < 1) throw ConfigInvalid("actions", "environment has no actions");
  if (target_sync < 1) throw ConfigInvalid("target_sync", "must be positive");
  if (config_.context) {
    context_.emplace(config_.window, feature_size + action_count + 1, config_.context_encoder,
                     "context");
  }
  nn::Rng rng(seed);
  encoder_.init(online_, rng);
  if (context_) context_->init(online_, rng);
  head_.init(online_, rng);
  target_ = online_;
  grads_ = online_.zeros_like();
}

nn::Mat QAgent::encode(const nn::ParamSet& params, const std::vector<ltl::Formula>& formulas) const {
  std::vector<std::vector<int>> ids;
  ids.reserve(formulas.size());
  for (const auto& f : formulas) ids.push_back(nn::tokenize_formula(f, vocab()));
  return encoder_.forward(params, ids, nullptr);
}

nn::RowVec QAgent::context(const nn::Mat& window) const {
  if (!context_) return {};
  return context_->forward(online_, window, nullptr).row(0);
}

nn::Mat QAgent::head_input(const nn::Mat& features, const nn::Mat& repr, const nn::Mat& z) const {
  const Eigen::Index b = repr.rows();
  if (features.rows() != b || features.cols() != feature_size_) {
    throw ShapeMismatch("feature rows do not match the network input");
  }
  const int dz = context_size();
  if (dz > 0 && (z.rows() != b || z.cols() != dz)) throw ShapeMismatch("context rows missing");
  nn::Mat x(b, head_.input_size());
  x.leftCols(feature_size_) = features;
  x.middleCols(feature_size_, repr.cols()) = repr;
  if (dz > 0) x.rightCols(dz) = z;
  return x;
}

nn::Mat QAgent::q_rows(const nn::ParamSet& params, const nn::Mat& features, const nn::Mat& repr,
                       const nn::Mat& z) const {
  return head_.forward(params, head_input(features, repr, z), nullptr);
}

nn::RowVec QAgent::q_values(const std::vector<double>& features, const ltl::Formula& formula,
                            const nn::RowVec& z) const {
  nn::Mat f(1, feature_size_);
  if (static_cast<int>(features.size()) != feature_size_) throw ShapeMismatch("feature size mismatch");
  for (int i = 0; i < feature_size_; ++i) f(0, i) = features[static_cast<std::size_t>(i)];
  nn::Mat zm;
  if (has_context()) {
    if (z.size() != context_size()) throw ShapeMismatch("context vector missing");
    zm = z;
  }
  return q_rows(online_, f, encode(online_, {formula}), zm).row(0);
}

TdResult QAgent::td_update(const TdBatch& batch, double gamma, Optimizer& optimizer,
                           double grad_clip) {
  const auto b = static_cast<Eigen::Index>(batch.size());
  if (b == 0) throw EmptyBatch("td_update called with an empty batch");
  if (batch.actions.size() != batch.size() || batch.rewards.size() != batch.size() ||
      batch.next.size() != batch.size()) {
    throw ShapeMismatch("batch members disagree in length");
  }

  // Each distinct formula is encoded once; current formulas keep a cache for
  // the backward pass.
  std::map<std::string, int> slot;
  std::vector<std::vector<int>> ids;
  auto intern = [&](const ltl::Formula& f) {
    auto [it, fresh] = slot.emplace(f.key(), static_cast<int>(ids.size()));
    if (fresh) ids.push_back(nn::tokenize_formula(f, vocab()));
    return it->second;
  };
  std::vector<int> cur(batch.size());
  for (std::size_t j = 0; j < batch.size(); ++j) cur[j] = intern(batch.formulas[j]);
  const int n_cur = static_cast<int>(ids.size());
  std::vector<int> nxt(batch.size(), -1);
  for (std::size_t j = 0; j < batch.size(); ++j) {
    if (batch.next[j]) nxt[j] = intern(*batch.next[j]);
  }

  nn::FormulaEncoder::Cache enc_cache;
  const std::vector<std::vector<int>> cur_ids(ids.begin(), ids.begin() + n_cur);
  const nn::Mat repr_cur = encoder_.forward(online_, cur_ids, &enc_cache);

  nn::ContextEncoder::Cache ctx_cache;
  nn::Mat z;
  if (context_) {
    if (batch.windows.rows() != b * context_->window()) throw ShapeMismatch("context windows missing");
    z = context_->forward(online_, batch.windows, &ctx_cache);
  }

  nn::Mat x(b, config_.formula.d_out);
  for (Eigen::Index j = 0; j < b; ++j) x.row(j) = repr_cur.row(cur[static_cast<std::size_t>(j)]);
  nn::Mlp::Cache head_cache;
  const nn::Mat q = head_.forward(online_, head_input(batch.features, x, z), &head_cache);

  // Bootstrapped rows.
  std::vector<Eigen::Index> boot;
  for (std::size_t j = 0; j < batch.size(); ++j) {
    if (nxt[j] >= 0) boot.push_back(static_cast<Eigen::Index>(j));
  }
  nn::Mat q_on_next, q_tg_next;
  if (!boot.empty()) {
    const auto nb = static_cast<Eigen::Index>(boot.size());
    const nn::Mat repr_on = encoder_.forward(online_, ids, nullptr);
    const nn::Mat repr_tg = encoder_.forward(target_, ids, nullptr);
    nn::Mat f(nb, feature_size_), r_on(nb, repr_on.cols()), r_tg(nb, repr_tg.cols()), zn;
    if (context_) zn.resize(nb, context_size());
    for (Eigen::Index i = 0; i < nb; ++i) {
      const Eigen::Index j = boot[static_cast<std::size_t>(i)];
      f.row(i) = batch.next_features.row(j);
      r_on.row(i) = repr_on.row(nxt[static_cast<std::size_t>(j)]);
      r_tg.row(i) = repr_tg.row(nxt[static_cast<std::size_t>(j)]);
      if (context_) zn.row(i) = batch.next_context.row(j);
    }
    q_on_next = q_rows(online_, f, r_on, zn);
    q_tg_next = q_rows(target_, f, r_tg, zn);
  }

  TdResult result;
  result.targets.resize(batch.size());
  nn::Mat dq = nn::Mat::Zero(b, action_count_);
  std::size_t k = 0;
  for (Eigen::Index j = 0; j < b; ++j) {
    const auto ju = static_cast<std::size_t>(j);
    const int a = batch.actions[ju];
    if (a < 0 || a >= action_count_) throw InvalidAction("action " + std::to_string(a) + " out of range");
    double y = batch.rewards[ju];
    if (nxt[ju] >= 0) {
      const auto i = static_cast<Eigen::Index>(k++);
      y = double_q_target(batch.rewards[ju], gamma, q_on_next.row(i), q_tg_next.row(i), true);
    }
    result.targets[ju] = y;
    const double err = q(j, a) - y;
    result.loss += err * err;
    dq(j, a) = 2.0 * err / static_cast<double>(b);
  }
  result.loss /= static_cast<double>(b);

  grads_.set_zero();
  const nn::Mat dx = head_.backward(online_, head_cache, dq, grads_);
  nn::Mat d_repr = nn::Mat::Zero(n_cur, config_.formula.d_out);
  for (Eigen::Index j = 0; j < b; ++j) {
    d_repr.row(cur[static_cast<std::size_t>(j)]) += dx.block(j, feature_size_, 1, config_.formula.d_out);
  }
  encoder_.backward(online_, enc_cache, d_repr, grads_);
  if (context_) context_->backward(online_, ctx_cache, dx.rightCols(context_size()), grads_);

  result.grad_norm = clip_global_norm(grads_, grad_clip);
  optimizer.step(online_, grads_);
  ++updates_;
  if (updates_ % target_sync_ == 0) sync_target();
  return result;
}

}  // namespace t2tl::rl
