// SPDX-License-Identifier: Apache-2.0
#include "t2tl/rl/optimizer.hpp"

#include <cmath>

#include "t2tl/error.hpp"

namespace t2tl::rl {

void Sgd::step(nn::ParamSet& params, const nn::ParamSet& grads) {
  for (std::size_t i = 0; i < params.size(); ++i) params[i].value -= lr_ * grads[i].value;
}

void Momentum::step(nn::ParamSet& params, const nn::ParamSet& grads) {
  if (velocity_.size() == 0) velocity_ = params.zeros_like();
  for (std::size_t i = 0; i < params.size(); ++i) {
    velocity_[i].value = mu_ * velocity_[i].value + grads[i].value;
    params[i].value -= lr_ * velocity_[i].value;
  }
}

void Adam::step(nn::ParamSet& params, const nn::ParamSet& grads) {
  if (m_.size() == 0) {
    m_ = params.zeros_like();
    v_ = params.zeros_like();
  }
  ++steps_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(steps_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(steps_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    const nn::Mat& g = grads[i].value;
    m_[i].value = beta1_ * m_[i].value + (1.0 - beta1_) * g;
    v_[i].value = beta2_ * v_[i].value + (1.0 - beta2_) * g.cwiseProduct(g);
    params[i].value.array() -=
        lr_ * (m_[i].value.array() / c1) / ((v_[i].value.array() / c2).sqrt() + eps_);
  }
}

std::unique_ptr<Optimizer> make_optimizer(const TrainConfig& c) {
  switch (c.optimizer) {
    case OptimizerKind::Sgd: return std::make_unique<Sgd>(c.alpha);
    case OptimizerKind::Momentum: return std::make_unique<Momentum>(c.alpha, c.momentum);
    case OptimizerKind::Adam: return std::make_unique<Adam>(c.alpha);
  }
  throw ConfigInvalid("optimizer", "unknown optimizer");
}

double clip_global_norm(nn::ParamSet& grads, double max_norm) {
  double sq = 0.0;
  for (const auto& t : grads.tensors()) sq += t.value.squaredNorm();
  const double norm = std::sqrt(sq);
  if (max_norm > 0.0 && norm > max_norm) {
    const double s = max_norm / norm;
    for (std::size_t i = 0; i < grads.size(); ++i) grads[i].value *= s;
  }
  return norm;
}

}  // namespace t2tl::rl
