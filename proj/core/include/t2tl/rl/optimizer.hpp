// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <memory>

#include "t2tl/nn/params.hpp"
#include "t2tl/rl/config.hpp"

namespace t2tl::rl {

class Optimizer {
 public:
  virtual ~Optimizer() = default;
  // params -= update(grads).  `grads` must share the layout of `params`.
  virtual void step(nn::ParamSet& params, const nn::ParamSet& grads) = 0;
};

class Sgd : public Optimizer {
 public:
  explicit Sgd(double lr) : lr_(lr) {}
  void step(nn::ParamSet& params, const nn::ParamSet& grads) override;

 private:
  double lr_;
};

class Momentum : public Optimizer {
 public:
  Momentum(double lr, double mu) : lr_(lr), mu_(mu) {}
  void step(nn::ParamSet& params, const nn::ParamSet& grads) override;

 private:
  double lr_;
  double mu_;
  nn::ParamSet velocity_;
};

class Adam : public Optimizer {
 public:
  explicit Adam(double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
      : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}
  void step(nn::ParamSet& params, const nn::ParamSet& grads) override;

 private:
  double lr_, beta1_, beta2_, eps_;
  long steps_ = 0;
  nn::ParamSet m_, v_;
};

std::unique_ptr<Optimizer> make_optimizer(const TrainConfig& config);

// Scales grads in place so their global L2 norm is at most max_norm; returns
// the norm before scaling.
double clip_global_norm(nn::ParamSet& grads, double max_norm);

}  // namespace t2tl::rl
