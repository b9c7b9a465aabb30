// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "t2tl/nn/transformer.hpp"

namespace t2tl::rl {

enum class UpdateMode { Simultaneous, Single };
enum class LearnerKind { Tabular, Neural };
enum class OptimizerKind { Sgd, Momentum, Adam };

struct EpsilonSchedule {
  double start = 1.0;
  double end = 0.05;
  double decay_fraction = 0.3;  // of the episode budget; used when decay_episodes == 0
  int decay_episodes = 0;

  // Linear from start to end, then flat.
  double at(int episode, int total_episodes) const;
};

struct NetworkConfig {
  nn::EncoderConfig formula{};   // d_out is D_repr
  bool context = false;
  int window = 8;
  nn::EncoderConfig context_encoder{};  // d_out is D_ctx
  std::vector<int> hidden{64, 64};
};

struct TrainConfig {
  LearnerKind learner = LearnerKind::Neural;
  UpdateMode update = UpdateMode::Simultaneous;
  int episodes = 1000;       // T_max
  int max_steps = 0;         // t_max; 0 uses the environment default
  double gamma = 0.9;
  double alpha = 1e-3;       // learning rate (tabular step size in tabular mode)
  OptimizerKind optimizer = OptimizerKind::Sgd;
  double momentum = 0.9;
  double grad_clip = 0.0;    // global norm, 0 disables
  EpsilonSchedule epsilon{};
  int buffer = 50000;
  int batch = 64;
  int target_sync = 500;     // C, in updates
  int train_every = 1;       // env steps between updates
  int learning_starts = 64;  // replay entries before the first update
  int eval_every = 0;        // episodes between greedy evaluations, 0 disables
  int eval_episodes = 1;
  std::uint64_t seed = 1;
  NetworkConfig network{};

  void validate() const;  // throws ConfigInvalid
};

}  // namespace t2tl::rl
