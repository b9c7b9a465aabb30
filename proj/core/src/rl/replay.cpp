// SPDX-License-Identifier: Apache-2.0
#include "t2tl/rl/replay.hpp"

#include <algorithm>

#include "t2tl/error.hpp"

namespace t2tl::rl {

ReplayBuffer::ReplayBuffer(std::size_t capacity, std::size_t window)
    : capacity_(capacity), step_capacity_(capacity + window) {
  if (capacity == 0) throw ConfigInvalid("buffer", "capacity must be positive");
  entries_.reserve(std::min<std::size_t>(capacity, 1 << 16));
}

std::int64_t ReplayBuffer::add_step(StepRecord record) {
  const std::int64_t index = next_step_++;
  const auto slot = static_cast<std::size_t>(index) % step_capacity_;
  if (slot < steps_.size()) {
    steps_[slot] = std::move(record);
  } else {
    steps_.push_back(std::move(record));
  }
  return index;
}

void ReplayBuffer::add(ReplayEntry entry) {
  if (entry.step < 0 || entry.step >= next_step_) throw Error("replay entry refers to an unknown step");
  if (entries_.size() < capacity_) {
    entries_.push_back(std::move(entry));
  } else {
    entries_[head_] = std::move(entry);
    head_ = (head_ + 1) % capacity_;
  }
}

const ReplayEntry& ReplayBuffer::entry(std::size_t i) const {
  if (i >= entries_.size()) throw Error("replay index out of range");
  return entries_[(head_ + i) % entries_.size()];
}

const StepRecord& ReplayBuffer::step(std::int64_t index) const {
  if (index < 0 || index >= next_step_ ||
      next_step_ - index > static_cast<std::int64_t>(step_capacity_)) {
    throw Error("step record evicted or never stored");
  }
  return steps_[static_cast<std::size_t>(index) % step_capacity_];
}

std::vector<std::size_t> ReplayBuffer::sample(std::size_t n, nn::Rng& rng) const {
  if (entries_.empty()) throw EmptyBatch("sampling from an empty replay buffer");
  std::uniform_int_distribution<std::size_t> pick(0, entries_.size() - 1);
  std::vector<std::size_t> out(n);
  for (auto& i : out) i = pick(rng);
  return out;
}

void write_context_record(nn::Mat& out, Eigen::Index row, const std::vector<double>& features,
                          int action, int action_count, double reward) {
  const auto f = static_cast<Eigen::Index>(features.size());
  out.row(row).setZero();
  for (Eigen::Index i = 0; i < f; ++i) out(row, i) = features[static_cast<std::size_t>(i)];
  out(row, f + action) = 1.0;
  out(row, f + action_count) = reward;
}

nn::Mat ReplayBuffer::window_records(std::int64_t index, const env::Environment& env,
                                     int window) const {
  const int a = env.action_count();
  const auto f = static_cast<Eigen::Index>(env.feature_size());
  nn::Mat out = nn::Mat::Zero(window, f + a + 1);
  const StepRecord& here = step(index);
  const std::int64_t first = std::max(here.episode_start, index - window);
  for (std::int64_t k = first; k < index; ++k) {
    const StepRecord& r = step(k);
    const auto row = static_cast<Eigen::Index>(window - (index - k));
    write_context_record(out, row, env.features(r.state), r.action, a, r.reward);
  }
  return out;
}

}  // namespace t2tl::rl
