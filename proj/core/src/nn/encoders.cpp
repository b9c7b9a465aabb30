// SPDX-License-Identifier: Apache-2.0
#include "t2tl/nn/encoders.hpp"

#include <algorithm>
#include <cmath>

#include "t2tl/error.hpp"

namespace t2tl::nn {

FormulaEncoder::FormulaEncoder(Vocab vocab, EncoderConfig config, std::string prefix)
    : vocab_(std::move(vocab)), prefix_(prefix), stack_(prefix, config) {}

void FormulaEncoder::init(ParamSet& params, Rng& rng) const {
  const auto& c = config();
  params.add(prefix_ + ".embedding", normal_matrix(rng, vocab_.size(), c.d_model, 0.02));
  stack_.init(params, rng);
  params.add(prefix_ + ".pool", uniform_matrix(rng, c.d_model, c.d_out,
                                               1.0 / std::sqrt(static_cast<double>(c.d_model))));
}

Mat FormulaEncoder::forward(const ParamSet& p, const std::vector<std::vector<int>>& ids,
                            Cache* cache) const {
  if (ids.empty()) throw EmptyBatch("formula encoder called with no sequences");
  const int d = config().d_model;
  std::size_t seq = 0;
  for (const auto& s : ids) {
    if (s.empty() || s.front() != kAggId) throw ShapeMismatch("sequence must start with [AGG]");
    seq = std::max(seq, s.size());
  }
  const int batch = static_cast<int>(ids.size());
  const int t = static_cast<int>(seq);
  const Mat& emb = p.at(prefix_ + ".embedding");
  if (emb.rows() != vocab_.size() || emb.cols() != d) {
    throw ShapeMismatch("embedding table does not match the vocabulary");
  }
  const Mat pe = positional_embedding(t, d);
  Mat x0(batch * t, d);
  std::vector<char> valid(static_cast<std::size_t>(batch * t), 0);
  for (int b = 0; b < batch; ++b) {
    const auto& s = ids[static_cast<std::size_t>(b)];
    for (int i = 0; i < t; ++i) {
      const int id = i < static_cast<int>(s.size()) ? s[static_cast<std::size_t>(i)] : kPadId;
      if (id < 0 || id >= vocab_.size()) throw UnknownToken("token id out of range");
      x0.row(b * t + i) = emb.row(id) + pe.row(i);
      valid[static_cast<std::size_t>(b * t + i)] = i < static_cast<int>(s.size());
    }
  }
  Cache local;
  Cache& c = cache ? *cache : local;
  c.ids = ids;
  c.seq = t;
  c.y = stack_.forward(p, x0, batch, t, valid, &c.stack);
  Mat agg(batch, d);
  for (int b = 0; b < batch; ++b) agg.row(b) = c.y.row(b * t);
  return agg * p.at(prefix_ + ".pool");
}

void FormulaEncoder::backward(const ParamSet& p, const Cache& c, const Mat& d_pooled,
                              ParamSet& grads) const {
  if (!c.stack.filled) throw MissingCache("formula encoder backward without forward cache");
  const int batch = static_cast<int>(c.ids.size());
  const int t = c.seq;
  const int d = config().d_model;
  if (d_pooled.rows() != batch || d_pooled.cols() != config().d_out) {
    throw ShapeMismatch("pooled gradient shape does not match the batch");
  }
  Mat agg(batch, d);
  for (int b = 0; b < batch; ++b) agg.row(b) = c.y.row(b * t);
  grads.at(prefix_ + ".pool") += agg.transpose() * d_pooled;
  const Mat d_agg = d_pooled * p.at(prefix_ + ".pool").transpose();
  Mat dy = Mat::Zero(batch * t, d);
  for (int b = 0; b < batch; ++b) dy.row(b * t) = d_agg.row(b);
  const Mat dx0 = stack_.backward(p, c.stack, dy, grads);
  Mat& demb = grads.at(prefix_ + ".embedding");
  for (int b = 0; b < batch; ++b) {
    const auto& s = c.ids[static_cast<std::size_t>(b)];
    for (std::size_t i = 0; i < s.size(); ++i) demb.row(s[i]) += dx0.row(b * t + static_cast<int>(i));
  }
}

AttentionMap FormulaEncoder::attention_map(const Cache& c, int sequence) const {
  if (!c.stack.filled) throw MissingCache("attention map requested without a forward cache");
  const auto& s = c.ids.at(static_cast<std::size_t>(sequence));
  const int n = static_cast<int>(s.size());
  AttentionMap out;
  out.layers = config().layers;
  out.heads = config().heads;
  out.ids = s;
  for (int l = 0; l < out.layers; ++l) {
    for (int h = 0; h < out.heads; ++h) {
      const Mat& a = c.stack.layers[static_cast<std::size_t>(l)]
                         .attn[static_cast<std::size_t>(sequence * out.heads + h)];
      out.maps.push_back(a.topLeftCorner(n, n));
    }
  }
  return out;
}

ContextWindow::ContextWindow(int length, int feature_size, int action_count)
    : length_(length), feature_size_(feature_size), action_count_(action_count) {
  if (length_ < 1) throw ConfigInvalid("context.window", "must be at least 1");
  records_ = Mat::Zero(length_, record_size());
}

void ContextWindow::clear() {
  records_.setZero();
  filled_ = 0;
}

void ContextWindow::push(const std::vector<double>& features, int action, double reward) {
  if (static_cast<int>(features.size()) != feature_size_) {
    throw ShapeMismatch("context record has " + std::to_string(features.size()) +
                        " features, expected " + std::to_string(feature_size_));
  }
  if (action < 0 || action >= action_count_) throw ShapeMismatch("context action out of range");
  if (length_ > 1) {
    records_.topRows(length_ - 1) = records_.bottomRows(length_ - 1).eval();
  }
  auto row = records_.row(length_ - 1);
  row.setZero();
  for (int i = 0; i < feature_size_; ++i) row(i) = features[static_cast<std::size_t>(i)];
  row(feature_size_ + action) = 1.0;
  row(feature_size_ + action_count_) = reward;
  filled_ = std::min(filled_ + 1, length_);
}

ContextEncoder::ContextEncoder(int window, int record_size, EncoderConfig config, std::string prefix)
    : window_(window), record_size_(record_size), prefix_(prefix), stack_(prefix, config) {
  if (window_ < 1) throw ConfigInvalid("context.window", "must be at least 1");
}

void ContextEncoder::init(ParamSet& params, Rng& rng) const {
  const auto& c = config();
  params.add(prefix_ + ".record_proj",
             uniform_matrix(rng, record_size_, c.d_model,
                            1.0 / std::sqrt(static_cast<double>(std::max(record_size_, 1)))));
  params.add(prefix_ + ".record_bias", Mat::Zero(1, c.d_model));
  stack_.init(params, rng);
  params.add(prefix_ + ".pool", uniform_matrix(rng, c.d_model, c.d_out,
                                               1.0 / std::sqrt(static_cast<double>(c.d_model))));
}

Mat ContextEncoder::forward(const ParamSet& p, const Mat& records, Cache* cache) const {
  if (records.rows() == 0) throw EmptyBatch("context encoder called with no windows");
  if (records.cols() != record_size_ || records.rows() % window_ != 0) {
    throw ShapeMismatch("context records must be (B * " + std::to_string(window_) + ") x " +
                        std::to_string(record_size_));
  }
  const int batch = static_cast<int>(records.rows() / window_);
  const int d = config().d_model;
  const Mat pe = positional_embedding(window_, d);
  Mat x0 = (records * p.at(prefix_ + ".record_proj")).rowwise() + p.at(prefix_ + ".record_bias").row(0);
  for (int b = 0; b < batch; ++b) x0.middleRows(b * window_, window_) += pe;
  Cache local;
  Cache& c = cache ? *cache : local;
  c.batch = batch;
  c.records = records;
  c.y = stack_.forward(p, x0, batch, window_, std::vector<char>(static_cast<std::size_t>(records.rows()), 1),
                       &c.stack);
  Mat mean(batch, d);
  for (int b = 0; b < batch; ++b) mean.row(b) = c.y.middleRows(b * window_, window_).colwise().mean();
  return mean * p.at(prefix_ + ".pool");
}

void ContextEncoder::backward(const ParamSet& p, const Cache& c, const Mat& d_pooled,
                              ParamSet& grads) const {
  if (!c.stack.filled) throw MissingCache("context encoder backward without forward cache");
  const int d = config().d_model;
  if (d_pooled.rows() != c.batch || d_pooled.cols() != config().d_out) {
    throw ShapeMismatch("pooled gradient shape does not match the batch");
  }
  Mat mean(c.batch, d);
  for (int b = 0; b < c.batch; ++b) mean.row(b) = c.y.middleRows(b * window_, window_).colwise().mean();
  grads.at(prefix_ + ".pool") += mean.transpose() * d_pooled;
  const Mat d_mean = d_pooled * p.at(prefix_ + ".pool").transpose();
  Mat dy(c.batch * window_, d);
  for (int b = 0; b < c.batch; ++b) {
    dy.middleRows(b * window_, window_) = d_mean.row(b).replicate(window_, 1) / window_;
  }
  const Mat dx0 = stack_.backward(p, c.stack, dy, grads);
  grads.at(prefix_ + ".record_proj") += c.records.transpose() * dx0;
  grads.at(prefix_ + ".record_bias").row(0) += dx0.colwise().sum();
}

}  // namespace t2tl::nn
