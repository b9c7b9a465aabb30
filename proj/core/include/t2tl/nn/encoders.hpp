// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <deque>
#include <string>
#include <vector>

#include "t2tl/nn/transformer.hpp"
#include "t2tl/nn/vocab.hpp"

namespace t2tl::nn {

// Per-layer, per-head attention weights of one sequence (valid rows and
// columns only, so padding never shows up).
struct AttentionMap {
  int layers = 0;
  int heads = 0;
  std::vector<int> ids;   // token ids of the sequence
  std::vector<Mat> maps;  // index layer * heads + head
  const Mat& at(int layer, int head) const {
    return maps[static_cast<std::size_t>(layer * heads + head)];
  }
};

// Embeds token sequences, runs the stack and pools the [AGG] row.
class FormulaEncoder {
 public:
  struct Cache {
    std::vector<std::vector<int>> ids;
    int seq = 0;
    TransformerStack::Cache stack;
    Mat y;
  };

  FormulaEncoder(Vocab vocab, EncoderConfig config, std::string prefix = "formula");

  const Vocab& vocab() const noexcept { return vocab_; }
  const EncoderConfig& config() const noexcept { return stack_.config(); }
  const std::string& prefix() const noexcept { return prefix_; }

  void init(ParamSet& params, Rng& rng) const;

  // Pooled B x d_out representations; sequences are right-padded to the
  // longest one.
  Mat forward(const ParamSet& params, const std::vector<std::vector<int>>& ids, Cache* cache) const;
  void backward(const ParamSet& params, const Cache& cache, const Mat& d_pooled, ParamSet& grads) const;

  AttentionMap attention_map(const Cache& cache, int sequence) const;

 private:
  Vocab vocab_;
  std::string prefix_;
  TransformerStack stack_;
};

// Fixed-length window of (features, action, reward) records, oldest first,
// zero-filled at episode start.
class ContextWindow {
 public:
  ContextWindow(int length, int feature_size, int action_count);

  void clear();
  void push(const std::vector<double>& features, int action, double reward);

  int length() const noexcept { return length_; }
  int record_size() const noexcept { return feature_size_ + action_count_ + 1; }
  int feature_size() const noexcept { return feature_size_; }
  int action_count() const noexcept { return action_count_; }
  // length x record_size, oldest record in row 0.
  const Mat& records() const noexcept { return records_; }
  int filled() const noexcept { return filled_; }

 private:
  int length_;
  int feature_size_;
  int action_count_;
  int filled_ = 0;
  Mat records_;
};

// Projects each record to d_model, adds positions, runs a separate stack and
// mean-pools the rows to d_out.
class ContextEncoder {
 public:
  struct Cache {
    int batch = 0;
    Mat records;
    TransformerStack::Cache stack;
    Mat y;
  };

  ContextEncoder(int window, int record_size, EncoderConfig config, std::string prefix = "context");

  int window() const noexcept { return window_; }
  int record_size() const noexcept { return record_size_; }
  const EncoderConfig& config() const noexcept { return stack_.config(); }

  void init(ParamSet& params, Rng& rng) const;
  // `records` stacks B windows: (B * window) x record_size.
  Mat forward(const ParamSet& params, const Mat& records, Cache* cache) const;
  void backward(const ParamSet& params, const Cache& cache, const Mat& d_pooled, ParamSet& grads) const;

 private:
  int window_;
  int record_size_;
  std::string prefix_;
  TransformerStack stack_;
};

}  // namespace t2tl::nn
