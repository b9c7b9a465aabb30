// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "t2tl/nn/params.hpp"

namespace t2tl::nn {

// Fully connected ReLU network with a linear output layer.
class Mlp {
 public:
  struct Cache {
    std::vector<Mat> inputs;  // input of each layer
    std::vector<Mat> pre;     // pre-activation of each hidden layer
    bool filled = false;
  };

  Mlp(std::string prefix, int input, std::vector<int> hidden, int output);

  int input_size() const noexcept { return input_; }
  int output_size() const noexcept { return output_; }
  const std::vector<int>& hidden() const noexcept { return hidden_; }

  void init(ParamSet& params, Rng& rng) const;
  Mat forward(const ParamSet& params, const Mat& x, Cache* cache) const;
  // Returns the input gradient; parameter gradients are accumulated.
  Mat backward(const ParamSet& params, const Cache& cache, const Mat& d_out, ParamSet& grads) const;

 private:
  std::string weight(std::size_t layer) const;
  std::string bias(std::size_t layer) const;

  std::string prefix_;
  int input_;
  std::vector<int> hidden_;
  int output_;
};

}  // namespace t2tl::nn
