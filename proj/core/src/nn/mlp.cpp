// SPDX-License-Identifier: Apache-2.0
#include "t2tl/nn/mlp.hpp"

#include <cmath>

#include "t2tl/error.hpp"

namespace t2tl::nn {

Mlp::Mlp(std::string prefix, int input, std::vector<int> hidden, int output)
    : prefix_(std::move(prefix)), input_(input), hidden_(std::move(hidden)), output_(output) {
  if (input_ < 1 || output_ < 1) throw ConfigInvalid("qnet", "input and output must be positive");
  for (int h : hidden_) {
    if (h < 1) throw ConfigInvalid("qnet.hidden", "layer widths must be positive");
  }
}

std::string Mlp::weight(std::size_t layer) const { return prefix_ + ".w" + std::to_string(layer); }
std::string Mlp::bias(std::size_t layer) const { return prefix_ + ".b" + std::to_string(layer); }

void Mlp::init(ParamSet& params, Rng& rng) const {
  int fan_in = input_;
  for (std::size_t l = 0; l <= hidden_.size(); ++l) {
    const int fan_out = l < hidden_.size() ? hidden_[l] : output_;
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    params.add(weight(l), uniform_matrix(rng, fan_in, fan_out, bound));
    params.add(bias(l), Mat::Zero(1, fan_out));
    fan_in = fan_out;
  }
}

Mat Mlp::forward(const ParamSet& p, const Mat& x, Cache* cache) const {
  if (x.cols() != input_) {
    throw ShapeMismatch("network input has width " + std::to_string(x.cols()) + ", expected " +
                        std::to_string(input_));
  }
  if (cache) {
    cache->inputs.clear();
    cache->pre.clear();
  }
  Mat a = x;
  for (std::size_t l = 0; l <= hidden_.size(); ++l) {
    if (cache) cache->inputs.push_back(a);
    Mat z = (a * p.at(weight(l))).rowwise() + p.at(bias(l)).row(0);
    if (l == hidden_.size()) {
      if (cache) cache->filled = true;
      return z;
    }
    a = z.cwiseMax(0.0);
    if (cache) cache->pre.push_back(std::move(z));
  }
  return a;
}

Mat Mlp::backward(const ParamSet& p, const Cache& c, const Mat& d_out, ParamSet& grads) const {
  if (!c.filled) throw MissingCache("network backward called without a forward cache");
  Mat d = d_out;
  for (std::size_t l = hidden_.size() + 1; l-- > 0;) {
    grads.at(weight(l)) += c.inputs[l].transpose() * d;
    grads.at(bias(l)).row(0) += d.colwise().sum();
    d = d * p.at(weight(l)).transpose();
    if (l > 0) d = d.cwiseProduct((c.pre[l - 1].array() > 0.0).cast<double>().matrix());
  }
  return d;
}

}  // namespace t2tl::nn
