// SPDX-License-Identifier: Apache-2.0
#include "t2tl/nn/params.hpp"

#include "t2tl/error.hpp"

namespace t2tl::nn {

Mat& ParamSet::add(const std::string& name, Mat value) {
  if (contains(name)) throw Error("duplicate parameter '" + name + "'");
  index_.emplace(name, tensors_.size());
  tensors_.push_back({name, std::move(value)});
  return tensors_.back().value;
}

Mat& ParamSet::at(const std::string& name) {
  auto it = index_.find(name);
  if (it == index_.end()) throw Error("no parameter named '" + name + "'");
  return tensors_[it->second].value;
}

const Mat& ParamSet::at(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw Error("no parameter named '" + name + "'");
  return tensors_[it->second].value;
}

std::size_t ParamSet::scalar_count() const {
  std::size_t n = 0;
  for (const auto& t : tensors_) n += static_cast<std::size_t>(t.value.size());
  return n;
}

ParamSet ParamSet::zeros_like() const {
  ParamSet out;
  for (const auto& t : tensors_) out.add(t.name, Mat::Zero(t.value.rows(), t.value.cols()));
  return out;
}

void ParamSet::set_zero() {
  for (auto& t : tensors_) t.value.setZero();
}

bool ParamSet::same_layout(const ParamSet& other) const {
  if (other.size() != size()) return false;
  for (std::size_t i = 0; i < size(); ++i) {
    const auto& a = tensors_[i];
    const auto& b = other.tensors_[i];
    if (a.name != b.name || a.value.rows() != b.value.rows() || a.value.cols() != b.value.cols()) {
      return false;
    }
  }
  return true;
}

void ParamSet::assign(const ParamSet& other) {
  if (!same_layout(other)) throw ShapeMismatch("parameter sets differ in layout");
  for (std::size_t i = 0; i < size(); ++i) tensors_[i].value = other.tensors_[i].value;
}

bool ParamSet::all_finite() const {
  for (const auto& t : tensors_) {
    if (!t.value.allFinite()) return false;
  }
  return true;
}

Mat uniform_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols, double bound) {
  std::uniform_real_distribution<double> dist(-bound, bound);
  Mat m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = dist(rng);
  }
  return m;
}

Mat normal_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols, double stddev) {
  std::normal_distribution<double> dist(0.0, stddev);
  Mat m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = dist(rng);
  }
  return m;
}

}  // namespace t2tl::nn
