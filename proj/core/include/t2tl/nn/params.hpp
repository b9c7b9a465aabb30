// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

namespace t2tl::nn {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using RowVec = Eigen::RowVectorXd;
using Rng = std::mt19937_64;

// Named parameter tensors in insertion order.  Vectors are stored as 1 x n
// matrices so every tensor has the same (rows, cols) shape description.
class ParamSet {
 public:
  struct Tensor {
    std::string name;
    Mat value;
  };

  Mat& add(const std::string& name, Mat value);
  bool contains(const std::string& name) const { return index_.count(name) != 0; }
  Mat& at(const std::string& name);
  const Mat& at(const std::string& name) const;

  std::size_t size() const noexcept { return tensors_.size(); }
  std::size_t scalar_count() const;
  Tensor& operator[](std::size_t i) { return tensors_[i]; }
  const Tensor& operator[](std::size_t i) const { return tensors_[i]; }
  const std::vector<Tensor>& tensors() const noexcept { return tensors_; }

  // Same names and shapes, all zeros.
  ParamSet zeros_like() const;
  void set_zero();
  // Copies values from a set with identical names and shapes.
  void assign(const ParamSet& other);
  bool same_layout(const ParamSet& other) const;
  bool all_finite() const;

 private:
  std::vector<Tensor> tensors_;
  std::unordered_map<std::string, std::size_t> index_;
};

Mat uniform_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols, double bound);
Mat normal_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols, double stddev);

}  // namespace t2tl::nn
