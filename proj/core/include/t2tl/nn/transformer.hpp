// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "t2tl/nn/params.hpp"

namespace t2tl::nn {

struct EncoderConfig {
  int layers = 2;
  int heads = 4;
  int d_model = 32;
  int d_ff = 64;
  int d_out = 16;  // pooled width: D_repr for formulas, D_ctx for context

  void validate() const;  // throws ConfigInvalid
};

// Sinusoidal table: even dims sin(pos / 10000^(2i/d)), odd dims the cosine.
Mat positional_embedding(int length, int d);

struct AttentionOutput {
  Mat weights;  // queries x keys
  Mat output;   // queries x value width
};

// softmax(Q K^T / sqrt(d_k)) V with masked key columns forced to weight 0.
// `key_valid` may be empty, meaning every key is valid.
AttentionOutput attention(const Mat& q, const Mat& k, const Mat& v,
                          const std::vector<char>& key_valid = {});

struct LayerNormCache {
  Mat xhat;
  Vec inv_std;
};

inline constexpr double kLayerNormEps = 1e-5;

Mat layer_norm(const Mat& x, const RowVec& gain, const RowVec& bias, LayerNormCache* cache);
// Returns dx and accumulates into the 1 x D matrices dgain / dbias.
Mat layer_norm_backward(const Mat& dy, const RowVec& gain, const LayerNormCache& cache,
                        Mat& dgain, Mat& dbias);

double gelu(double x);
double gelu_grad(double x);

// Pre-norm encoder layers plus a final LayerNorm.  Inputs are `batch`
// sequences of `seq` rows stacked into one (batch*seq) x D matrix;
// `valid[r]` marks rows that are real tokens rather than padding.
class TransformerStack {
 public:
  struct LayerCache {
    Mat x_in;
    LayerNormCache ln1;
    Mat h1, q, k, v, o;
    std::vector<Mat> attn;  // index b * heads + h, each seq x seq
    Mat x_mid;
    LayerNormCache ln2;
    Mat h2, u, g;
  };

  struct Cache {
    int batch = 0;
    int seq = 0;
    std::vector<char> valid;
    std::vector<LayerCache> layers;
    Mat x_last;
    LayerNormCache final_ln;
    bool filled = false;
  };

  TransformerStack(std::string prefix, EncoderConfig config);

  const std::string& prefix() const noexcept { return prefix_; }
  const EncoderConfig& config() const noexcept { return config_; }

  void init(ParamSet& params, Rng& rng) const;
  Mat forward(const ParamSet& params, const Mat& x0, int batch, int seq,
              const std::vector<char>& valid, Cache* cache) const;
  // Gradient w.r.t. the stack input; parameter gradients are accumulated.
  Mat backward(const ParamSet& params, const Cache& cache, const Mat& dy, ParamSet& grads) const;

  std::string name(int layer, const char* leaf) const;
  std::string name(const char* leaf) const;

 private:
  std::string prefix_;
  EncoderConfig config_;
};

}  // namespace t2tl::nn
