// SPDX-License-Identifier: Apache-2.0
#include "t2tl/nn/transformer.hpp"

#include <cmath>
#include <limits>

#include "t2tl/error.hpp"

namespace t2tl::nn {

void EncoderConfig::validate() const {
  if (layers < 1) throw ConfigInvalid("encoder.layers", "must be at least 1");
  if (heads < 1) throw ConfigInvalid("encoder.heads", "must be at least 1");
  if (d_model < 2 || d_model % 2 != 0) throw ConfigInvalid("encoder.d_model", "must be even");
  if (d_model % heads != 0) {
    throw ConfigInvalid("encoder.heads", "must divide d_model (" + std::to_string(d_model) + ")");
  }
  if (d_ff < 1) throw ConfigInvalid("encoder.d_ff", "must be positive");
  if (d_out < 1) throw ConfigInvalid("encoder.d_out", "must be positive");
}

Mat positional_embedding(int length, int d) {
  if (d % 2 != 0) throw ShapeMismatch("positional embedding width must be even");
  Mat pe(length, d);
  for (int pos = 0; pos < length; ++pos) {
    for (int i = 0; i < d / 2; ++i) {
      const double angle = pos / std::pow(10000.0, 2.0 * i / d);
      pe(pos, 2 * i) = std::sin(angle);
      pe(pos, 2 * i + 1) = std::cos(angle);
    }
  }
  return pe;
}

AttentionOutput attention(const Mat& q, const Mat& k, const Mat& v,
                          const std::vector<char>& key_valid) {
  if (q.cols() != k.cols()) throw ShapeMismatch("query and key widths differ");
  if (k.rows() != v.rows()) throw ShapeMismatch("key and value counts differ");
  if (!key_valid.empty() && static_cast<Eigen::Index>(key_valid.size()) != k.rows()) {
    throw ShapeMismatch("mask length differs from key count");
  }
  const double scale = 1.0 / std::sqrt(static_cast<double>(q.cols()));
  AttentionOutput out;
  out.weights = (q * k.transpose()) * scale;
  for (Eigen::Index r = 0; r < out.weights.rows(); ++r) {
    double top = -std::numeric_limits<double>::infinity();
    for (Eigen::Index c = 0; c < out.weights.cols(); ++c) {
      if (key_valid.empty() || key_valid[static_cast<std::size_t>(c)]) {
        top = std::max(top, out.weights(r, c));
      }
    }
    if (!std::isfinite(top)) throw ShapeMismatch("attention row has no valid key");
    double sum = 0.0;
    for (Eigen::Index c = 0; c < out.weights.cols(); ++c) {
      double e = 0.0;
      if (key_valid.empty() || key_valid[static_cast<std::size_t>(c)]) {
        e = std::exp(out.weights(r, c) - top);
      }
      out.weights(r, c) = e;
      sum += e;
    }
    out.weights.row(r) /= sum;
  }
  out.output = out.weights * v;
  return out;
}

Mat layer_norm(const Mat& x, const RowVec& gain, const RowVec& bias, LayerNormCache* cache) {
  const Eigen::Index d = x.cols();
  Vec mean = x.rowwise().mean();
  Mat centered = x.colwise() - mean;
  Vec var = centered.array().square().rowwise().sum() / static_cast<double>(d);
  Vec inv_std = (var.array() + kLayerNormEps).rsqrt();
  Mat xhat = centered.array().colwise() * inv_std.array();
  Mat y = (xhat.array().rowwise() * gain.array()).rowwise() + bias.array();
  if (cache) {
    cache->xhat = std::move(xhat);
    cache->inv_std = std::move(inv_std);
  }
  return y;
}

Mat layer_norm_backward(const Mat& dy, const RowVec& gain, const LayerNormCache& cache,
                        Mat& dgain, Mat& dbias) {
  const double d = static_cast<double>(dy.cols());
  dgain.row(0) += (dy.array() * cache.xhat.array()).colwise().sum().matrix();
  dbias.row(0) += dy.colwise().sum();
  Mat dxhat = dy.array().rowwise() * gain.array();
  Vec sum_dxhat = dxhat.rowwise().sum();
  Vec sum_dxhat_xhat = (dxhat.array() * cache.xhat.array()).rowwise().sum();
  Mat dx = (d * dxhat.array()).colwise() - sum_dxhat.array();
  dx -= (cache.xhat.array().colwise() * sum_dxhat_xhat.array()).matrix();
  dx = dx.array().colwise() * (cache.inv_std.array() / d);
  return dx;
}

double gelu(double x) { return 0.5 * x * (1.0 + std::erf(x / std::sqrt(2.0))); }

double gelu_grad(double x) {
  constexpr double kInvSqrt2Pi = 0.3989422804014327;
  return 0.5 * (1.0 + std::erf(x / std::sqrt(2.0))) + x * kInvSqrt2Pi * std::exp(-0.5 * x * x);
}

TransformerStack::TransformerStack(std::string prefix, EncoderConfig config)
    : prefix_(std::move(prefix)), config_(config) {
  config_.validate();
}

std::string TransformerStack::name(int layer, const char* leaf) const {
  return prefix_ + ".layer" + std::to_string(layer) + "." + leaf;
}

std::string TransformerStack::name(const char* leaf) const { return prefix_ + "." + leaf; }

void TransformerStack::init(ParamSet& params, Rng& rng) const {
  const int d = config_.d_model;
  const double bound = 1.0 / std::sqrt(static_cast<double>(d));
  for (int l = 0; l < config_.layers; ++l) {
    params.add(name(l, "ln1.gain"), Mat::Ones(1, d));
    params.add(name(l, "ln1.bias"), Mat::Zero(1, d));
    params.add(name(l, "attn.wq"), uniform_matrix(rng, d, d, bound));
    params.add(name(l, "attn.wk"), uniform_matrix(rng, d, d, bound));
    params.add(name(l, "attn.wv"), uniform_matrix(rng, d, d, bound));
    params.add(name(l, "attn.wo"), uniform_matrix(rng, d, d, bound));
    params.add(name(l, "ln2.gain"), Mat::Ones(1, d));
    params.add(name(l, "ln2.bias"), Mat::Zero(1, d));
    params.add(name(l, "mlp.w1"), uniform_matrix(rng, d, config_.d_ff, bound));
    params.add(name(l, "mlp.b1"), Mat::Zero(1, config_.d_ff));
    params.add(name(l, "mlp.w2"), uniform_matrix(rng, config_.d_ff, d,
                                                 1.0 / std::sqrt(static_cast<double>(config_.d_ff))));
    params.add(name(l, "mlp.b2"), Mat::Zero(1, d));
  }
  params.add(name("final_ln.gain"), Mat::Ones(1, d));
  params.add(name("final_ln.bias"), Mat::Zero(1, d));
}

Mat TransformerStack::forward(const ParamSet& p, const Mat& x0, int batch, int seq,
                              const std::vector<char>& valid, Cache* cache) const {
  const int d = config_.d_model;
  const int heads = config_.heads;
  const int dk = d / heads;
  if (x0.cols() != d || x0.rows() != static_cast<Eigen::Index>(batch) * seq ||
      valid.size() != static_cast<std::size_t>(x0.rows())) {
    throw ShapeMismatch("transformer input is " + std::to_string(x0.rows()) + "x" +
                        std::to_string(x0.cols()) + ", expected " +
                        std::to_string(batch * seq) + "x" + std::to_string(d));
  }

  Cache local;
  Cache& c = cache ? *cache : local;
  c = Cache{};
  c.batch = batch;
  c.seq = seq;
  c.valid = valid;
  c.layers.resize(static_cast<std::size_t>(config_.layers));

  Mat x = x0;
  for (int l = 0; l < config_.layers; ++l) {
    LayerCache& lc = c.layers[static_cast<std::size_t>(l)];
    lc.x_in = x;
    lc.h1 = layer_norm(x, p.at(name(l, "ln1.gain")).row(0), p.at(name(l, "ln1.bias")).row(0), &lc.ln1);
    lc.q = lc.h1 * p.at(name(l, "attn.wq"));
    lc.k = lc.h1 * p.at(name(l, "attn.wk"));
    lc.v = lc.h1 * p.at(name(l, "attn.wv"));
    lc.o = Mat::Zero(x.rows(), d);
    lc.attn.resize(static_cast<std::size_t>(batch * heads));
    for (int b = 0; b < batch; ++b) {
      const std::vector<char> mask(valid.begin() + b * seq, valid.begin() + (b + 1) * seq);
      for (int h = 0; h < heads; ++h) {
        AttentionOutput a = attention(lc.q.block(b * seq, h * dk, seq, dk),
                                      lc.k.block(b * seq, h * dk, seq, dk),
                                      lc.v.block(b * seq, h * dk, seq, dk), mask);
        lc.o.block(b * seq, h * dk, seq, dk) = a.output;
        lc.attn[static_cast<std::size_t>(b * heads + h)] = std::move(a.weights);
      }
    }
    lc.x_mid = x + lc.o * p.at(name(l, "attn.wo"));
    lc.h2 = layer_norm(lc.x_mid, p.at(name(l, "ln2.gain")).row(0), p.at(name(l, "ln2.bias")).row(0),
                       &lc.ln2);
    lc.u = (lc.h2 * p.at(name(l, "mlp.w1"))).rowwise() + p.at(name(l, "mlp.b1")).row(0);
    lc.g = lc.u.unaryExpr([](double v) { return gelu(v); });
    x = lc.x_mid + ((lc.g * p.at(name(l, "mlp.w2"))).rowwise() + p.at(name(l, "mlp.b2")).row(0));
  }
  c.x_last = x;
  Mat y = layer_norm(x, p.at(name("final_ln.gain")).row(0), p.at(name("final_ln.bias")).row(0),
                     &c.final_ln);
  c.filled = true;
  return y;
}

Mat TransformerStack::backward(const ParamSet& p, const Cache& c, const Mat& dy,
                               ParamSet& grads) const {
  if (!c.filled) throw MissingCache("transformer backward called without a forward cache");
  const int d = config_.d_model;
  const int heads = config_.heads;
  const int dk = d / heads;
  const int seq = c.seq;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dk));
  if (dy.rows() != c.x_last.rows() || dy.cols() != d) {
    throw ShapeMismatch("upstream gradient does not match the cached forward pass");
  }

  Mat dx = layer_norm_backward(dy, p.at(name("final_ln.gain")).row(0), c.final_ln,
                               grads.at(name("final_ln.gain")),
                               grads.at(name("final_ln.bias")));

  for (int l = config_.layers - 1; l >= 0; --l) {
    const LayerCache& lc = c.layers[static_cast<std::size_t>(l)];
    // MLP block.
    const Mat& w2 = p.at(name(l, "mlp.w2"));
    grads.at(name(l, "mlp.w2")) += lc.g.transpose() * dx;
    grads.at(name(l, "mlp.b2")).row(0) += dx.colwise().sum();
    Mat du = (dx * w2.transpose()).cwiseProduct(lc.u.unaryExpr([](double v) { return gelu_grad(v); }));
    grads.at(name(l, "mlp.w1")) += lc.h2.transpose() * du;
    grads.at(name(l, "mlp.b1")).row(0) += du.colwise().sum();
    Mat dh2 = du * p.at(name(l, "mlp.w1")).transpose();
    Mat dmid = dx + layer_norm_backward(dh2, p.at(name(l, "ln2.gain")).row(0), lc.ln2,
                                        grads.at(name(l, "ln2.gain")),
                                        grads.at(name(l, "ln2.bias")));
    // Attention block.
    grads.at(name(l, "attn.wo")) += lc.o.transpose() * dmid;
    Mat d_o = dmid * p.at(name(l, "attn.wo")).transpose();
    Mat dq = Mat::Zero(d_o.rows(), d);
    Mat dk_all = Mat::Zero(d_o.rows(), d);
    Mat dv = Mat::Zero(d_o.rows(), d);
    for (int b = 0; b < c.batch; ++b) {
      for (int h = 0; h < heads; ++h) {
        const Mat& a = lc.attn[static_cast<std::size_t>(b * heads + h)];
        const auto dob = d_o.block(b * seq, h * dk, seq, dk);
        const auto vb = lc.v.block(b * seq, h * dk, seq, dk);
        Mat da = dob * vb.transpose();
        dv.block(b * seq, h * dk, seq, dk) += a.transpose() * dob;
        Vec row_dot = (da.array() * a.array()).rowwise().sum();
        Mat ds = a.array() * (da.array().colwise() - row_dot.array());
        dq.block(b * seq, h * dk, seq, dk) += ds * lc.k.block(b * seq, h * dk, seq, dk) * scale;
        dk_all.block(b * seq, h * dk, seq, dk) +=
            ds.transpose() * lc.q.block(b * seq, h * dk, seq, dk) * scale;
      }
    }
    grads.at(name(l, "attn.wq")) += lc.h1.transpose() * dq;
    grads.at(name(l, "attn.wk")) += lc.h1.transpose() * dk_all;
    grads.at(name(l, "attn.wv")) += lc.h1.transpose() * dv;
    Mat dh1 = dq * p.at(name(l, "attn.wq")).transpose() +
              dk_all * p.at(name(l, "attn.wk")).transpose() +
              dv * p.at(name(l, "attn.wv")).transpose();
    dx = dmid + layer_norm_backward(dh1, p.at(name(l, "ln1.gain")).row(0), lc.ln1,
                                    grads.at(name(l, "ln1.gain")),
                                    grads.at(name(l, "ln1.bias")));
  }
  return dx;
}

}  // namespace t2tl::nn
