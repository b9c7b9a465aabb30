// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <sstream>

#include "support/oracles.hpp"
#include "t2tl/error.hpp"
#include "t2tl/ltl/parser.hpp"
#include "t2tl/nn/attention_dump.hpp"
#include "t2tl/nn/encoders.hpp"
#include "t2tl/nn/mlp.hpp"

namespace t2tl::nn {
namespace {

const ltl::Alphabet kAbcd({"a", "b", "c", "d"});

std::vector<std::string> token_strings(const std::vector<int>& ids, const Vocab& v) {
  std::vector<std::string> out;
  for (int id : ids) out.push_back(v.token(id));
  return out;
}

TEST(Vocab, ReservedLayout) {
  Vocab v(kAbcd);
  EXPECT_EQ(v.id("[PAD]"), 0);
  EXPECT_EQ(v.id("[AGG]"), 1);
  EXPECT_EQ(v.size(), 11 + 4);
  EXPECT_EQ(v.token(v.id("c")), "c");
  EXPECT_THROW(v.id("zebra"), UnknownToken);
  EXPECT_EQ(Vocab(v.tokens()), v);
}

TEST(TokenizeFormula, PrefixOrderWithAggregate) {
  Vocab v(kAbcd);
  using S = std::vector<std::string>;
  EXPECT_EQ(token_strings(tokenize_formula(ltl::parse("F a", kAbcd), v), v), (S{"[AGG]", "F", "a"}));
  EXPECT_EQ(token_strings(tokenize_formula(ltl::parse("!c U (a & (!d U b))", kAbcd), v), v),
            (S{"[AGG]", "U", "!", "c", "&", "a", "U", "!", "d", "b"}));
  EXPECT_EQ(token_strings(tokenize_formula(ltl::parse("true", kAbcd), v), v), (S{"[AGG]", "true"}));
  Vocab small(ltl::Alphabet({"a"}));
  EXPECT_THROW(tokenize_formula(ltl::parse("F b", kAbcd), small), UnknownToken);
}

TEST(PositionalEmbedding, MatchesLongDoubleOracle) {
  Mat pe = positional_embedding(8, 16);
  for (int j = 0; j < 16; ++j) EXPECT_EQ(pe(0, j), j % 2 == 0 ? 0.0 : 1.0);
  for (int pos = 0; pos < 8; ++pos) {
    for (int i = 0; i < 8; ++i) {
      const long double angle = pos / std::pow(10000.0L, (2.0L * i) / 16.0L);
      EXPECT_NEAR(pe(pos, 2 * i), static_cast<double>(std::sin(angle)), 1e-12);
      EXPECT_NEAR(pe(pos, 2 * i + 1), static_cast<double>(std::cos(angle)), 1e-12);
    }
  }
  EXPECT_LE(pe.cwiseAbs().maxCoeff(), 1.0);
  EXPECT_THROW(positional_embedding(4, 7), ShapeMismatch);
}

TEST(Attention, SingletonKey) {
  Mat q(1, 2), k(1, 2), v(1, 3);
  q << 0.3, -1;
  k << 2, 5;
  v << 7, 8, 9;
  auto out = attention(q, k, v);
  EXPECT_DOUBLE_EQ(out.weights(0, 0), 1.0);
  EXPECT_EQ(out.output, v);
}

TEST(Attention, IdenticalKeysSplitEvenly) {
  Mat q = Mat::Constant(1, 4, 0.7), k = Mat::Constant(2, 4, -0.2), v(2, 1);
  v << 1, 3;
  auto out = attention(q, k, v);
  EXPECT_DOUBLE_EQ(out.weights(0, 0), 0.5);
  EXPECT_DOUBLE_EQ(out.weights(0, 1), 0.5);
  EXPECT_DOUBLE_EQ(out.output(0, 0), 2.0);
}

TEST(Attention, TwoByTwoHandExample) {
  Mat q(2, 1), k(2, 1), v = Mat::Identity(2, 2);
  q << 1, 0;
  k << 1, -1;
  auto out = attention(q, k, v);
  auto expected = testing::softmax_ld({1.0L, -1.0L});
  EXPECT_NEAR(out.weights(0, 0), static_cast<double>(expected[0]), 1e-15);
  EXPECT_NEAR(out.weights(0, 1), static_cast<double>(expected[1]), 1e-15);
  EXPECT_NEAR(out.weights(0, 0), 0.8808, 1e-4);
  EXPECT_DOUBLE_EQ(out.weights(1, 0), 0.5);
}

TEST(Attention, MaskedColumnsAreZero) {
  Mat q = Mat::Random(3, 4), k = Mat::Random(3, 4), v = Mat::Random(3, 2);
  auto out = attention(q, k, v, {1, 0, 1});
  for (int r = 0; r < 3; ++r) {
    EXPECT_EQ(out.weights(r, 1), 0.0);
    EXPECT_NEAR(out.weights.row(r).sum(), 1.0, 1e-12);
  }
  EXPECT_THROW(attention(q, Mat::Random(3, 5), v), ShapeMismatch);
  EXPECT_THROW(attention(q, k, Mat::Random(2, 2)), ShapeMismatch);
}

struct Model {
  Vocab vocab;
  EncoderConfig config;
  FormulaEncoder encoder;
  ParamSet params;

  explicit Model(EncoderConfig c, std::uint64_t seed = 1)
      : vocab(kAbcd), config(c), encoder(vocab, c) {
    Rng rng(seed);
    encoder.init(params, rng);
  }
  std::vector<int> ids(const char* text) const { return tokenize_formula(ltl::parse(text, kAbcd), vocab); }
};

EncoderConfig tiny() {
  EncoderConfig c;
  c.layers = 1;
  c.heads = 2;
  c.d_model = 8;
  c.d_ff = 12;
  c.d_out = 5;
  return c;
}

TEST(FormulaEncoder, ShapesAndPadding) {
  Model m(EncoderConfig{});
  FormulaEncoder::Cache cache;
  std::vector<std::vector<int>> batch = {m.ids("F a"), m.ids("!c U (a & (!d U b))"), m.ids("a")};
  Mat pooled = m.encoder.forward(m.params, batch, &cache);
  EXPECT_EQ(pooled.rows(), 3);
  EXPECT_EQ(pooled.cols(), 16);
  EXPECT_EQ(cache.y.rows(), 3 * 10);
  EXPECT_EQ(cache.y.cols(), 32);
  for (const auto& layer : cache.stack.layers) {
    for (int b = 0; b < 3; ++b) {
      const int n = static_cast<int>(batch[static_cast<std::size_t>(b)].size());
      for (int h = 0; h < 4; ++h) {
        const Mat& a = layer.attn[static_cast<std::size_t>(b * 4 + h)];
        for (int r = 0; r < 10; ++r) {
          EXPECT_NEAR(a.row(r).sum(), 1.0, 1e-9);
          for (int col = n; col < 10; ++col) EXPECT_EQ(a(r, col), 0.0);
        }
      }
    }
  }
}

TEST(FormulaEncoder, PaddingDoesNotChangeRepresentation) {
  Model m(EncoderConfig{});
  Mat alone = m.encoder.forward(m.params, {m.ids("F a")}, nullptr);
  Mat padded = m.encoder.forward(m.params, {m.ids("F a"), m.ids("F (a & F (b & F c))")}, nullptr);
  EXPECT_LT((alone.row(0) - padded.row(0)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(FormulaEncoder, DistinctFormulasDiffer) {
  Model m(EncoderConfig{});
  Mat pooled = m.encoder.forward(m.params, {m.ids("F a"), m.ids("F b"), m.ids("a U b"), m.ids("b U a")}, nullptr);
  for (int i = 0; i < 4; ++i) {
    for (int j = i + 1; j < 4; ++j) EXPECT_GT((pooled.row(i) - pooled.row(j)).norm(), 1e-6);
  }
}

TEST(FormulaEncoder, DeterministicForSeed) {
  Model a(EncoderConfig{}, 9), b(EncoderConfig{}, 9);
  auto ids = a.ids("F (a & F b) & G !c");
  EXPECT_EQ(a.encoder.forward(a.params, {ids}, nullptr), b.encoder.forward(b.params, {ids}, nullptr));
}

TEST(FormulaEncoder, ResidualIdentityWithZeroSublayers) {
  Model m(EncoderConfig{});
  const TransformerStack stack("formula", m.config);
  for (int l = 0; l < m.config.layers; ++l) {
    for (const char* leaf : {"attn.wq", "attn.wk", "attn.wv", "attn.wo", "mlp.w1", "mlp.b1", "mlp.w2", "mlp.b2"}) {
      m.params.at(stack.name(l, leaf)).setZero();
    }
  }
  FormulaEncoder::Cache cache;
  auto ids = m.ids("a U (b & F c)");
  m.encoder.forward(m.params, {ids}, &cache);
  const Mat pe = positional_embedding(static_cast<int>(ids.size()), 32);
  Mat x0(static_cast<Eigen::Index>(ids.size()), 32);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    x0.row(static_cast<Eigen::Index>(i)) = m.params.at("formula.embedding").row(ids[i]) + pe.row(static_cast<Eigen::Index>(i));
  }
  // Independent LayerNorm.
  for (Eigen::Index r = 0; r < x0.rows(); ++r) {
    const double mean = x0.row(r).mean();
    const double var = (x0.row(r).array() - mean).square().mean();
    for (Eigen::Index c = 0; c < 32; ++c) {
      EXPECT_NEAR(cache.y(r, c), (x0(r, c) - mean) / std::sqrt(var + 1e-5), 1e-10);
    }
  }
}

// Central differences over every scalar of every tensor.
void expect_gradients_match(ParamSet& params, const std::function<double()>& loss,
                            const ParamSet& analytic) {
  const double eps = 1e-4;
  for (std::size_t t = 0; t < params.size(); ++t) {
    Mat& value = params[t].value;
    const Mat& grad = analytic[t].value;
    double worst = 0.0;
    for (Eigen::Index i = 0; i < value.size(); ++i) {
      const double saved = value.data()[i];
      value.data()[i] = saved + eps;
      const double up = loss();
      value.data()[i] = saved - eps;
      const double down = loss();
      value.data()[i] = saved;
      const double numeric = (up - down) / (2 * eps);
      const double a = grad.data()[i];
      const double scale = std::max(std::abs(a), std::abs(numeric));
      const double err = scale > 1e-7 ? std::abs(a - numeric) / scale : std::abs(a - numeric);
      worst = std::max(worst, err);
    }
    EXPECT_LE(worst, 1e-3) << params[t].name;
  }
}

TEST(Gradients, FormulaEncoderMatchesFiniteDifferences) {
  Model m(tiny(), 3);
  // Push LayerNorm parameters away from 1/0 so their gradients are generic.
  Rng rng(11);
  for (std::size_t t = 0; t < m.params.size(); ++t) {
    if (m.params[t].name.find("ln") != std::string::npos) {
      m.params[t].value += uniform_matrix(rng, m.params[t].value.rows(), m.params[t].value.cols(), 0.3);
    }
  }
  m.params.at("formula.embedding") = normal_matrix(rng, m.vocab.size(), 8, 0.5);
  std::vector<std::vector<int>> batch = {m.ids("!c U (a & (!d U b))"), m.ids("F a"), m.ids("G (a | b)")};
  const Mat upstream = normal_matrix(rng, 3, 5, 1.0);
  auto loss = [&] {
    return (m.encoder.forward(m.params, batch, nullptr).array() * upstream.array()).sum();
  };
  FormulaEncoder::Cache cache;
  m.encoder.forward(m.params, batch, &cache);
  ParamSet grads = m.params.zeros_like();
  m.encoder.backward(m.params, cache, upstream, grads);
  expect_gradients_match(m.params, loss, grads);
}

TEST(Gradients, ContextEncoderMatchesFiniteDifferences) {
  EncoderConfig c = tiny();
  c.d_out = 4;
  ContextEncoder enc(3, 6, c);
  ParamSet params;
  Rng rng(5);
  enc.init(params, rng);
  const Mat records = normal_matrix(rng, 2 * 3, 6, 1.0);
  const Mat upstream = normal_matrix(rng, 2, 4, 1.0);
  auto loss = [&] { return (enc.forward(params, records, nullptr).array() * upstream.array()).sum(); };
  ContextEncoder::Cache cache;
  enc.forward(params, records, &cache);
  ParamSet grads = params.zeros_like();
  enc.backward(params, cache, upstream, grads);
  expect_gradients_match(params, loss, grads);
}

TEST(Gradients, MlpMatchesFiniteDifferences) {
  Mlp net("q", 5, {7, 6}, 3);
  ParamSet params;
  Rng rng(6);
  net.init(params, rng);
  const Mat x = normal_matrix(rng, 4, 5, 1.0);
  const Mat upstream = normal_matrix(rng, 4, 3, 1.0);
  auto loss = [&] { return (net.forward(params, x, nullptr).array() * upstream.array()).sum(); };
  Mlp::Cache cache;
  net.forward(params, x, &cache);
  ParamSet grads = params.zeros_like();
  Mat dx = net.backward(params, cache, upstream, grads);
  expect_gradients_match(params, loss, grads);
  // Input gradient too.
  Mat xv = x;
  for (Eigen::Index i = 0; i < xv.size(); ++i) {
    const double saved = xv.data()[i];
    xv.data()[i] = saved + 1e-5;
    const double up = (net.forward(params, xv, nullptr).array() * upstream.array()).sum();
    xv.data()[i] = saved - 1e-5;
    const double down = (net.forward(params, xv, nullptr).array() * upstream.array()).sum();
    xv.data()[i] = saved;
    EXPECT_NEAR(dx.data()[i], (up - down) / 2e-5, 1e-6);
  }
}

TEST(Gradients, ZeroUpstreamAndUnusedRows) {
  Model m(tiny());
  FormulaEncoder::Cache cache;
  m.encoder.forward(m.params, {m.ids("F a")}, &cache);
  ParamSet grads = m.params.zeros_like();
  m.encoder.backward(m.params, cache, Mat::Zero(1, 5), grads);
  for (const auto& t : grads.tensors()) EXPECT_EQ(t.value.cwiseAbs().maxCoeff(), 0.0) << t.name;

  m.encoder.backward(m.params, cache, Mat::Ones(1, 5), grads);
  const Mat& demb = grads.at("formula.embedding");
  for (const char* unused : {"b", "c", "d", "U", "G", "[PAD]"}) {
    EXPECT_EQ(demb.row(m.vocab.id(unused)).cwiseAbs().maxCoeff(), 0.0) << unused;
  }
  EXPECT_GT(demb.row(m.vocab.id("a")).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Gradients, BackwardNeedsForwardCache) {
  Model m(tiny());
  FormulaEncoder::Cache empty;
  ParamSet grads = m.params.zeros_like();
  EXPECT_THROW(m.encoder.backward(m.params, empty, Mat::Zero(1, 5), grads), MissingCache);
}

TEST(ContextEncoder, ZeroWindowGivesFixedVector) {
  ContextEncoder enc(8, 6, EncoderConfig{});
  ParamSet params;
  Rng rng(2);
  enc.init(params, rng);
  ContextWindow w(8, 3, 2);
  Mat z1 = enc.forward(params, w.records(), nullptr);
  Mat z2 = enc.forward(params, w.records(), nullptr);
  EXPECT_EQ(z1, z2);
  EXPECT_EQ(z1.cols(), 16);
}

TEST(ContextEncoder, PositionSensitive) {
  ContextEncoder enc(4, 6, EncoderConfig{});
  ParamSet params;
  Rng rng(2);
  enc.init(params, rng);
  ContextWindow w(4, 3, 2);
  w.push({0.1, 0.2, 0.3}, 0, 0.0);
  w.push({0.9, 0.1, 0.0}, 1, 1.0);
  Mat records = w.records();
  Mat swapped = records;
  swapped.row(2).swap(swapped.row(3));
  EXPECT_GT((enc.forward(params, records, nullptr) - enc.forward(params, swapped, nullptr)).norm(), 1e-9);
}

TEST(ContextWindow, RingFillAndShape) {
  ContextWindow w(3, 2, 4);
  EXPECT_EQ(w.records().rows(), 3);
  EXPECT_EQ(w.records().cols(), 2 + 4 + 1);
  EXPECT_EQ(w.records().cwiseAbs().sum(), 0.0);
  w.push({0.5, 0.25}, 2, -1.0);
  int nonzero_rows = 0;
  for (int r = 0; r < 3; ++r) nonzero_rows += w.records().row(r).cwiseAbs().sum() > 0;
  EXPECT_EQ(nonzero_rows, 1);
  EXPECT_EQ(w.records()(2, 2 + 2), 1.0);
  EXPECT_EQ(w.records()(2, 6), -1.0);
  for (int i = 0; i < 5; ++i) w.push({0, 0}, 0, 0);
  EXPECT_EQ(w.records().rows(), 3);
  w.clear();
  EXPECT_EQ(w.records().cwiseAbs().sum(), 0.0);
}

TEST(ContextEncoder, SingleRecordWindow) {
  EncoderConfig c;
  ContextEncoder enc(1, 3, c);
  ParamSet params;
  Rng rng(4);
  enc.init(params, rng);
  Mat r(1, 3);
  r << 1, 0, 0.5;
  EXPECT_EQ(enc.forward(params, r, nullptr).rows(), 1);
}

TEST(AttentionDump, RoundTripAndRowSums) {
  Model m(EncoderConfig{});
  FormulaEncoder::Cache cache;
  ltl::Formula f = ltl::parse("F (a & F b) & G !c", kAbcd);
  m.encoder.forward(m.params, {tokenize_formula(f, m.vocab)}, &cache);
  AttentionDump dump = make_attention_dump(m.encoder.attention_map(cache, 0), m.vocab, ltl::format(f), "episode=0");
  EXPECT_LE(max_row_error(dump), 1e-6);
  std::stringstream io;
  write_attention_dump(io, dump);
  AttentionDump back = read_attention_dump(io);
  EXPECT_EQ(back.tokens, dump.tokens);
  EXPECT_EQ(back.formula, dump.formula);
  ASSERT_EQ(back.rows.size(), dump.rows.size());
  for (std::size_t i = 0; i < back.rows.size(); ++i) {
    EXPECT_EQ(back.rows[i].key_token, dump.rows[i].key_token);
    EXPECT_EQ(back.rows[i].weight, dump.rows[i].weight);
    EXPECT_NO_THROW(m.vocab.id(back.rows[i].key_token));
  }
}

TEST(AttentionDump, FreshModelIsNearUniform) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    Model m(EncoderConfig{}, seed);
    FormulaEncoder::Cache cache;
    m.encoder.forward(m.params, {m.ids("F (a & F b) & G !c")}, &cache);
    auto dump = make_attention_dump(m.encoder.attention_map(cache, 0), m.vocab, "", "");
    auto totals = key_weight_totals(dump, 0);
    const double hi = *std::max_element(totals.begin(), totals.end());
    const double lo = *std::min_element(totals.begin(), totals.end());
    EXPECT_LT(hi / lo, 2.0) << "seed " << seed;
  }
}

}  // namespace
}  // namespace t2tl::nn
