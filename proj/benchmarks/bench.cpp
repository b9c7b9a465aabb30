// SPDX-License-Identifier: Apache-2.0
#include <benchmark/benchmark.h>

#include <memory>

#include "t2tl/env/grid.hpp"
#include "t2tl/ltl/parser.hpp"
#include "t2tl/ltl/progression.hpp"
#include "t2tl/nn/encoders.hpp"
#include "t2tl/rl/agent.hpp"
#include "t2tl/rl/optimizer.hpp"
#include "t2tl/tl/tlmdp.hpp"

namespace {

using namespace t2tl;

constexpr const char* kDeliver = "F (Coffee & F Office) & G !Decoration";
constexpr const char* kLive = "!Trap U (Wood & (!Marsh U Workshop))";

void BM_Progress(benchmark::State& state) {
  const ltl::Alphabet a({"Wood", "Workshop", "Trap", "Marsh"});
  const ltl::Formula f = ltl::parse(kLive, a);
  std::uint64_t bits = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(ltl::progress(ltl::LabelSet(bits++ & 15U), f));
  }
}
BENCHMARK(BM_Progress);

void BM_Closure(benchmark::State& state) {
  const auto office = env::make_office();
  const ltl::Formula f = ltl::parse("F (Coffee & F (Email & F Office)) & G !Decoration", office->alphabet());
  for (auto _ : state) benchmark::DoNotOptimize(ltl::TaskSet(f, office->alphabet()).size());
}
BENCHMARK(BM_Closure);

void BM_ProductStep(benchmark::State& state) {
  auto office = env::make_office();
  const auto tasks = std::make_shared<const ltl::TaskSet>(ltl::parse(kDeliver, office->alphabet()),
                                                          office->alphabet());
  tl::TlMdp mdp(std::move(office), tasks, 100);
  mdp.reset(1);
  int a = 0;
  for (auto _ : state) {
    if (mdp.state().done) mdp.reset(1);
    benchmark::DoNotOptimize(mdp.step(static_cast<env::Action>(a++ & 3)));
  }
}
BENCHMARK(BM_ProductStep);

void BM_EncoderForward(benchmark::State& state) {
  const auto office = env::make_office();
  const nn::Vocab vocab(office->alphabet());
  nn::EncoderConfig c;
  c.d_model = static_cast<int>(state.range(0));
  c.d_ff = 2 * c.d_model;
  const nn::FormulaEncoder encoder(vocab, c);
  nn::ParamSet params;
  nn::Rng rng(1);
  encoder.init(params, rng);
  const std::vector<std::vector<int>> batch(32, nn::tokenize_formula(ltl::parse(kDeliver, office->alphabet()), vocab));
  for (auto _ : state) benchmark::DoNotOptimize(encoder.forward(params, batch, nullptr));
}
BENCHMARK(BM_EncoderForward)->Arg(16)->Arg(32)->Arg(64);

void BM_TdUpdate(benchmark::State& state) {
  const auto office = env::make_office();
  rl::NetworkConfig net;
  const rl::TrainConfig tc;
  rl::QAgent agent(nn::Vocab(office->alphabet()), static_cast<int>(office->feature_size()), office->action_count(),
                   net, 1);
  const ltl::Formula f = ltl::parse(kDeliver, office->alphabet());
  const int batch = static_cast<int>(state.range(0));
  rl::TdBatch b;
  nn::Rng rng(2);
  b.features = nn::normal_matrix(rng, batch, static_cast<Eigen::Index>(office->feature_size()), 1.0);
  b.next_features = nn::normal_matrix(rng, batch, static_cast<Eigen::Index>(office->feature_size()), 1.0);
  b.formulas.assign(static_cast<std::size_t>(batch), f);
  b.next.assign(static_cast<std::size_t>(batch), f);
  b.actions.assign(static_cast<std::size_t>(batch), 0);
  b.rewards.assign(static_cast<std::size_t>(batch), 0.0);
  rl::Adam opt(1e-3);
  for (auto _ : state) benchmark::DoNotOptimize(agent.td_update(b, tc.gamma, opt, 0.0).loss);
}
BENCHMARK(BM_TdUpdate)->Arg(32)->Arg(64);

}  // namespace

BENCHMARK_MAIN();
