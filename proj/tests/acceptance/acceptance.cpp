// SPDX-License-Identifier: Apache-2.0
// Runs the ten acceptance criteria and prints one PASS/FAIL line for each.
// Exit status is the number of failed criteria.
#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "support/oracles.hpp"
#include "t2tl/env/grid.hpp"
#include "t2tl/error.hpp"
#include "t2tl/harness/config.hpp"
#include "t2tl/harness/experiment.hpp"
#include "t2tl/ltl/parser.hpp"
#include "t2tl/ltl/progression.hpp"
#include "t2tl/ltl/semantics.hpp"
#include "t2tl/nn/encoders.hpp"
#include "t2tl/nn/mlp.hpp"
#include "t2tl/rl/evaluate.hpp"
#include "t2tl/rl/train.hpp"
#include "t2tl/tl/tlmdp.hpp"

namespace {

namespace fs = std::filesystem;
using namespace t2tl;

constexpr const char* kDeliver = "F (Coffee & F Office) & G !Decoration";
constexpr const char* kLive = "!Trap U (Wood & (!Marsh U Workshop))";

const fs::path kWork = T2TL_ACCEPTANCE_DIR;
const fs::path kConfigs = T2TL_CONFIG_DIR;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v, int digits = 3) {
  std::ostringstream o;
  o.setf(std::ios::fixed);
  o.precision(digits);
  o << v;
  return o.str();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_command(const std::string& cmd) {
  const int status = std::system((cmd + " > /dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

harness::ExperimentConfig shipped(const std::string& name, const fs::path& out) {
  auto c = harness::load_experiment(kConfigs / name);
  c.out = out;
  return c;
}

// 1. evaluate(w, i, f) == evaluate(w, i+1, progress(w[i], f)).
Outcome progression_soundness() {
  const std::vector<std::string> names{"a", "b", "c", "d"};
  std::mt19937_64 rng(20240601);
  std::uniform_int_distribution<std::size_t> len(2, 8);
  std::uniform_int_distribution<std::size_t> props(1, 4);
  std::size_t cases = 0;
  std::size_t failures = 0;
  while (cases < 10000) {
    const ltl::Alphabet alphabet(std::vector<std::string>(names.begin(), names.begin() + static_cast<long>(props(rng))));
    const ltl::Formula f = testing::random_formula(rng, alphabet, 4);
    const ltl::Word w = testing::random_word(rng, alphabet, len(rng));
    for (std::size_t i = 0; i + 1 < w.size(); ++i, ++cases) {
      if (ltl::evaluate(w, i, f) != ltl::evaluate(w, i + 1, ltl::progress(w[i], f))) ++failures;
    }
  }
  return {failures == 0, std::to_string(cases) + " triples, " + std::to_string(failures) + " failures"};
}

// 2. Terminal Markovian reward == reward of the raw label word; earlier rewards 0.
Outcome reward_equivalence() {
  std::string detail;
  std::size_t mismatches = 0;
  const auto check = [&](const std::string& name, std::unique_ptr<env::Environment> environment,
                         const char* formula, int episodes) {
    const auto tasks = std::make_shared<const ltl::TaskSet>(ltl::parse(formula, environment->alphabet()),
                                                            environment->alphabet());
    tl::TlMdp mdp(std::move(environment), tasks);
    std::mt19937_64 rng(7);
    int outcomes[3] = {0, 0, 0};
    for (int e = 0; e < episodes; ++e) {
      tl::TlState s = mdp.reset(1);
      ltl::Word word{s.env.label};
      int last = 0;
      while (!mdp.state().done) {
        const tl::TlTransition t = mdp.step(static_cast<env::Action>(rng() % 4));
        word.push_back(t.label);
        if (!t.done && t.reward != 0) ++mismatches;
        last = t.reward;
      }
      if (last != tl::nonmarkov_reward(word, tasks->root())) ++mismatches;
      ++outcomes[last + 1];
    }
    detail += name + " " + std::to_string(episodes) + " episodes (+1:" + std::to_string(outcomes[2]) +
              " 0:" + std::to_string(outcomes[1]) + " -1:" + std::to_string(outcomes[0]) + ") ";
  };
  check("office", env::make_office(200), kDeliver, 1000);
  check("minicraft", std::make_unique<env::MiniCraft>(env::MiniCraftOptions{}, 300), kLive, 1000);
  return {mismatches == 0, detail + "mismatches " + std::to_string(mismatches)};
}

// 3. The worked safety example.
Outcome worked_progression() {
  const ltl::Alphabet zones({"Black_Zone", "White_Zone", "Yellow_Zone", "Red_Zone"});
  const ltl::Formula safe = ltl::parse("F (Black_Zone & F White_Zone) & G !Red_Zone & G !Yellow_Zone", zones);
  const ltl::Formula expected = ltl::simplify(ltl::parse("F White_Zone & G !Red_Zone & G !Yellow_Zone", zones));
  const ltl::Formula got = ltl::progress(ltl::LabelSet::of(zones, {"Black_Zone"}), safe);
  return {got == expected, ltl::format(got)};
}

// 4. Finite differences on every parameter of the D=8, H=2, L=1 model, and
// attention row sums with padded columns at exactly zero.
double worst_gradient_error(nn::ParamSet& params, const std::function<double()>& loss,
                            const nn::ParamSet& analytic, std::string& where) {
  const double eps = 1e-4;
  double worst = 0.0;
  for (std::size_t t = 0; t < params.size(); ++t) {
    nn::Mat& value = params[t].value;
    for (Eigen::Index i = 0; i < value.size(); ++i) {
      const double saved = value.data()[i];
      value.data()[i] = saved + eps;
      const double up = loss();
      value.data()[i] = saved - eps;
      const double down = loss();
      value.data()[i] = saved;
      const double numeric = (up - down) / (2 * eps);
      const double a = analytic[t].value.data()[i];
      const double scale = std::max(std::abs(a), std::abs(numeric));
      const double err = scale > 1e-7 ? std::abs(a - numeric) / scale : std::abs(a - numeric);
      if (err > worst) {
        worst = err;
        where = params[t].name;
      }
    }
  }
  return worst;
}

Outcome transformer_numerics() {
  const ltl::Alphabet abcd({"a", "b", "c", "d"});
  const nn::Vocab vocab(abcd);
  const nn::EncoderConfig config{1, 2, 8, 16, 8};
  nn::Rng rng(41);
  std::string where;
  double worst = 0.0;
  std::size_t scalars = 0;

  const nn::FormulaEncoder encoder(vocab, config);
  nn::ParamSet fp;
  encoder.init(fp, rng);
  for (std::size_t t = 0; t < fp.size(); ++t) {
    if (fp[t].name.find("ln") != std::string::npos) {
      fp[t].value += nn::uniform_matrix(rng, fp[t].value.rows(), fp[t].value.cols(), 0.3);
    }
  }
  fp.at("formula.embedding") = nn::normal_matrix(rng, vocab.size(), 8, 0.5);
  std::vector<std::vector<int>> batch;
  for (const char* f : {"!c U (a & (!d U b))", "F a", "G (a | X b)", "(F c) & (F d)"}) {
    batch.push_back(nn::tokenize_formula(ltl::parse(f, abcd), vocab));
  }
  const nn::Mat up1 = nn::normal_matrix(rng, 4, 8, 1.0);
  nn::FormulaEncoder::Cache cache;
  encoder.forward(fp, batch, &cache);
  nn::ParamSet fg = fp.zeros_like();
  encoder.backward(fp, cache, up1, fg);
  auto floss = [&] { return (encoder.forward(fp, batch, nullptr).array() * up1.array()).sum(); };
  std::string w1;
  const double e1 = worst_gradient_error(fp, floss, fg, w1);
  if (e1 > worst) worst = e1, where = w1;
  for (const auto& t : fp.tensors()) scalars += static_cast<std::size_t>(t.value.size());

  const nn::ContextEncoder context(4, 7, config);
  nn::ParamSet cp;
  context.init(cp, rng);
  const nn::Mat records = nn::normal_matrix(rng, 3 * 4, 7, 1.0);
  const nn::Mat up2 = nn::normal_matrix(rng, 3, 8, 1.0);
  nn::ContextEncoder::Cache ccache;
  context.forward(cp, records, &ccache);
  nn::ParamSet cg = cp.zeros_like();
  context.backward(cp, ccache, up2, cg);
  auto closs = [&] { return (context.forward(cp, records, nullptr).array() * up2.array()).sum(); };
  std::string w2;
  const double e2 = worst_gradient_error(cp, closs, cg, w2);
  if (e2 > worst) worst = e2, where = w2;
  for (const auto& t : cp.tensors()) scalars += static_cast<std::size_t>(t.value.size());

  const nn::Mlp head("qnet", 16, {8}, 4);
  nn::ParamSet hp;
  head.init(hp, rng);
  const nn::Mat x = nn::normal_matrix(rng, 5, 16, 1.0);
  const nn::Mat up3 = nn::normal_matrix(rng, 5, 4, 1.0);
  nn::Mlp::Cache hcache;
  head.forward(hp, x, &hcache);
  nn::ParamSet hg = hp.zeros_like();
  head.backward(hp, hcache, up3, hg);
  auto hloss = [&] { return (head.forward(hp, x, nullptr).array() * up3.array()).sum(); };
  std::string w3;
  const double e3 = worst_gradient_error(hp, hloss, hg, w3);
  if (e3 > worst) worst = e3, where = w3;
  for (const auto& t : hp.tensors()) scalars += static_cast<std::size_t>(t.value.size());

  double row_error = 0.0;
  double pad_mass = 0.0;
  const auto& sc = cache.stack;
  for (const auto& layer : sc.layers) {
    for (int b = 0; b < sc.batch; ++b) {
      for (int h = 0; h < config.heads; ++h) {
        const nn::Mat& a = layer.attn[static_cast<std::size_t>(b * config.heads + h)];
        for (Eigen::Index r = 0; r < a.rows(); ++r) {
          row_error = std::max(row_error, std::abs(a.row(r).sum() - 1.0));
          for (Eigen::Index c = 0; c < a.cols(); ++c) {
            if (!sc.valid[static_cast<std::size_t>(b * sc.seq + c)]) pad_mass = std::max(pad_mass, std::abs(a(r, c)));
          }
        }
      }
    }
  }
  const bool pass = worst <= 1e-3 && row_error <= 1e-6 && pad_mass == 0.0;
  return {pass, std::to_string(scalars) + " scalars, worst relative error " + fmt(worst * 1e6, 3) + "e-6 (" +
                    where + "), row error " + fmt(row_error * 1e12, 3) + "e-12, [PAD] max weight " +
                    fmt(pad_mass, 1)};
}

// 5. Tabular simultaneous learning reaches the value-iteration fixed point.
Outcome tabular_oracle() {
  rl::TrainConfig c;
  c.learner = rl::LearnerKind::Tabular;
  c.alpha = 1.0;
  c.target_sync = 1;
  c.episodes = 20000;
  c.epsilon.start = 1.0;
  c.epsilon.end = 0.5;
  const auto office = env::make_office();
  const auto r = rl::train(c, [] { return env::make_office(); }, ltl::parse(kDeliver, office->alphabet()));
  const auto& environment = r.mdp->environment();
  const auto vi = testing::value_iteration(environment, r.tasks->members(), c.gamma);
  const auto cells = testing::occupiable_states(environment, r.mdp->state().env.id, r.tasks->root());
  double worst = 0.0;
  for (std::size_t s : cells) {
    for (std::size_t m = 0; m < r.tasks->size(); ++m) {
      for (int a = 0; a < environment.action_count(); ++a) {
        worst = std::max(worst, std::abs(r.table->at(s, static_cast<int>(m), a) - vi.at(s, m, a)));
      }
    }
  }
  const auto greedy = rl::run_greedy_episode(*r.mdp, *r.table, c.seed);
  const bool pass = worst <= 1e-6 && greedy.episode_return == 1 && greedy.steps == r.t_opti;
  return {pass, "max-norm gap " + fmt(worst * 1e9, 3) + "e-9 over " + std::to_string(cells.size()) +
                    " cells x " + std::to_string(r.tasks->size()) + " members; greedy steps " +
                    std::to_string(greedy.steps) + ", shortest path " + std::to_string(r.t_opti)};
}

// 6. Median episodes to 0.9 greedy success, simultaneous versus single.
Outcome simultaneous_benefit() {
  auto base = shipped("office_tabular.cfg", kWork / "unused");
  const auto office = env::make_office();
  const ltl::Formula f = ltl::parse(base.formula, office->alphabet());
  const auto median_for = [&](rl::UpdateMode mode, std::vector<int>& all) {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      rl::TrainConfig c = base.train;
      c.update = mode;
      c.seed = seed;
      c.eval_every = 1;
      const auto r = rl::train(c, [] { return env::make_office(); }, f);
      all.push_back(rl::episodes_to_success(r.evals, 0.9, 10).value_or(c.episodes));
    }
    std::vector<int> sorted = all;
    std::sort(sorted.begin(), sorted.end());
    return sorted[2];
  };
  std::vector<int> sim;
  std::vector<int> single;
  const int ms = median_for(rl::UpdateMode::Simultaneous, sim);
  const int m1 = median_for(rl::UpdateMode::Single, single);
  const auto list = [](const std::vector<int>& v) {
    std::string s;
    for (int x : v) s += (s.empty() ? "" : ",") + std::to_string(x);
    return s;
  };
  return {ms < m1, "median simultaneous " + std::to_string(ms) + " [" + list(sim) + "] vs single " +
                       std::to_string(m1) + " [" + list(single) + "]"};
}

// 7. Pretraining converges and the downstream office run succeeds from it.
Outcome pretraining() {
  const fs::path dir = kWork / "pretrain";
  auto config = shipped("pretrain.cfg", dir / "runs");
  const bool default_sampler = config.sampler.max_depth == rl::SamplerConfig{}.max_depth &&
                               config.sampler.leaf == rl::SamplerConfig{}.leaf;
  const auto pre = harness::run_pretrain(config, config.seeds.front(), dir);
  config.pretrained = pre.checkpoint;
  const auto run = harness::run_experiment(config).front();
  const bool pass = default_sampler && config.pretrain_alphabet.size() == 4 && pre.converged &&
                    pre.episodes <= 50000 && run.final_eval.success_rate >= 0.9;
  return {pass, "rolling success " + fmt(pre.final_rolling) + " at episode " + std::to_string(pre.episodes) +
                    "; downstream greedy success " + fmt(run.final_eval.success_rate) + " over " +
                    std::to_string(run.final_eval.episodes) + " episodes"};
}

// 8. Four complete metric series from the width sweep.
Outcome dimension_sweep() {
  const auto config = shipped("sweep.cfg", kWork / "sweep");
  const auto runs = harness::run_experiment(config);
  std::string detail;
  int complete = 0;
  for (const auto& r : runs) {
    const auto table = harness::read_csv(r.metrics, "metrics");
    if (static_cast<int>(table.rows.size()) == config.train.episodes) ++complete;
    detail += "d=" + std::to_string(*r.d_repr) + " success " + fmt(r.final_eval.success_rate, 2) + " ";
  }
  const bool dims = config.sweep_d_repr == std::vector<int>{4, 8, 16, 32};
  return {dims && runs.size() == 4 && complete == 4,
          std::to_string(complete) + "/4 complete series; " + detail + "(ordering not asserted)"};
}

// 9. Fresh checkpoints attend near-uniformly; every dump is row-normalized.
Outcome attention() {
  double worst_ratio = 0.0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    env::MiniCraft mc(env::MiniCraftOptions{}, 100, 5, 1);
    const rl::QAgent agent(nn::Vocab(mc.alphabet()), static_cast<int>(mc.feature_size()), mc.action_count(),
                           rl::NetworkConfig{}, seed);
    const auto dump = harness::attention_for(rl::agent_checkpoint(agent, "minicraft"), kLive, "fresh");
    const auto totals = nn::key_weight_totals(dump, 0);
    const auto [lo, hi] = std::minmax_element(totals.begin(), totals.end());
    worst_ratio = std::max(worst_ratio, *hi / *lo);
  }

  const auto run = harness::run_experiment(shipped("minicraft.cfg", kWork / "minicraft")).front();
  const auto trained = harness::attention_for(rl::load_checkpoint(run.checkpoint), kLive, "trained");
  std::ofstream(kWork / "minicraft" / "attention_live.txt") << [&] {
    std::ostringstream o;
    nn::write_attention_dump(o, trained);
    return o.str();
  }();
  // Summed layer-0 weight per token, for the reported observation.
  std::vector<std::pair<double, std::string>> by_token;
  const auto totals = nn::key_weight_totals(trained, 0);
  for (std::size_t i = 0; i < totals.size(); ++i) {
    auto it = std::find_if(by_token.begin(), by_token.end(), [&](const auto& p) { return p.second == trained.tokens[i]; });
    if (it == by_token.end()) {
      by_token.emplace_back(totals[i], trained.tokens[i]);
    } else {
      it->first += totals[i];
    }
  }
  std::sort(by_token.rbegin(), by_token.rend());
  const bool wood_top2 = by_token.size() >= 2 && (by_token[0].second == "Wood" || by_token[1].second == "Wood");

  std::size_t dumps = 0;
  double worst_row = 0.0;
  for (const auto& entry : fs::recursive_directory_iterator(kWork)) {
    const auto name = entry.path().filename().string();
    if (name.rfind("attention", 0) != 0 || entry.path().extension() != ".txt") continue;
    std::ifstream in(entry.path());
    worst_row = std::max(worst_row, nn::max_row_error(nn::read_attention_dump(in)));
    ++dumps;
  }
  const bool pass = worst_ratio < 2.0 && dumps > 0 && worst_row <= 1e-6;
  return {pass, "fresh max/min ratio " + fmt(worst_ratio) + " (10 seeds); " + std::to_string(dumps) +
                    " dumps, worst row error " + fmt(worst_row * 1e12, 3) + "e-12; trained layer-0 top tokens " +
                    by_token[0].second + ", " + by_token[1].second + " (Wood in top 2: " +
                    (wood_top2 ? "yes" : "no") + ", reported only)"};
}

// 10. Repeated CLI runs give byte-identical metrics.
Outcome determinism() {
  int compared = 0;
  int identical = 0;
  std::string detail;
  for (const char* cfg : {"office_tabular.cfg", "office_neural.cfg", "minicraft.cfg"}) {
    const std::string stem = fs::path(cfg).stem().string();
    const fs::path a = kWork / "determinism" / (stem + "_a");
    const fs::path b = kWork / "determinism" / (stem + "_b");
    const std::string base = std::string(T2TL_CLI) + " train --config " + (kConfigs / cfg).string() + " --seed 7";
    const int ca = run_command(base + " --out " + a.string());
    const int cb = run_command(base + " --out " + b.string());
    ++compared;
    if (ca == 0 && cb == 0 && fs::exists(a / "seed_7" / "metrics.csv") &&
        slurp(a / "seed_7" / "metrics.csv") == slurp(b / "seed_7" / "metrics.csv")) {
      ++identical;
    }
    detail += stem + (ca == 0 && cb == 0 ? "" : " (exit " + std::to_string(ca) + "/" + std::to_string(cb) + ")") + " ";
  }
  return {identical == compared, std::to_string(identical) + "/" + std::to_string(compared) +
                                     " byte-identical repeat pairs: " + detail};
}

}  // namespace

int main() {
  fs::remove_all(kWork);
  fs::create_directories(kWork);
  struct Criterion {
    int id;
    const char* name;
    Outcome (*run)();
  };
  const std::vector<Criterion> criteria{
      {1, "progression soundness", progression_soundness},
      {2, "reward equivalence", reward_equivalence},
      {3, "worked progression example", worked_progression},
      {4, "transformer numerics", transformer_numerics},
      {5, "tabular oracle equivalence", tabular_oracle},
      {6, "simultaneous-learning benefit", simultaneous_benefit},
      {7, "pretraining", pretraining},
      {8, "dimension sweep", dimension_sweep},
      {9, "attention interpretability", attention},
      {10, "end-to-end determinism", determinism},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!o.pass) ++failed;
    std::cout << (o.pass ? "PASS" : "FAIL") << "  [" << c.id << "] " << c.name << ": " << o.detail << " ("
              << fmt(secs, 1) << " s)" << std::endl;
  }
  return failed;
}
