// SPDX-License-Identifier: Apache-2.0
#include "t2tl/harness/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include "t2tl/env/single_state.hpp"
#include "t2tl/error.hpp"
#include "t2tl/ltl/parser.hpp"
#include "t2tl/ltl/progression.hpp"

namespace t2tl::harness {

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

// Keys shared by the training section and its "pretrain." overrides.
const std::vector<std::string>& train_keys() {
  static const std::vector<std::string> keys{
      "learner", "update", "episodes", "max_steps", "gamma", "alpha", "optimizer", "momentum",
      "grad_clip", "epsilon.start", "epsilon.end", "epsilon.decay_fraction", "epsilon.decay_episodes",
      "buffer", "batch", "target_sync", "train_every", "learning_starts", "eval.every", "eval.episodes"};
  return keys;
}

rl::TrainConfig parse_train(const KeyValues& kv, const std::string& p, rl::TrainConfig c) {
  const std::string learner = kv.get(p + "learner", c.learner == rl::LearnerKind::Tabular ? "tabular" : "neural");
  if (learner == "tabular") {
    c.learner = rl::LearnerKind::Tabular;
  } else if (learner == "neural") {
    c.learner = rl::LearnerKind::Neural;
  } else {
    throw ConfigInvalid(p + "learner", "expected tabular or neural, got '" + learner + "'");
  }
  const std::string update = kv.get(p + "update", c.update == rl::UpdateMode::Single ? "single" : "simultaneous");
  if (update == "simultaneous") {
    c.update = rl::UpdateMode::Simultaneous;
  } else if (update == "single") {
    c.update = rl::UpdateMode::Single;
  } else {
    throw ConfigInvalid(p + "update", "expected simultaneous or single, got '" + update + "'");
  }
  const std::string opt = kv.get(p + "optimizer", c.optimizer == rl::OptimizerKind::Adam       ? "adam"
                                                  : c.optimizer == rl::OptimizerKind::Momentum ? "momentum"
                                                                                               : "sgd");
  if (opt == "sgd") {
    c.optimizer = rl::OptimizerKind::Sgd;
  } else if (opt == "momentum") {
    c.optimizer = rl::OptimizerKind::Momentum;
  } else if (opt == "adam") {
    c.optimizer = rl::OptimizerKind::Adam;
  } else {
    throw ConfigInvalid(p + "optimizer", "expected sgd, momentum or adam, got '" + opt + "'");
  }
  c.episodes = kv.get_int(p + "episodes", c.episodes);
  c.max_steps = kv.get_int(p + "max_steps", c.max_steps);
  c.gamma = kv.get_double(p + "gamma", c.gamma);
  c.alpha = kv.get_double(p + "alpha", c.alpha);
  c.momentum = kv.get_double(p + "momentum", c.momentum);
  c.grad_clip = kv.get_double(p + "grad_clip", c.grad_clip);
  c.epsilon.start = kv.get_double(p + "epsilon.start", c.epsilon.start);
  c.epsilon.end = kv.get_double(p + "epsilon.end", c.epsilon.end);
  c.epsilon.decay_fraction = kv.get_double(p + "epsilon.decay_fraction", c.epsilon.decay_fraction);
  c.epsilon.decay_episodes = kv.get_int(p + "epsilon.decay_episodes", c.epsilon.decay_episodes);
  c.buffer = kv.get_int(p + "buffer", c.buffer);
  c.batch = kv.get_int(p + "batch", c.batch);
  c.target_sync = kv.get_int(p + "target_sync", c.target_sync);
  c.train_every = kv.get_int(p + "train_every", c.train_every);
  c.learning_starts = kv.get_int(p + "learning_starts", c.learning_starts);
  c.eval_every = kv.get_int(p + "eval.every", c.eval_every);
  c.eval_episodes = kv.get_int(p + "eval.episodes", c.eval_episodes);
  return c;
}

void echo_train(KeyValues& kv, const rl::TrainConfig& c) {
  kv.set("learner", c.learner == rl::LearnerKind::Tabular ? "tabular" : "neural");
  kv.set("update", c.update == rl::UpdateMode::Single ? "single" : "simultaneous");
  kv.set("optimizer", c.optimizer == rl::OptimizerKind::Adam       ? "adam"
                      : c.optimizer == rl::OptimizerKind::Momentum ? "momentum"
                                                                   : "sgd");
  const auto num = [](double v) {
    char buf[32];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
  };
  kv.set("episodes", std::to_string(c.episodes));
  kv.set("max_steps", std::to_string(c.max_steps));
  kv.set("gamma", num(c.gamma));
  kv.set("alpha", num(c.alpha));
  kv.set("momentum", num(c.momentum));
  kv.set("grad_clip", num(c.grad_clip));
  kv.set("epsilon.start", num(c.epsilon.start));
  kv.set("epsilon.end", num(c.epsilon.end));
  kv.set("epsilon.decay_fraction", num(c.epsilon.decay_fraction));
  kv.set("epsilon.decay_episodes", std::to_string(c.epsilon.decay_episodes));
  kv.set("buffer", std::to_string(c.buffer));
  kv.set("batch", std::to_string(c.batch));
  kv.set("target_sync", std::to_string(c.target_sync));
  kv.set("train_every", std::to_string(c.train_every));
  kv.set("learning_starts", std::to_string(c.learning_starts));
  kv.set("eval.every", std::to_string(c.eval_every));
  kv.set("eval.episodes", std::to_string(c.eval_episodes));
}

std::string join(const std::vector<std::string>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + v[i];
  return out;
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& value) {
  std::filesystem::path p(value);
  if (p.is_relative() && !base.empty()) p = base / p;
  return p.lexically_normal();
}

}  // namespace

KeyValues KeyValues::parse(std::string_view text) {
  KeyValues kv;
  std::istringstream in{std::string(text)};
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigInvalid("line " + std::to_string(number), "expected 'key = value'");
    }
    const std::string key = trim(std::string_view(t).substr(0, eq));
    const std::string value = trim(std::string_view(t).substr(eq + 1));
    if (key.empty()) throw ConfigInvalid("line " + std::to_string(number), "empty key");
    if (kv.has(key)) throw ConfigInvalid(key, "given twice (line " + std::to_string(number) + ")");
    kv.entries_.emplace_back(key, value);
  }
  return kv;
}

KeyValues KeyValues::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigInvalid("config", "cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

bool KeyValues::has(const std::string& key) const {
  return std::any_of(entries_.begin(), entries_.end(), [&](const auto& e) { return e.first == key; });
}

const std::string& KeyValues::text(const std::string& key) const {
  for (const auto& [k, v] : entries_) {
    if (k == key) return v;
  }
  throw ConfigInvalid(key, "missing");
}

std::string KeyValues::get(const std::string& key, const std::string& fallback) const {
  return has(key) ? text(key) : fallback;
}

int KeyValues::get_int(const std::string& key, int fallback) const {
  if (!has(key)) return fallback;
  const std::string& v = text(key);
  try {
    std::size_t used = 0;
    const int out = std::stoi(v, &used);
    if (used == v.size()) return out;
  } catch (const std::exception&) {
  }
  throw ConfigInvalid(key, "expected an integer, got '" + v + "'");
}

std::uint64_t KeyValues::get_u64(const std::string& key, std::uint64_t fallback) const {
  if (!has(key)) return fallback;
  const std::string& v = text(key);
  try {
    std::size_t used = 0;
    if (!v.empty() && v.front() != '-') {
      const auto out = std::stoull(v, &used);
      if (used == v.size()) return out;
    }
  } catch (const std::exception&) {
  }
  throw ConfigInvalid(key, "expected a non-negative integer, got '" + v + "'");
}

double KeyValues::get_double(const std::string& key, double fallback) const {
  if (!has(key)) return fallback;
  const std::string& v = text(key);
  try {
    std::size_t used = 0;
    const double out = std::stod(v, &used);
    if (used == v.size()) return out;
  } catch (const std::exception&) {
  }
  throw ConfigInvalid(key, "expected a number, got '" + v + "'");
}

bool KeyValues::get_bool(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  const std::string& v = text(key);
  if (v == "on" || v == "true" || v == "yes" || v == "1") return true;
  if (v == "off" || v == "false" || v == "no" || v == "0") return false;
  throw ConfigInvalid(key, "expected on or off, got '" + v + "'");
}

std::vector<std::string> KeyValues::get_list(const std::string& key) const {
  std::vector<std::string> out;
  if (!has(key)) return out;
  std::stringstream ss(text(key));
  std::string item;
  while (std::getline(ss, item, ',')) {
    const std::string t = trim(item);
    if (t.empty()) throw ConfigInvalid(key, "empty list item");
    out.push_back(t);
  }
  return out;
}

std::vector<int> KeyValues::get_int_list(const std::string& key, std::vector<int> fallback) const {
  if (!has(key)) return fallback;
  std::vector<int> out;
  for (const auto& item : get_list(key)) {
    try {
      std::size_t used = 0;
      const int v = std::stoi(item, &used);
      if (used == item.size()) {
        out.push_back(v);
        continue;
      }
    } catch (const std::exception&) {
    }
    throw ConfigInvalid(key, "expected integers, got '" + item + "'");
  }
  return out;
}

void KeyValues::set(const std::string& key, const std::string& value) {
  for (auto& [k, v] : entries_) {
    if (k == key) {
      v = value;
      return;
    }
  }
  entries_.emplace_back(key, value);
}

std::vector<std::string> KeyValues::unknown(const std::set<std::string>& known) const {
  std::vector<std::string> out;
  for (const auto& [k, v] : entries_) {
    if (!known.count(k)) out.push_back(k);
  }
  return out;
}

std::string KeyValues::to_text() const {
  std::string out;
  for (const auto& [k, v] : entries_) out += k + " = " + v + "\n";
  return out;
}

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = [] {
    std::set<std::string> k{"env", "layout", "patch", "minicraft.size", "minicraft.wood", "minicraft.workshop",
                            "minicraft.trap", "minicraft.marsh", "alphabet", "formula", "encoder.layers",
                            "encoder.heads", "encoder.d_model", "encoder.d_ff", "encoder.d_repr", "context",
                            "context.window", "context.d_ctx", "context.layers", "context.heads",
                            "context.d_model", "context.d_ff", "qnet.hidden", "pretrained", "seeds", "out",
                            "t_opti", "attention", "metrics.wall_ms", "sweep.d_repr", "eval.final",
                            "pretrain.alphabet", "pretrain.window", "pretrain.threshold", "sampler.max_depth",
                            "sampler.until", "sampler.eventually", "sampler.always", "sampler.and",
                            "sampler.or", "sampler.not", "sampler.leaf", "sampler.max_tries"};
    for (const auto& t : train_keys()) {
      k.insert(t);
      k.insert("pretrain." + t);
    }
    return k;
  }();
  return keys;
}

ExperimentConfig experiment_from(const KeyValues& kv, const std::filesystem::path& base_dir) {
  const auto unknown = kv.unknown(known_keys());
  if (!unknown.empty()) throw ConfigInvalid(unknown.front(), "unknown key");

  ExperimentConfig c;
  c.source = kv;
  c.env.name = kv.get("env", c.env.name);
  if (c.env.name != "office" && c.env.name != "minicraft" && c.env.name != "single_state") {
    throw ConfigInvalid("env", "expected office, minicraft or single_state, got '" + c.env.name + "'");
  }
  if (kv.has("layout")) c.env.layout = resolve(base_dir, kv.text("layout"));
  c.env.patch = kv.get_int("patch", c.env.patch);
  if (c.env.patch < 1 || c.env.patch % 2 == 0) throw ConfigInvalid("patch", "must be a positive odd number");
  c.env.minicraft.size = kv.get_int("minicraft.size", c.env.minicraft.size);
  c.env.minicraft.wood = kv.get_int("minicraft.wood", c.env.minicraft.wood);
  c.env.minicraft.workshop = kv.get_int("minicraft.workshop", c.env.minicraft.workshop);
  c.env.minicraft.trap = kv.get_int("minicraft.trap", c.env.minicraft.trap);
  c.env.minicraft.marsh = kv.get_int("minicraft.marsh", c.env.minicraft.marsh);
  c.env.alphabet = kv.get_list("alphabet");
  if (c.env.name == "single_state" && c.env.alphabet.empty()) {
    throw ConfigInvalid("alphabet", "single_state needs a proposition list");
  }

  if (!kv.has("formula")) throw ConfigInvalid("formula", "missing");
  c.formula = kv.text("formula");

  c.train = parse_train(kv, "", c.train);
  auto& net = c.train.network;
  net.formula.layers = kv.get_int("encoder.layers", net.formula.layers);
  net.formula.heads = kv.get_int("encoder.heads", net.formula.heads);
  net.formula.d_model = kv.get_int("encoder.d_model", net.formula.d_model);
  net.formula.d_ff = kv.get_int("encoder.d_ff", net.formula.d_ff);
  net.formula.d_out = kv.get_int("encoder.d_repr", net.formula.d_out);
  net.context = kv.get_bool("context", net.context);
  net.window = kv.get_int("context.window", net.window);
  net.context_encoder.layers = kv.get_int("context.layers", net.formula.layers);
  net.context_encoder.heads = kv.get_int("context.heads", net.formula.heads);
  net.context_encoder.d_model = kv.get_int("context.d_model", net.formula.d_model);
  net.context_encoder.d_ff = kv.get_int("context.d_ff", net.formula.d_ff);
  net.context_encoder.d_out = kv.get_int("context.d_ctx", net.context_encoder.d_out);
  net.hidden = kv.get_int_list("qnet.hidden", net.hidden);
  for (int h : net.hidden) {
    if (h < 1) throw ConfigInvalid("qnet.hidden", "layer widths must be positive");
  }
  try {
    c.train.validate();
  } catch (const ConfigInvalid&) {
    throw;
  } catch (const Error& e) {
    throw ConfigInvalid("encoder", e.what());
  }

  if (kv.has("pretrained")) c.pretrained = resolve(base_dir, kv.text("pretrained"));
  if (kv.has("seeds")) {
    c.seeds.clear();
    for (const auto& s : kv.get_list("seeds")) {
      KeyValues one;
      one.set("seeds", s);
      c.seeds.push_back(one.get_u64("seeds", 0));
    }
  }
  if (c.seeds.empty()) throw ConfigInvalid("seeds", "seed list is empty");
  if (kv.has("out")) c.out = resolve(base_dir, kv.text("out"));
  if (kv.has("t_opti")) {
    c.t_opti = kv.get_int("t_opti", 1);
    if (*c.t_opti < 1) throw ConfigInvalid("t_opti", "must be positive");
  }
  c.attention = kv.get_bool("attention", c.attention);
  c.wall_ms = kv.get_bool("metrics.wall_ms", c.wall_ms);
  c.sweep_d_repr = kv.get_int_list("sweep.d_repr", {});
  for (int d : c.sweep_d_repr) {
    if (d < 1) throw ConfigInvalid("sweep.d_repr", "dimensions must be positive");
  }
  c.eval_final = kv.get_int("eval.final", c.eval_final);
  if (c.eval_final < 0) throw ConfigInvalid("eval.final", "must be >= 0");

  // Pretraining inherits the training section and takes "pretrain." overrides.
  rl::TrainConfig pre = c.train;
  pre.learner = rl::LearnerKind::Neural;
  pre.episodes = 50000;
  pre.max_steps = 10;
  c.pretrain.train = parse_train(kv, "pretrain.", pre);
  c.pretrain.window = kv.get_int("pretrain.window", c.pretrain.window);
  c.pretrain.threshold = kv.get_double("pretrain.threshold", c.pretrain.threshold);
  c.pretrain_alphabet = kv.get_list("pretrain.alphabet");
  c.sampler.max_depth = kv.get_int("sampler.max_depth", c.sampler.max_depth);
  c.sampler.until = kv.get_double("sampler.until", c.sampler.until);
  c.sampler.eventually = kv.get_double("sampler.eventually", c.sampler.eventually);
  c.sampler.always = kv.get_double("sampler.always", c.sampler.always);
  c.sampler.conjunction = kv.get_double("sampler.and", c.sampler.conjunction);
  c.sampler.disjunction = kv.get_double("sampler.or", c.sampler.disjunction);
  c.sampler.negation = kv.get_double("sampler.not", c.sampler.negation);
  c.sampler.leaf = kv.get_double("sampler.leaf", c.sampler.leaf);
  c.sampler.max_tries = kv.get_int("sampler.max_tries", c.sampler.max_tries);
  if (c.pretrain.train.learner != rl::LearnerKind::Neural) {
    throw ConfigInvalid("pretrain.learner", "pretraining is neural only");
  }
  c.pretrain.train.validate();
  return c;
}

ExperimentConfig load_experiment(const std::filesystem::path& path) {
  return experiment_from(KeyValues::load(path), path.parent_path());
}

std::unique_ptr<env::Environment> make_environment(const EnvSpec& spec, std::uint64_t seed) {
  if (spec.name == "office") {
    if (spec.layout.empty()) return env::make_office(200, spec.patch);
    try {
      return std::make_unique<env::GridWorld>("office", env::load_layout(spec.layout.string()), 200, spec.patch);
    } catch (const LayoutError& e) {
      throw ConfigInvalid("layout", e.what());
    }
  }
  if (spec.name == "minicraft") return std::make_unique<env::MiniCraft>(spec.minicraft, 1000, spec.patch, seed);
  if (spec.name == "single_state") {
    try {
      return std::make_unique<env::SingleStateMdp>(ltl::Alphabet(spec.alphabet));
    } catch (const Error& e) {
      throw ConfigInvalid("alphabet", e.what());
    }
  }
  throw ConfigInvalid("env", "unknown environment '" + spec.name + "'");
}

ltl::Formula task_formula(const ExperimentConfig& config, const env::Environment& environment) {
  try {
    const ltl::Formula f = ltl::parse(config.formula, environment.alphabet());
    ltl::TaskSet check(f, environment.alphabet());
    return f;
  } catch (const ConfigInvalid&) {
    throw;
  } catch (const Error& e) {
    throw ConfigInvalid("formula", e.what());
  }
}

void validate(const ExperimentConfig& config) {
  const auto environment = make_environment(config.env, config.seeds.front());
  task_formula(config, *environment);
  if (!config.pretrained.empty() && !std::filesystem::exists(config.pretrained)) {
    throw ConfigInvalid("pretrained", "no such file " + config.pretrained.string());
  }
}

KeyValues effective_config(const ExperimentConfig& c) {
  KeyValues kv;
  kv.set("env", c.env.name);
  if (!c.env.layout.empty()) kv.set("layout", c.env.layout.string());
  kv.set("patch", std::to_string(c.env.patch));
  if (c.env.name == "minicraft") {
    kv.set("minicraft.size", std::to_string(c.env.minicraft.size));
    kv.set("minicraft.wood", std::to_string(c.env.minicraft.wood));
    kv.set("minicraft.workshop", std::to_string(c.env.minicraft.workshop));
    kv.set("minicraft.trap", std::to_string(c.env.minicraft.trap));
    kv.set("minicraft.marsh", std::to_string(c.env.minicraft.marsh));
  }
  if (!c.env.alphabet.empty()) kv.set("alphabet", join(c.env.alphabet));
  kv.set("formula", c.formula);
  echo_train(kv, c.train);
  const auto& n = c.train.network;
  kv.set("encoder.layers", std::to_string(n.formula.layers));
  kv.set("encoder.heads", std::to_string(n.formula.heads));
  kv.set("encoder.d_model", std::to_string(n.formula.d_model));
  kv.set("encoder.d_ff", std::to_string(n.formula.d_ff));
  kv.set("encoder.d_repr", std::to_string(n.formula.d_out));
  kv.set("context", n.context ? "on" : "off");
  if (n.context) {
    kv.set("context.window", std::to_string(n.window));
    kv.set("context.layers", std::to_string(n.context_encoder.layers));
    kv.set("context.heads", std::to_string(n.context_encoder.heads));
    kv.set("context.d_model", std::to_string(n.context_encoder.d_model));
    kv.set("context.d_ff", std::to_string(n.context_encoder.d_ff));
    kv.set("context.d_ctx", std::to_string(n.context_encoder.d_out));
  }
  std::vector<std::string> hidden;
  for (int h : n.hidden) hidden.push_back(std::to_string(h));
  kv.set("qnet.hidden", join(hidden));
  if (!c.pretrained.empty()) kv.set("pretrained", c.pretrained.string());
  std::vector<std::string> seeds;
  for (auto s : c.seeds) seeds.push_back(std::to_string(s));
  kv.set("seeds", join(seeds));
  kv.set("out", c.out.string());
  if (c.t_opti) kv.set("t_opti", std::to_string(*c.t_opti));
  kv.set("attention", c.attention ? "on" : "off");
  kv.set("metrics.wall_ms", c.wall_ms ? "on" : "off");
  kv.set("eval.final", std::to_string(c.eval_final));
  return kv;
}

}  // namespace t2tl::harness
