// SPDX-License-Identifier: Apache-2.0
#include "t2tl/harness/experiment.hpp"

#include <openssl/sha.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

#include <json.hpp>

#include "t2tl/error.hpp"
#include "t2tl/ltl/parser.hpp"
#include "t2tl/ltl/progression.hpp"
#include "t2tl/rl/checkpoint.hpp"
#include "t2tl/rl/pretrain.hpp"
#include "t2tl/tl/tlmdp.hpp"

namespace t2tl::harness {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string read_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigInvalid("path", "cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw Error("cannot write " + path.string());
}

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

json config_json(const KeyValues& kv) {
  json j = json::object();
  for (const auto& [k, v] : kv.entries()) j[k] = v;
  return j;
}

json schemas_json() {
  json j = json::object();
  for (const char* name : {"metrics", "eval", "episodes"}) {
    j[name] = std::string(name) + "/" + std::to_string(kCsvSchemaVersion);
  }
  return j;
}

template <typename Policy>
rl::EvalSummary greedy_summary(tl::TlMdp& mdp, const Policy& policy, std::uint64_t seed, int episodes,
                               int t_opti, double gamma) {
  std::vector<rl::EpisodeOutcome> runs;
  runs.reserve(static_cast<std::size_t>(episodes));
  for (int k = 0; k < episodes; ++k) runs.push_back(rl::run_greedy_episode(mdp, policy, seed));
  return rl::summarize(runs, t_opti, gamma);
}

json summary_json(const rl::EvalSummary& s) {
  return json{{"episodes", s.episodes},
              {"t_opti", s.t_opti},
              {"mean_performance", s.mean_performance},
              {"median_performance", s.median_performance},
              {"success_rate", s.success_rate},
              {"mean_steps", s.mean_steps}};
}

int search_t_opti(const env::Environment& environment, std::shared_ptr<const ltl::TaskSet> tasks, int max_steps,
                  std::uint64_t seed) {
  tl::TlMdp probe(environment.clone(), std::move(tasks), max_steps);
  probe.reset(seed);
  return std::max(rl::shortest_task_steps(probe).value_or(probe.step_cap()), 1);
}

nn::AttentionDump encoder_dump(const nn::FormulaEncoder& encoder, const nn::ParamSet& params,
                               const ltl::Formula& formula, const std::string& tag) {
  nn::FormulaEncoder::Cache cache;
  encoder.forward(params, {nn::tokenize_formula(formula, encoder.vocab())}, &cache);
  return nn::make_attention_dump(encoder.attention_map(cache, 0), encoder.vocab(), ltl::format(formula), tag);
}

}  // namespace

const std::vector<std::string>& csv_schema(const std::string& name) {
  static const std::map<std::string, std::vector<std::string>> schemas{
      {"metrics", {"episode", "steps", "return", "performance", "epsilon", "wall_ms"}},
      {"eval", {"episode", "success_rate", "mean_steps", "mean_performance"}},
      {"pretrain", {"episode", "success", "rolling"}},
      {"episodes", {"episode", "steps", "return", "performance"}},
  };
  const auto it = schemas.find(name);
  if (it == schemas.end()) throw SchemaMismatch("unknown CSV schema '" + name + "'");
  return it->second;
}

CsvTable read_csv(std::istream& in, const std::string& schema) {
  const auto& columns = csv_schema(schema);
  const auto split = [](const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) out.push_back(field);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
  };
  CsvTable table;
  std::string line;
  if (!std::getline(in, line)) throw SchemaMismatch(schema + ": empty file");
  table.header = split(line);
  if (table.header != columns) throw SchemaMismatch(schema + ": unexpected header '" + line + "'");
  int number = 1;
  while (std::getline(in, line)) {
    ++number;
    const auto fields = split(line);
    if (fields.size() != columns.size()) {
      throw SchemaMismatch(schema + ": line " + std::to_string(number) + " has " + std::to_string(fields.size()) +
                           " fields");
    }
    std::vector<double> row;
    for (const auto& f : fields) {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(f, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0 || used != f.size()) {
        throw SchemaMismatch(schema + ": line " + std::to_string(number) + " field '" + f + "' is not numeric");
      }
      row.push_back(v);
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

CsvTable read_csv(const fs::path& path, const std::string& schema) {
  std::ifstream in(path);
  if (!in) throw SchemaMismatch("cannot read " + path.string());
  return read_csv(in, schema);
}

void write_metrics_csv(std::ostream& out, const std::vector<rl::EpisodeMetrics>& metrics) {
  out << "episode,steps,return,performance,epsilon,wall_ms\n";
  for (const auto& m : metrics) {
    out << m.episode << ',' << m.steps << ',' << m.episode_return << ',' << num(m.performance) << ','
        << num(m.epsilon) << ',' << num(m.wall_ms) << '\n';
  }
}

void write_eval_csv(std::ostream& out, const std::vector<rl::EvalPoint>& evals) {
  out << "episode,success_rate,mean_steps,mean_performance\n";
  for (const auto& e : evals) {
    out << e.episode << ',' << num(e.success_rate) << ',' << num(e.mean_steps) << ','
        << num(e.mean_performance) << '\n';
  }
}

void write_episodes_csv(std::ostream& out, const rl::EvalSummary& summary) {
  out << "episode,steps,return,performance\n";
  for (std::size_t i = 0; i < summary.runs.size(); ++i) {
    out << i << ',' << summary.runs[i].steps << ',' << summary.runs[i].episode_return << ','
        << num(summary.performances[i]) << '\n';
  }
}

std::string input_hash(const std::string& config_text, const fs::path& layout, const fs::path& pretrained) {
  std::string content;
  const auto frame = [&](const std::string& name, const std::string& bytes) {
    content += name + '\0' + std::to_string(bytes.size()) + '\0' + bytes;
  };
  frame("config", config_text);
  if (!layout.empty()) frame("layout", read_bytes(layout));
  if (!pretrained.empty()) frame("pretrained", read_bytes(pretrained));
  const std::string blob = "blob " + std::to_string(content.size()) + '\0' + content;
  unsigned char digest[SHA_DIGEST_LENGTH];
  SHA1(reinterpret_cast<const unsigned char*>(blob.data()), blob.size(), digest);
  std::ostringstream hex;
  for (unsigned char b : digest) hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(b);
  return hex.str();
}

fs::path run_directory(const ExperimentConfig& config, std::uint64_t seed, std::optional<int> d_repr) {
  fs::path dir = config.out;
  if (d_repr) dir /= "d_repr_" + std::to_string(*d_repr);
  return dir / ("seed_" + std::to_string(seed));
}

std::vector<RunOutput> run_experiment(const ExperimentConfig& config, std::ostream* log) {
  validate(config);
  std::vector<std::optional<int>> dims;
  for (int d : config.sweep_d_repr) dims.emplace_back(d);
  if (dims.empty()) dims.emplace_back(std::nullopt);
  std::vector<RunOutput> outputs;
  for (const auto& d : dims) {
    for (std::uint64_t seed : config.seeds) {
      outputs.push_back(run_one(config, seed, d, run_directory(config, seed, d), log));
    }
  }
  return outputs;
}

RunOutput run_one(const ExperimentConfig& base, std::uint64_t seed, std::optional<int> d_repr, const fs::path& dir,
                  std::ostream* log) {
  ExperimentConfig config = base;
  config.train.seed = seed;
  config.seeds = {seed};
  config.sweep_d_repr.clear();
  if (d_repr) config.train.network.formula.d_out = *d_repr;
  config.out = dir.parent_path();
  config.train.validate();

  const EnvSpec spec = config.env;
  const auto environment = make_environment(spec, seed);
  const ltl::Formula formula = task_formula(config, *environment);
  const bool neural = config.train.learner == rl::LearnerKind::Neural;

  std::optional<rl::Checkpoint> pretrained;
  if (!config.pretrained.empty()) {
    if (!neural) throw ConfigInvalid("pretrained", "only the neural learner takes a pretrained encoder");
    pretrained = rl::load_checkpoint(config.pretrained);
  }

  RunOutput out;
  out.seed = seed;
  out.d_repr = d_repr;
  out.dir = dir;
  out.manifest = dir / "manifest.json";
  out.config = dir / "run.cfg";
  out.metrics = dir / "metrics.csv";
  out.eval = dir / "eval.csv";
  out.summary = dir / "summary.json";
  out.checkpoint = dir / "checkpoint.t2tl";

  const bool t_opti_given = config.t_opti.has_value();
  if (t_opti_given) {
    out.t_opti = std::max(*config.t_opti, 1);
  } else {
    auto tasks = std::make_shared<const ltl::TaskSet>(formula, environment->alphabet());
    out.t_opti = search_t_opti(*environment, tasks, config.train.max_steps, seed);
  }

  std::vector<int> dump_episodes;
  if (neural && config.attention && config.train.episodes > 0) {
    dump_episodes = {0, config.train.episodes / 2, config.train.episodes - 1};
    dump_episodes.erase(std::unique(dump_episodes.begin(), dump_episodes.end()), dump_episodes.end());
    for (int e : dump_episodes) out.attention.push_back(dir / ("attention_ep" + std::to_string(e) + ".txt"));
  }

  const KeyValues effective = effective_config(config);
  const std::string config_text = effective.to_text();
  fs::create_directories(dir);
  write_text(out.config, config_text);

  json manifest;
  manifest["schema"] = 1;
  manifest["command"] = "train";
  manifest["seed"] = seed;
  manifest["d_repr"] = d_repr ? json(*d_repr) : json(nullptr);
  manifest["config"] = config_json(effective);
  std::string hashed;  // the output location is not an input
  for (const auto& [k, v] : effective.entries()) {
    if (k != "out") hashed += k + " = " + v + "\n";
  }
  manifest["input_hash"] = input_hash(hashed, spec.layout, config.pretrained);
  manifest["t_opti"] = out.t_opti;
  manifest["t_opti_source"] = t_opti_given ? "config" : "search";
  json files = {{"config", out.config.filename().string()},
                {"metrics", out.metrics.filename().string()},
                {"eval", out.eval.filename().string()},
                {"summary", out.summary.filename().string()},
                {"checkpoint", out.checkpoint.filename().string()}};
  files["attention"] = json::array();
  for (const auto& p : out.attention) files["attention"].push_back(p.filename().string());
  manifest["outputs"] = files;
  manifest["csv_schemas"] = schemas_json();
  manifest["created"] = utc_now();
  manifest["relaunch"] = "t2tl train --config " + out.config.string();
  write_text(out.manifest, manifest.dump(2) + "\n");

  if (log) {
    *log << "run " << dir.string() << ": " << (neural ? "neural" : "tabular") << ", "
         << config.train.episodes << " episodes, t_opti " << out.t_opti << "\n";
  }

  rl::TrainHooks hooks;
  hooks.pretrained = pretrained ? &*pretrained : nullptr;
  hooks.t_opti = out.t_opti;
  hooks.record_wall_ms = config.wall_ms;
  if (!dump_episodes.empty()) {
    hooks.on_episode = [&](int episode, const rl::QAgent& agent) {
      const auto it = std::find(dump_episodes.begin(), dump_episodes.end(), episode);
      if (it == dump_episodes.end()) return;
      const auto dump = encoder_dump(agent.encoder(), agent.online(), formula, "episode=" + std::to_string(episode));
      std::ofstream f(out.attention[static_cast<std::size_t>(it - dump_episodes.begin())]);
      nn::write_attention_dump(f, dump);
    };
  }

  rl::TrainResult result = rl::train(config.train, [&] { return make_environment(spec, seed); }, formula, hooks);

  {
    std::ofstream f(out.metrics);
    write_metrics_csv(f, result.metrics);
  }
  {
    std::ofstream f(out.eval);
    write_eval_csv(f, result.evals);
  }
  const std::vector<std::pair<std::string, std::string>> extra{{"seed", std::to_string(seed)},
                                                               {"formula", ltl::format(formula)}};
  if (neural) {
    rl::save_checkpoint(out.checkpoint, rl::agent_checkpoint(*result.agent, spec.name, extra));
    out.final_eval = greedy_summary(*result.mdp, *result.agent, seed, config.eval_final, out.t_opti,
                                    config.train.gamma);
  } else {
    rl::save_checkpoint(out.checkpoint, rl::tabular_checkpoint(*result.table, *result.tasks, spec.name, extra));
    out.final_eval = greedy_summary(*result.mdp, *result.table, seed, config.eval_final, out.t_opti,
                                    config.train.gamma);
  }
  out.episodes_to_success = rl::episodes_to_success(result.evals, 0.9, 10);

  json summary;
  summary["final_eval"] = summary_json(out.final_eval);
  summary["episodes_to_success"] = out.episodes_to_success ? json(*out.episodes_to_success) : json(nullptr);
  summary["episodes"] = result.metrics.size();
  write_text(out.summary, summary.dump(2) + "\n");

  if (log) {
    *log << "  final greedy success " << num(out.final_eval.success_rate) << ", mean performance "
         << num(out.final_eval.mean_performance) << "\n";
  }
  return out;
}

PretrainOutput run_pretrain(const ExperimentConfig& config, std::uint64_t seed, const fs::path& dir,
                            std::ostream* log) {
  ltl::Alphabet alphabet;
  if (!config.pretrain_alphabet.empty()) {
    try {
      alphabet = ltl::Alphabet(config.pretrain_alphabet);
    } catch (const Error& e) {
      throw ConfigInvalid("pretrain.alphabet", e.what());
    }
  } else {
    alphabet = make_environment(config.env, seed)->alphabet();
  }
  rl::PretrainConfig pc = config.pretrain;
  pc.train.seed = seed;
  pc.train.validate();
  const rl::FormulaSampler sampler(alphabet, config.sampler);

  PretrainOutput out;
  out.checkpoint = dir / "encoder.t2tl";
  out.curve = dir / "pretrain.csv";
  fs::create_directories(dir);

  const rl::PretrainResult result = rl::pretrain(alphabet, sampler, pc);
  out.converged = result.converged;
  out.episodes = result.episodes;
  out.final_rolling = result.curve.empty() ? 0.0 : result.curve.back().rolling;

  std::ofstream f(out.curve);
  f << "episode,success,rolling\n";
  for (const auto& p : result.curve) f << p.episode << ',' << (p.success ? 1 : 0) << ',' << num(p.rolling) << '\n';
  f.close();
  rl::save_checkpoint(out.checkpoint,
                      rl::encoder_checkpoint(*result.agent, {{"seed", std::to_string(seed)},
                                                             {"pretrain.episodes", std::to_string(result.episodes)},
                                                             {"pretrain.converged", result.converged ? "1" : "0"}}));
  if (log) {
    *log << "pretrain: " << result.episodes << " episodes, rolling success " << num(out.final_rolling)
         << (result.converged ? ", converged\n" : ", not converged\n");
  }
  return out;
}

rl::EvalSummary run_eval(const rl::Checkpoint& checkpoint, const ExperimentConfig& config, std::uint64_t seed,
                         int episodes) {
  auto environment = make_environment(config.env, seed);
  const ltl::Formula formula = task_formula(config, *environment);
  auto tasks = std::make_shared<const ltl::TaskSet>(formula, environment->alphabet());
  const int t_opti = config.t_opti ? std::max(*config.t_opti, 1)
                                   : search_t_opti(*environment, tasks, config.train.max_steps, seed);
  tl::TlMdp mdp(std::move(environment), tasks, config.train.max_steps);
  switch (checkpoint.kind) {
    case rl::CheckpointKind::Agent: {
      const auto agent = rl::agent_from_checkpoint(checkpoint, mdp.environment());
      return greedy_summary(mdp, *agent, seed, episodes, t_opti, config.train.gamma);
    }
    case rl::CheckpointKind::Tabular: {
      const rl::TabularQ table = rl::table_from_checkpoint(checkpoint, mdp.environment(), *tasks);
      return greedy_summary(mdp, table, seed, episodes, t_opti, config.train.gamma);
    }
    case rl::CheckpointKind::Encoder:
      break;
  }
  throw CheckpointMismatch("an encoder-only checkpoint has no policy to evaluate");
}

nn::AttentionDump attention_for(const rl::Checkpoint& checkpoint, const std::string& text, const std::string& tag) {
  if (checkpoint.kind == rl::CheckpointKind::Tabular) {
    throw CheckpointMismatch("a tabular checkpoint has no formula encoder");
  }
  const nn::Vocab vocab(checkpoint.vocab);
  const auto& fixed = nn::Vocab::fixed_tokens();
  if (checkpoint.vocab.size() < fixed.size()) throw CheckpointMismatch("vocabulary is shorter than the fixed tokens");
  const ltl::Alphabet alphabet(std::vector<std::string>(checkpoint.vocab.begin() + static_cast<long>(fixed.size()),
                                                        checkpoint.vocab.end()));
  ltl::Formula formula;
  try {
    formula = ltl::parse(text, alphabet);
  } catch (const UnknownProposition& e) {
    throw UnknownToken("token '" + e.name() + "' is not in the checkpoint vocabulary");
  }
  const nn::FormulaEncoder encoder(vocab, rl::network_from_echo(checkpoint).formula);
  return encoder_dump(encoder, checkpoint.tensors, formula, tag);
}

std::vector<HeadFocus> head_focus(const nn::AttentionDump& dump) {
  std::map<std::pair<int, int>, std::vector<std::pair<std::string, double>>> totals;
  for (const auto& r : dump.rows) {
    auto& v = totals[{r.layer, r.head}];
    auto it = std::find_if(v.begin(), v.end(), [&](const auto& p) { return p.first == r.key_token; });
    if (it == v.end()) {
      v.emplace_back(r.key_token, r.weight);
    } else {
      it->second += r.weight;
    }
  }
  std::vector<HeadFocus> out;
  for (const auto& [key, v] : totals) {
    const auto best = std::max_element(v.begin(), v.end(), [](const auto& a, const auto& b) { return a.second < b.second; });
    out.push_back({key.first, key.second, best->first, best->second});
  }
  return out;
}

}  // namespace t2tl::harness
