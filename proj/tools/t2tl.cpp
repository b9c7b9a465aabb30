// SPDX-License-Identifier: Apache-2.0
// t2tl command-line front end.  Exit codes: 0 success, 2 config error,
// 3 runtime error, 4 budget warning.
#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "t2tl/error.hpp"
#include "t2tl/harness/config.hpp"
#include "t2tl/harness/experiment.hpp"
#include "t2tl/ltl/parser.hpp"
#include "t2tl/ltl/progression.hpp"
#include "t2tl/rl/checkpoint.hpp"

namespace {

namespace fs = std::filesystem;
using namespace t2tl;

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;
constexpr int kExitBudget = 4;

// Alphabet for the formula commands: --props, else the configured
// environment, else every identifier in the formula in order of appearance.
ltl::Alphabet formula_alphabet(const std::string& formula, const std::string& props, const std::string& config) {
  if (!props.empty()) {
    harness::KeyValues kv;
    kv.set("props", props);
    return ltl::Alphabet(kv.get_list("props"));
  }
  if (!config.empty()) {
    const auto exp = harness::load_experiment(config);
    return harness::make_environment(exp.env, exp.seeds.front())->alphabet();
  }
  std::vector<std::string> names;
  for (const auto& t : ltl::tokenize(formula)) {
    if (t.kind == ltl::TokenKind::Ident && std::find(names.begin(), names.end(), t.text) == names.end()) {
      names.push_back(t.text);
    }
  }
  return ltl::Alphabet(names);
}

// "{a,b}", "a,b" or "{}".
ltl::LabelSet parse_label(std::string text, const ltl::Alphabet& alphabet) {
  if (!text.empty() && text.front() == '{') text.erase(text.begin());
  if (!text.empty() && text.back() == '}') text.pop_back();
  std::vector<std::string> names;
  if (!text.empty()) {
    harness::KeyValues kv;
    kv.set("label", text);
    names = kv.get_list("label");
  }
  return ltl::LabelSet::of(alphabet, names);
}

std::string label_text(ltl::LabelSet label, const ltl::Alphabet& alphabet) {
  std::string out = "{";
  const auto names = label.names(alphabet);
  for (std::size_t i = 0; i < names.size(); ++i) out += (i ? "," : "") + names[i];
  return out + "}";
}

harness::ExperimentConfig load_with_overrides(const std::string& path, const std::optional<std::uint64_t>& seed,
                                              const std::string& out) {
  auto config = harness::load_experiment(path);
  if (seed) config.seeds = {*seed};
  if (!out.empty()) config.out = out;
  return config;
}

void print_summary(const rl::EvalSummary& s) {
  std::cout << "episodes            " << s.episodes << "\n"
            << "t_opti              " << s.t_opti << "\n"
            << "success_rate        " << s.success_rate << "\n"
            << "mean_performance    " << s.mean_performance << "\n"
            << "median_performance  " << s.median_performance << "\n"
            << "mean_steps          " << s.mean_steps << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Transformer-encoded LTL task learning"};
  app.require_subcommand(1);

  std::string formula;
  std::string props;
  std::string config_path;
  std::string out;
  std::string checkpoint_path;
  std::vector<std::string> labels;
  std::optional<std::uint64_t> seed;
  int episodes = -1;

  auto* parse_cmd = app.add_subcommand("parse", "Parse a formula and print its canonical form");
  parse_cmd->add_option("formula", formula, "LTL formula")->required();
  parse_cmd->add_option("--props", props, "Comma-separated propositions");
  parse_cmd->add_option("--config", config_path, "Take propositions from an experiment config");

  auto* progress_cmd = app.add_subcommand("progress", "Progress a formula through a sequence of labels");
  progress_cmd->add_option("formula", formula, "LTL formula")->required();
  progress_cmd->add_option("labels", labels, "Labels such as {a,b} or {}");
  progress_cmd->add_option("--props", props, "Comma-separated propositions");
  progress_cmd->add_option("--config", config_path, "Take propositions from an experiment config");

  auto* closure_cmd = app.add_subcommand("closure", "List the progression closure of a task");
  closure_cmd->add_option("formula", formula, "LTL formula")->required();
  closure_cmd->add_option("--props", props, "Comma-separated propositions");
  closure_cmd->add_option("--config", config_path, "Take propositions from an experiment config");

  auto* train_cmd = app.add_subcommand("train", "Train every configured seed");
  train_cmd->add_option("--config", config_path, "Experiment config")->required();
  train_cmd->add_option("--seed", seed, "Run this seed only");
  train_cmd->add_option("--out", out, "Output directory");

  auto* pretrain_cmd = app.add_subcommand("pretrain", "Pretrain the formula encoder");
  pretrain_cmd->add_option("--config", config_path, "Experiment config")->required();
  pretrain_cmd->add_option("--seed", seed, "Seed (default: first configured seed)");
  pretrain_cmd->add_option("--out", out, "Output directory (default: <out>/pretrain)");

  auto* eval_cmd = app.add_subcommand("eval", "Greedy evaluation of a checkpoint");
  eval_cmd->add_option("--config", config_path, "Experiment config")->required();
  eval_cmd->add_option("--checkpoint", checkpoint_path, "Agent or tabular checkpoint")->required();
  eval_cmd->add_option("--seed", seed, "Seed (default: first configured seed)");
  eval_cmd->add_option("--episodes", episodes, "Greedy episodes (default: eval.final)");
  eval_cmd->add_option("--out", out, "Per-episode CSV to write");

  auto* attention_cmd = app.add_subcommand("attention", "Dump formula-encoder attention");
  attention_cmd->add_option("--checkpoint", checkpoint_path, "Agent or encoder checkpoint")->required();
  attention_cmd->add_option("--formula", formula, "LTL formula")->required();
  attention_cmd->add_option("--out", out, "Dump file (default: attention.txt)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (parse_cmd->parsed()) {
      const auto alphabet = formula_alphabet(formula, props, config_path);
      std::cout << ltl::format(ltl::parse(formula, alphabet)) << "\n";
    } else if (progress_cmd->parsed()) {
      const auto alphabet = formula_alphabet(formula, props, config_path);
      ltl::Formula f = ltl::parse(formula, alphabet);
      std::cout << "   " << ltl::format(f) << "\n";
      for (const auto& text : labels) {
        if (f.is_constant()) break;
        const auto label = parse_label(text, alphabet);
        f = ltl::progress_task(label, f);
        std::cout << label_text(label, alphabet) << " " << ltl::format(f) << "\n";
      }
    } else if (closure_cmd->parsed()) {
      const auto alphabet = formula_alphabet(formula, props, config_path);
      const ltl::TaskSet tasks(ltl::parse(formula, alphabet), alphabet);
      std::cout << tasks.size() << " members\n";
      for (std::size_t i = 0; i < tasks.size(); ++i) {
        std::cout << i << "  " << ltl::format(tasks.member(static_cast<int>(i))) << "\n";
      }
    } else if (train_cmd->parsed()) {
      const auto config = load_with_overrides(config_path, seed, out);
      const auto runs = harness::run_experiment(config, &std::cout);
      for (const auto& r : runs) std::cout << r.metrics.string() << "\n";
    } else if (pretrain_cmd->parsed()) {
      const auto config = load_with_overrides(config_path, seed, "");
      const fs::path dir = out.empty() ? config.out / "pretrain" : fs::path(out);
      const auto result = harness::run_pretrain(config, config.seeds.front(), dir, &std::cout);
      std::cout << result.checkpoint.string() << "\n" << result.curve.string() << "\n";
      if (!result.converged) {
        std::cerr << "BudgetExhausted: rolling success " << result.final_rolling << " below "
                  << config.pretrain.threshold << " after " << result.episodes << " episodes\n";
        return kExitBudget;
      }
    } else if (eval_cmd->parsed()) {
      const auto config = load_with_overrides(config_path, seed, "");
      const auto checkpoint = rl::load_checkpoint(checkpoint_path);
      const int n = episodes >= 0 ? episodes : config.eval_final;
      const auto summary = harness::run_eval(checkpoint, config, config.seeds.front(), n);
      print_summary(summary);
      if (!out.empty()) {
        std::ofstream f(out);
        harness::write_episodes_csv(f, summary);
      }
    } else if (attention_cmd->parsed()) {
      const auto checkpoint = rl::load_checkpoint(checkpoint_path);
      const auto dump = harness::attention_for(checkpoint, formula, "cli");
      const fs::path path = out.empty() ? fs::path("attention.txt") : fs::path(out);
      std::ofstream f(path);
      nn::write_attention_dump(f, dump);
      f.close();
      for (const auto& h : harness::head_focus(dump)) {
        std::cout << "layer " << h.layer << " head " << h.head << ": " << h.token << " (" << h.weight << ")\n";
      }
      std::cout << "max row error " << nn::max_row_error(dump) << "\n" << path.string() << "\n";
    }
  } catch (const ConfigInvalid& e) {
    std::cerr << "ConfigInvalid: " << e.what() << "\n";
    return kExitConfig;
  } catch (const BudgetExhausted& e) {
    std::cerr << "BudgetExhausted: " << e.what() << "\n";
    return kExitBudget;
  } catch (const LexError& e) {
    std::cerr << "LexError: " << e.what() << "\n";
    return kExitConfig;
  } catch (const ParseError& e) {
    std::cerr << "ParseError: " << e.what() << "\n";
    return kExitConfig;
  } catch (const UnknownProposition& e) {
    std::cerr << "UnknownProposition: " << e.what() << "\n";
    return kExitConfig;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return 0;
}
