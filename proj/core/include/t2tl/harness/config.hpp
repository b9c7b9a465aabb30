// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "t2tl/env/environment.hpp"
#include "t2tl/env/grid.hpp"
#include "t2tl/ltl/formula.hpp"
#include "t2tl/rl/config.hpp"
#include "t2tl/rl/pretrain.hpp"

namespace t2tl::harness {

// Flat UTF-8 "key = value" text.  '#' starts a comment line; blank lines are
// skipped; a repeated key is an error.  Keys are read through typed getters
// that throw ConfigInvalid naming the key.
class KeyValues {
 public:
  static KeyValues parse(std::string_view text);
  static KeyValues load(const std::filesystem::path& path);

  bool has(const std::string& key) const;
  const std::string& text(const std::string& key) const;  // throws when missing
  std::string get(const std::string& key, const std::string& fallback) const;
  int get_int(const std::string& key, int fallback) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
  double get_double(const std::string& key, double fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;  // on/off, true/false, yes/no, 1/0
  std::vector<std::string> get_list(const std::string& key) const;  // comma separated, trimmed
  std::vector<int> get_int_list(const std::string& key, std::vector<int> fallback) const;

  void set(const std::string& key, const std::string& value);
  const std::vector<std::pair<std::string, std::string>>& entries() const noexcept { return entries_; }
  // Keys present but not in `known`.
  std::vector<std::string> unknown(const std::set<std::string>& known) const;
  std::string to_text() const;

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
};

struct EnvSpec {
  std::string name = "office";          // office | minicraft | single_state
  std::filesystem::path layout;         // grid layout file; empty uses the built-in office map
  int patch = 5;
  env::MiniCraftOptions minicraft{};
  std::vector<std::string> alphabet;    // single_state propositions
};

struct ExperimentConfig {
  EnvSpec env{};
  std::string formula;
  rl::TrainConfig train{};
  std::filesystem::path pretrained;     // optional formula-encoder checkpoint
  std::vector<std::uint64_t> seeds{1};
  std::filesystem::path out = "runs";
  std::optional<int> t_opti;
  bool attention = true;
  bool wall_ms = false;
  std::vector<int> sweep_d_repr;
  int eval_final = 100;                 // greedy episodes after training

  rl::PretrainConfig pretrain{};
  std::vector<std::string> pretrain_alphabet;
  rl::SamplerConfig sampler{};

  KeyValues source;                     // keys as read
};

// Every key the parser understands.
const std::set<std::string>& known_keys();

// Relative paths are resolved against `base_dir`.
ExperimentConfig experiment_from(const KeyValues& kv, const std::filesystem::path& base_dir = {});
ExperimentConfig load_experiment(const std::filesystem::path& path);

// Fresh environment for a run.  MiniCraft layouts are drawn from `seed`.
std::unique_ptr<env::Environment> make_environment(const EnvSpec& spec, std::uint64_t seed);

// Parses the task over the environment's alphabet and builds its closure,
// mapping parse and closure errors to ConfigInvalid on "formula".
ltl::Formula task_formula(const ExperimentConfig& config, const env::Environment& environment);

// Checks everything that can fail before any output is written.
void validate(const ExperimentConfig& config);

// Effective configuration as key = value text, enough to relaunch one run.
KeyValues effective_config(const ExperimentConfig& config);

}  // namespace t2tl::harness
