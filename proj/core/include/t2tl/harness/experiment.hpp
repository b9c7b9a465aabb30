// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "t2tl/harness/config.hpp"
#include "t2tl/nn/attention_dump.hpp"
#include "t2tl/rl/evaluate.hpp"
#include "t2tl/rl/train.hpp"

namespace t2tl::harness {

inline constexpr int kCsvSchemaVersion = 1;

// Column names of each emitted CSV, by schema name: "metrics", "eval",
// "pretrain" and "episodes".
const std::vector<std::string>& csv_schema(const std::string& name);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

// Reads a CSV and checks it against a schema: the exact header, one numeric
// field per column on every row.  Throws SchemaMismatch.
CsvTable read_csv(std::istream& in, const std::string& schema);
CsvTable read_csv(const std::filesystem::path& path, const std::string& schema);

void write_metrics_csv(std::ostream& out, const std::vector<rl::EpisodeMetrics>& metrics);
void write_eval_csv(std::ostream& out, const std::vector<rl::EvalPoint>& evals);
void write_episodes_csv(std::ostream& out, const rl::EvalSummary& summary);

// Git blob hash (SHA-1 over "blob <size>\0" + content) of the run inputs:
// config text, then the layout and pretrained-checkpoint bytes, each framed
// by its name and byte count.
std::string input_hash(const std::string& config_text, const std::filesystem::path& layout,
                       const std::filesystem::path& pretrained);

struct RunOutput {
  std::uint64_t seed = 0;
  std::optional<int> d_repr;  // set inside a dimension sweep
  std::filesystem::path dir;
  std::filesystem::path manifest;
  std::filesystem::path config;
  std::filesystem::path metrics;
  std::filesystem::path eval;
  std::filesystem::path summary;
  std::filesystem::path checkpoint;
  std::vector<std::filesystem::path> attention;
  int t_opti = 1;
  rl::EvalSummary final_eval;
  std::optional<int> episodes_to_success;  // 0.9 mean over 10 evaluation points
};

// Directory of one run below config.out.
std::filesystem::path run_directory(const ExperimentConfig& config, std::uint64_t seed,
                                    std::optional<int> d_repr);

// Trains every seed (and every d_repr of a sweep).  Validates first, so an
// invalid config leaves no output directory behind.  Progress lines go to
// `log` when given.
std::vector<RunOutput> run_experiment(const ExperimentConfig& config, std::ostream* log = nullptr);

// One run into `dir`.  The manifest is written before training starts.
RunOutput run_one(const ExperimentConfig& config, std::uint64_t seed, std::optional<int> d_repr,
                  const std::filesystem::path& dir, std::ostream* log = nullptr);

struct PretrainOutput {
  std::filesystem::path checkpoint;
  std::filesystem::path curve;
  bool converged = false;
  int episodes = 0;
  double final_rolling = 0.0;
};

// Pretrains the formula encoder on the single-state MDP over
// pretrain.alphabet (the environment's alphabet when unset) and writes
// encoder.t2tl and pretrain.csv into `dir`.  The checkpoint is written even
// when the budget runs out.
PretrainOutput run_pretrain(const ExperimentConfig& config, std::uint64_t seed,
                            const std::filesystem::path& dir, std::ostream* log = nullptr);

// Greedy evaluation of a saved agent or table on the configured task.
rl::EvalSummary run_eval(const rl::Checkpoint& checkpoint, const ExperimentConfig& config,
                         std::uint64_t seed, int episodes);

// One forward pass of `formula` through the checkpoint's formula encoder.
// Propositions missing from the vocabulary raise UnknownToken.
nn::AttentionDump attention_for(const rl::Checkpoint& checkpoint, const std::string& formula,
                                const std::string& tag);

struct HeadFocus {
  int layer = 0;
  int head = 0;
  std::string token;
  double weight = 0.0;  // summed over queries
};

// Most attended key token of each (layer, head).
std::vector<HeadFocus> head_focus(const nn::AttentionDump& dump);

}  // namespace t2tl::harness
