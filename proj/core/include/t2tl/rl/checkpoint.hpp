// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "t2tl/env/environment.hpp"
#include "t2tl/nn/params.hpp"
#include "t2tl/rl/agent.hpp"
#include "t2tl/rl/tabular.hpp"

namespace t2tl::rl {

enum class CheckpointKind : std::uint32_t { Agent = 1, Encoder = 2, Tabular = 3 };

inline constexpr std::uint32_t kCheckpointVersion = 1;

// Binary layout (little endian):
//   "T2TL" | u32 version | u32 kind
//   u32 n, then n x (str key, str value)      config echo
//   u32 n, then n x str                       vocabulary tokens in id order
//   u32 n, then n x (str name, u32 rows, u32 cols, rows*cols f64 row-major)
// where str is a u32 byte length followed by the bytes.
struct Checkpoint {
  CheckpointKind kind = CheckpointKind::Agent;
  std::vector<std::pair<std::string, std::string>> config;
  std::vector<std::string> vocab;
  nn::ParamSet tensors;

  const std::string* find(const std::string& key) const;
  const std::string& get(const std::string& key) const;  // throws CheckpointMismatch
};

void write_checkpoint(std::ostream& out, const Checkpoint& checkpoint);
Checkpoint read_checkpoint(std::istream& in);
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);
Checkpoint load_checkpoint(const std::filesystem::path& path);

// Network settings as config-echo pairs and back.
std::vector<std::pair<std::string, std::string>> network_echo(const NetworkConfig& config);
NetworkConfig network_from_echo(const Checkpoint& checkpoint);

Checkpoint agent_checkpoint(const QAgent& agent, const std::string& env_kind,
                            std::vector<std::pair<std::string, std::string>> extra = {});
// Formula-encoder tensors only.
Checkpoint encoder_checkpoint(const QAgent& agent,
                              std::vector<std::pair<std::string, std::string>> extra = {});
Checkpoint tabular_checkpoint(const TabularQ& table, const ltl::TaskSet& tasks,
                              const std::string& env_kind,
                              std::vector<std::pair<std::string, std::string>> extra = {});

// Rebuilds an agent for `env`.  The stored vocabulary must equal the one the
// environment's alphabet produces; the first differing proposition is named
// in the CheckpointMismatch.
std::unique_ptr<QAgent> agent_from_checkpoint(const Checkpoint& checkpoint, const env::Environment& env);

// Rebuilds a table for `tasks`, matching stored members by formula text.
TabularQ table_from_checkpoint(const Checkpoint& checkpoint, const env::Environment& env,
                               const ltl::TaskSet& tasks);

// Copies pretrained formula-encoder tensors into the agent's online and
// target parameters.  Embedding rows are matched by token name, so tokens
// absent from the checkpoint keep their initial values.  Every other tensor
// must match in shape.  Returns the number of embedding rows copied.
int load_pretrained_encoder(QAgent& agent, const Checkpoint& checkpoint);

}  // namespace t2tl::rl
