// SPDX-License-Identifier: Apache-2.0
#include "t2tl/rl/checkpoint.hpp"

#include <array>
#include <bit>
#include <fstream>
#include <sstream>

#include "t2tl/error.hpp"
#include "t2tl/ltl/formula.hpp"
#include "t2tl/nn/vocab.hpp"

namespace t2tl::rl {

namespace {

constexpr std::array<char, 4> kMagic{'T', '2', 'T', 'L'};
constexpr std::uint32_t kMaxCount = 1U << 28;

void put_u32(std::ostream& out, std::uint32_t v) {
  std::array<char, 4> b{};
  for (int i = 0; i < 4; ++i) b[static_cast<std::size_t>(i)] = static_cast<char>((v >> (8 * i)) & 0xFFU);
  out.write(b.data(), 4);
}

void put_f64(std::ostream& out, double d) {
  const auto v = std::bit_cast<std::uint64_t>(d);
  std::array<char, 8> b{};
  for (int i = 0; i < 8; ++i) b[static_cast<std::size_t>(i)] = static_cast<char>((v >> (8 * i)) & 0xFFU);
  out.write(b.data(), 8);
}

void put_str(std::ostream& out, const std::string& s) {
  put_u32(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

void need(std::istream& in, const char* what) {
  if (!in) throw CheckpointMismatch(std::string("truncated checkpoint while reading ") + what);
}

std::uint32_t get_u32(std::istream& in, const char* what) {
  std::array<unsigned char, 4> b{};
  in.read(reinterpret_cast<char*>(b.data()), 4);
  need(in, what);
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | b[static_cast<std::size_t>(i)];
  return v;
}

double get_f64(std::istream& in) {
  std::array<unsigned char, 8> b{};
  in.read(reinterpret_cast<char*>(b.data()), 8);
  need(in, "tensor data");
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | b[static_cast<std::size_t>(i)];
  return std::bit_cast<double>(v);
}

std::string get_str(std::istream& in, const char* what) {
  const std::uint32_t n = get_u32(in, what);
  if (n > kMaxCount) throw CheckpointMismatch(std::string("implausible length for ") + what);
  std::string s(n, '\0');
  in.read(s.data(), static_cast<std::streamsize>(n));
  need(in, what);
  return s;
}

std::string join_ints(const std::vector<int>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + std::to_string(v[i]);
  return out;
}

int to_int(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const int v = std::stoi(value, &used);
    if (used == value.size()) return v;
  } catch (const std::exception&) {
  }
  throw CheckpointMismatch("config echo '" + key + "' is not an integer: " + value);
}

std::vector<std::pair<std::string, std::string>> encoder_echo(const std::string& prefix,
                                                              const nn::EncoderConfig& c) {
  return {{prefix + ".layers", std::to_string(c.layers)},
          {prefix + ".heads", std::to_string(c.heads)},
          {prefix + ".d_model", std::to_string(c.d_model)},
          {prefix + ".d_ff", std::to_string(c.d_ff)},
          {prefix + ".d_out", std::to_string(c.d_out)}};
}

nn::EncoderConfig encoder_from(const Checkpoint& ck, const std::string& prefix) {
  nn::EncoderConfig c;
  c.layers = to_int(prefix + ".layers", ck.get(prefix + ".layers"));
  c.heads = to_int(prefix + ".heads", ck.get(prefix + ".heads"));
  c.d_model = to_int(prefix + ".d_model", ck.get(prefix + ".d_model"));
  c.d_ff = to_int(prefix + ".d_ff", ck.get(prefix + ".d_ff"));
  c.d_out = to_int(prefix + ".d_out", ck.get(prefix + ".d_out"));
  return c;
}

void append(std::vector<std::pair<std::string, std::string>>& to,
            std::vector<std::pair<std::string, std::string>> from) {
  for (auto& kv : from) to.push_back(std::move(kv));
}

void check_vocab(const std::vector<std::string>& stored, const nn::Vocab& expected) {
  const auto& want = expected.tokens();
  const std::size_t n = std::max(stored.size(), want.size());
  for (std::size_t i = 0; i < n; ++i) {
    const bool has_s = i < stored.size();
    const bool has_w = i < want.size();
    if (has_s && has_w && stored[i] == want[i]) continue;
    if (has_s && !expected.contains(stored[i])) {
      throw CheckpointMismatch("checkpoint proposition '" + stored[i] +
                               "' is not in the environment alphabet");
    }
    if (has_w) {
      throw CheckpointMismatch("environment proposition '" + want[i] +
                               "' is missing from the checkpoint vocabulary or out of order");
    }
    throw CheckpointMismatch("checkpoint vocabulary has extra token '" + stored[i] + "'");
  }
}

}  // namespace

const std::string* Checkpoint::find(const std::string& key) const {
  for (const auto& [k, v] : config) {
    if (k == key) return &v;
  }
  return nullptr;
}

const std::string& Checkpoint::get(const std::string& key) const {
  if (const auto* v = find(key)) return *v;
  throw CheckpointMismatch("checkpoint config echo lacks '" + key + "'");
}

void write_checkpoint(std::ostream& out, const Checkpoint& ck) {
  out.write(kMagic.data(), 4);
  put_u32(out, kCheckpointVersion);
  put_u32(out, static_cast<std::uint32_t>(ck.kind));
  put_u32(out, static_cast<std::uint32_t>(ck.config.size()));
  for (const auto& [k, v] : ck.config) {
    put_str(out, k);
    put_str(out, v);
  }
  put_u32(out, static_cast<std::uint32_t>(ck.vocab.size()));
  for (const auto& t : ck.vocab) put_str(out, t);
  put_u32(out, static_cast<std::uint32_t>(ck.tensors.size()));
  for (const auto& t : ck.tensors.tensors()) {
    put_str(out, t.name);
    put_u32(out, static_cast<std::uint32_t>(t.value.rows()));
    put_u32(out, static_cast<std::uint32_t>(t.value.cols()));
    for (Eigen::Index r = 0; r < t.value.rows(); ++r) {
      for (Eigen::Index c = 0; c < t.value.cols(); ++c) put_f64(out, t.value(r, c));
    }
  }
  if (!out) throw Error("failed to write checkpoint");
}

Checkpoint read_checkpoint(std::istream& in) {
  std::array<char, 4> magic{};
  in.read(magic.data(), 4);
  if (!in || magic != kMagic) throw CheckpointMismatch("not a checkpoint: bad magic bytes");
  const std::uint32_t version = get_u32(in, "version");
  if (version != kCheckpointVersion) {
    throw CheckpointMismatch("unsupported checkpoint version " + std::to_string(version));
  }
  Checkpoint ck;
  const std::uint32_t kind = get_u32(in, "kind");
  if (kind < 1 || kind > 3) throw CheckpointMismatch("unknown checkpoint kind " + std::to_string(kind));
  ck.kind = static_cast<CheckpointKind>(kind);
  const std::uint32_t n_cfg = get_u32(in, "config count");
  if (n_cfg > kMaxCount) throw CheckpointMismatch("implausible config count");
  for (std::uint32_t i = 0; i < n_cfg; ++i) {
    std::string k = get_str(in, "config key");
    std::string v = get_str(in, "config value");
    ck.config.emplace_back(std::move(k), std::move(v));
  }
  const std::uint32_t n_vocab = get_u32(in, "vocab count");
  if (n_vocab > kMaxCount) throw CheckpointMismatch("implausible vocab count");
  for (std::uint32_t i = 0; i < n_vocab; ++i) ck.vocab.push_back(get_str(in, "vocab token"));
  const std::uint32_t n_t = get_u32(in, "tensor count");
  if (n_t > kMaxCount) throw CheckpointMismatch("implausible tensor count");
  for (std::uint32_t i = 0; i < n_t; ++i) {
    const std::string name = get_str(in, "tensor name");
    const std::uint32_t rows = get_u32(in, "tensor rows");
    const std::uint32_t cols = get_u32(in, "tensor cols");
    if (static_cast<std::uint64_t>(rows) * cols > kMaxCount) {
      throw CheckpointMismatch("implausible shape for tensor " + name);
    }
    nn::Mat m(rows, cols);
    for (std::uint32_t r = 0; r < rows; ++r) {
      for (std::uint32_t c = 0; c < cols; ++c) m(r, c) = get_f64(in);
    }
    if (ck.tensors.contains(name)) throw CheckpointMismatch("duplicate tensor " + name);
    ck.tensors.add(name, std::move(m));
  }
  if (in.peek() != std::char_traits<char>::eof()) throw CheckpointMismatch("trailing bytes after checkpoint");
  return ck;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ck) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  write_checkpoint(out, ck);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open checkpoint " + path.string());
  return read_checkpoint(in);
}

std::vector<std::pair<std::string, std::string>> network_echo(const NetworkConfig& c) {
  auto out = encoder_echo("formula", c.formula);
  out.emplace_back("context", c.context ? "on" : "off");
  if (c.context) {
    out.emplace_back("context.window", std::to_string(c.window));
    append(out, encoder_echo("context", c.context_encoder));
  }
  out.emplace_back("qnet.hidden", join_ints(c.hidden));
  return out;
}

NetworkConfig network_from_echo(const Checkpoint& ck) {
  NetworkConfig c;
  c.formula = encoder_from(ck, "formula");
  c.context = ck.get("context") == "on";
  if (c.context) {
    c.window = to_int("context.window", ck.get("context.window"));
    c.context_encoder = encoder_from(ck, "context");
  }
  c.hidden.clear();
  std::stringstream ss(ck.get("qnet.hidden"));
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) c.hidden.push_back(to_int("qnet.hidden", item));
  }
  return c;
}

Checkpoint agent_checkpoint(const QAgent& agent, const std::string& env_kind,
                            std::vector<std::pair<std::string, std::string>> extra) {
  Checkpoint ck;
  ck.kind = CheckpointKind::Agent;
  ck.config = {{"env", env_kind},
               {"feature_size", std::to_string(agent.feature_size())},
               {"action_count", std::to_string(agent.action_count())},
               {"target_sync", std::to_string(agent.target_sync())}};
  append(ck.config, network_echo(agent.config()));
  append(ck.config, std::move(extra));
  ck.vocab = agent.vocab().tokens();
  ck.tensors = agent.online();
  return ck;
}

Checkpoint encoder_checkpoint(const QAgent& agent,
                              std::vector<std::pair<std::string, std::string>> extra) {
  Checkpoint ck;
  ck.kind = CheckpointKind::Encoder;
  ck.config = encoder_echo("formula", agent.config().formula);
  append(ck.config, std::move(extra));
  ck.vocab = agent.vocab().tokens();
  const std::string prefix = agent.encoder().prefix() + ".";
  for (const auto& t : agent.online().tensors()) {
    if (t.name.rfind(prefix, 0) == 0) ck.tensors.add(t.name, t.value);
  }
  return ck;
}

Checkpoint tabular_checkpoint(const TabularQ& table, const ltl::TaskSet& tasks,
                              const std::string& env_kind,
                              std::vector<std::pair<std::string, std::string>> extra) {
  Checkpoint ck;
  ck.kind = CheckpointKind::Tabular;
  ck.config = {{"env", env_kind},
               {"states", std::to_string(table.states())},
               {"action_count", std::to_string(table.actions())},
               {"members", std::to_string(tasks.size())}};
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    ck.config.emplace_back("member." + std::to_string(i), ltl::format(tasks.member(static_cast<int>(i))));
  }
  append(ck.config, std::move(extra));
  ck.vocab = tasks.alphabet().names();
  nn::Mat q(static_cast<Eigen::Index>(table.states() * table.tasks()), table.actions());
  for (Eigen::Index r = 0; r < q.rows(); ++r) {
    for (int a = 0; a < table.actions(); ++a) {
      q(r, a) = table.values()[static_cast<std::size_t>(r) * static_cast<std::size_t>(table.actions()) +
                               static_cast<std::size_t>(a)];
    }
  }
  ck.tensors.add("q", std::move(q));
  return ck;
}

std::unique_ptr<QAgent> agent_from_checkpoint(const Checkpoint& ck, const env::Environment& env) {
  if (ck.kind != CheckpointKind::Agent) throw CheckpointMismatch("checkpoint does not hold an agent");
  check_vocab(ck.vocab, nn::Vocab(env.alphabet()));
  const int features = to_int("feature_size", ck.get("feature_size"));
  const int actions = to_int("action_count", ck.get("action_count"));
  if (features != static_cast<int>(env.feature_size())) {
    throw CheckpointMismatch("checkpoint expects " + std::to_string(features) + " features, environment has " +
                             std::to_string(env.feature_size()));
  }
  if (actions != env.action_count()) {
    throw CheckpointMismatch("checkpoint expects " + std::to_string(actions) + " actions, environment has " +
                             std::to_string(env.action_count()));
  }
  const int sync = ck.find("target_sync") ? to_int("target_sync", ck.get("target_sync")) : 500;
  auto agent = std::make_unique<QAgent>(nn::Vocab(ck.vocab), features, actions, network_from_echo(ck), 0, sync);
  if (!agent->online().same_layout(ck.tensors)) {
    throw CheckpointMismatch("checkpoint tensors do not match the network described by its config");
  }
  agent->online().assign(ck.tensors);
  agent->sync_target();
  return agent;
}

TabularQ table_from_checkpoint(const Checkpoint& ck, const env::Environment& env,
                               const ltl::TaskSet& tasks) {
  if (ck.kind != CheckpointKind::Tabular) throw CheckpointMismatch("checkpoint does not hold a Q-table");
  const auto& names = env.alphabet().names();
  for (std::size_t i = 0; i < std::max(names.size(), ck.vocab.size()); ++i) {
    if (i >= names.size()) throw CheckpointMismatch("checkpoint proposition '" + ck.vocab[i] + "' is not in the environment alphabet");
    if (i >= ck.vocab.size() || ck.vocab[i] != names[i]) {
      throw CheckpointMismatch("environment proposition '" + names[i] + "' does not match the checkpoint");
    }
  }
  const int stored_states = to_int("states", ck.get("states"));
  const int actions = to_int("action_count", ck.get("action_count"));
  const int members = to_int("members", ck.get("members"));
  if (stored_states != static_cast<int>(env.state_count()) || actions != env.action_count()) {
    throw CheckpointMismatch("Q-table shape does not match the environment");
  }
  const nn::Mat& q = ck.tensors.at("q");
  TabularQ table(env.state_count(), tasks.size(), actions);
  for (int m = 0; m < members; ++m) {
    const std::string& text = ck.get("member." + std::to_string(m));
    std::optional<int> here;
    for (std::size_t i = 0; i < tasks.size(); ++i) {
      if (ltl::format(tasks.member(static_cast<int>(i))) == text) here = static_cast<int>(i);
    }
    if (!here) continue;
    for (std::size_t s = 0; s < env.state_count(); ++s) {
      for (int a = 0; a < actions; ++a) {
        table.at(s, *here, a) = q(static_cast<Eigen::Index>(s * static_cast<std::size_t>(members) +
                                                            static_cast<std::size_t>(m)), a);
      }
    }
  }
  return table;
}

int load_pretrained_encoder(QAgent& agent, const Checkpoint& ck) {
  if (ck.kind != CheckpointKind::Encoder && ck.kind != CheckpointKind::Agent) {
    throw CheckpointMismatch("checkpoint holds no formula encoder");
  }
  const std::string prefix = agent.encoder().prefix() + ".";
  const std::string emb_name = prefix + "embedding";
  nn::ParamSet& p = agent.online();
  int copied = 0;
  for (const auto& t : ck.tensors.tensors()) {
    if (t.name.rfind(prefix, 0) != 0) continue;
    if (!p.contains(t.name)) throw CheckpointMismatch("agent has no tensor " + t.name);
    nn::Mat& dst = p.at(t.name);
    if (t.name == emb_name) {
      if (t.value.cols() != dst.cols() || static_cast<std::size_t>(t.value.rows()) != ck.vocab.size()) {
        throw CheckpointMismatch("embedding width or vocabulary size differs");
      }
      for (std::size_t i = 0; i < ck.vocab.size(); ++i) {
        if (!agent.vocab().contains(ck.vocab[i])) continue;
        dst.row(agent.vocab().id(ck.vocab[i])) = t.value.row(static_cast<Eigen::Index>(i));
        ++copied;
      }
      continue;
    }
    if (t.value.rows() != dst.rows() || t.value.cols() != dst.cols()) {
      throw CheckpointMismatch("tensor " + t.name + " has a different shape in the checkpoint");
    }
    dst = t.value;
  }
  agent.sync_target();
  return copied;
}

}  // namespace t2tl::rl
