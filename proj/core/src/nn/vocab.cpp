// SPDX-License-Identifier: Apache-2.0
#include "t2tl/nn/vocab.hpp"

#include "t2tl/error.hpp"

namespace t2tl::nn {

const std::vector<std::string>& Vocab::fixed_tokens() {
  static const std::vector<std::string> kFixed = {"[PAD]", "[AGG]", "!", "&", "|", "X",
                                                  "F",     "G",     "U", "true", "false"};
  return kFixed;
}

Vocab::Vocab(const ltl::Alphabet& alphabet) : tokens_(fixed_tokens()) {
  for (const auto& name : alphabet.names()) tokens_.push_back(name);
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    if (!index_.emplace(tokens_[i], static_cast<int>(i)).second) {
      throw Error("proposition '" + tokens_[i] + "' collides with a reserved token");
    }
  }
}

Vocab::Vocab(std::vector<std::string> tokens) : tokens_(std::move(tokens)) {
  const auto& fixed = fixed_tokens();
  if (tokens_.size() < fixed.size() ||
      !std::equal(fixed.begin(), fixed.end(), tokens_.begin())) {
    throw Error("vocabulary does not start with the reserved tokens");
  }
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    if (!index_.emplace(tokens_[i], static_cast<int>(i)).second) {
      throw Error("duplicate token '" + tokens_[i] + "'");
    }
  }
}

int Vocab::id(const std::string& token) const {
  auto it = index_.find(token);
  if (it == index_.end()) throw UnknownToken("token '" + token + "' is not in the vocabulary");
  return it->second;
}

const std::string& Vocab::token(int id) const {
  if (id < 0 || id >= size()) throw UnknownToken("token id " + std::to_string(id) + " out of range");
  return tokens_[static_cast<std::size_t>(id)];
}

namespace {

void emit(const ltl::Formula& f, const Vocab& vocab, std::vector<int>& out) {
  using ltl::Kind;
  switch (f.kind()) {
    case Kind::True: out.push_back(vocab.id("true")); return;
    case Kind::False: out.push_back(vocab.id("false")); return;
    case Kind::Prop: out.push_back(vocab.id(f.name())); return;
    case Kind::Not: out.push_back(vocab.id("!")); break;
    case Kind::And: out.push_back(vocab.id("&")); break;
    case Kind::Or: out.push_back(vocab.id("|")); break;
    case Kind::Next: out.push_back(vocab.id("X")); break;
    case Kind::Eventually: out.push_back(vocab.id("F")); break;
    case Kind::Always: out.push_back(vocab.id("G")); break;
    case Kind::Until: out.push_back(vocab.id("U")); break;
  }
  if (f.is_binary()) {
    emit(f.left(), vocab, out);
    emit(f.right(), vocab, out);
  } else {
    emit(f.child(), vocab, out);
  }
}

}  // namespace

std::vector<int> tokenize_formula(const ltl::Formula& formula, const Vocab& vocab) {
  std::vector<int> out{kAggId};
  emit(formula, vocab, out);
  return out;
}

}  // namespace t2tl::nn
