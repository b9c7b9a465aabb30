// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "t2tl/ltl/alphabet.hpp"
#include "t2tl/ltl/formula.hpp"

namespace t2tl::nn {

inline constexpr int kPadId = 0;
inline constexpr int kAggId = 1;

// Token ids: [PAD], [AGG], the seven operators, true, false, then the
// propositions in alphabet order.
class Vocab {
 public:
  explicit Vocab(const ltl::Alphabet& alphabet);
  explicit Vocab(std::vector<std::string> tokens);  // as stored in a checkpoint

  int size() const noexcept { return static_cast<int>(tokens_.size()); }
  int id(const std::string& token) const;  // throws UnknownToken
  bool contains(const std::string& token) const { return index_.count(token) != 0; }
  const std::string& token(int id) const;
  const std::vector<std::string>& tokens() const noexcept { return tokens_; }
  bool operator==(const Vocab& other) const { return tokens_ == other.tokens_; }

  static const std::vector<std::string>& fixed_tokens();

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> index_;
};

// [AGG] followed by the prefix-order serialisation of the syntax tree.
std::vector<int> tokenize_formula(const ltl::Formula& formula, const Vocab& vocab);

}  // namespace t2tl::nn
