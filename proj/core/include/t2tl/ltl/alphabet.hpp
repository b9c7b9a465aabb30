// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace t2tl::ltl {

using PropId = std::uint32_t;

inline constexpr std::size_t kMaxPropositions = 64;

bool is_valid_proposition_name(std::string_view name);

// Ordered set of atomic propositions.  The position of a name is its PropId.
class Alphabet {
 public:
  Alphabet() = default;
  explicit Alphabet(std::vector<std::string> names);

  std::size_t size() const noexcept { return names_.size(); }
  const std::string& name(PropId id) const { return names_.at(id); }
  const std::vector<std::string>& names() const noexcept { return names_; }
  std::optional<PropId> find(std::string_view name) const;
  PropId id(std::string_view name) const;  // throws UnknownProposition

  bool operator==(const Alphabet& other) const { return names_ == other.names_; }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, PropId> index_;
};

// A subset of the alphabet: one letter of a word.
class LabelSet {
 public:
  constexpr LabelSet() = default;
  constexpr explicit LabelSet(std::uint64_t bits) : bits_(bits) {}
  static LabelSet single(PropId id) { return LabelSet(std::uint64_t{1} << id); }
  static LabelSet of(const Alphabet& alphabet, const std::vector<std::string>& names);

  bool contains(PropId id) const noexcept { return (bits_ >> id) & 1U; }
  void insert(PropId id) noexcept { bits_ |= std::uint64_t{1} << id; }
  bool empty() const noexcept { return bits_ == 0; }
  std::uint64_t bits() const noexcept { return bits_; }
  bool fits(const Alphabet& alphabet) const noexcept;

  // Sorted proposition names, e.g. {Coffee,Office}.
  std::vector<std::string> names(const Alphabet& alphabet) const;
  std::string to_string(const Alphabet& alphabet) const;

  friend constexpr bool operator==(LabelSet a, LabelSet b) { return a.bits_ == b.bits_; }

 private:
  std::uint64_t bits_ = 0;
};

using Word = std::vector<LabelSet>;

}  // namespace t2tl::ltl
