// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "t2tl/ltl/alphabet.hpp"
#include "t2tl/ltl/formula.hpp"

namespace t2tl::ltl {

// Finite-trace satisfaction <w, i> |= f, by direct recursion on the
// semantics.  Next fails at the last position; Always ranges over [i, n].
// Throws PositionOutOfRange unless 0 <= i < w.size().
bool evaluate(const Word& word, std::size_t position, const Formula& formula);

// Same semantics as evaluate() at every position at once, in time linear in
// word length times formula size.
std::vector<bool> evaluate_all(const Word& word, const Formula& formula);

enum class Verdict : std::int8_t { Violated = -1, Undetermined = 0, Satisfied = 1 };

// Three-valued verdict on a word that may still be extended.  Positions past
// the end are unknown; connectives combine with Kleene logic.  Sound but not
// complete: Violated guarantees no extension satisfies the formula, Satisfied
// that every extension does.
Verdict evaluate_prefix(const Word& prefix, const Formula& formula);

}  // namespace t2tl::ltl
