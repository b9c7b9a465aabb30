// SPDX-License-Identifier: Apache-2.0
#include "support/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <set>
#include <stdexcept>

#include "t2tl/env/environment.hpp"
#include "t2tl/ltl/progression.hpp"

namespace t2tl::testing {

using ltl::Formula;

Formula random_formula(std::mt19937_64& rng, const ltl::Alphabet& alphabet, int max_depth) {
  std::uniform_int_distribution<int> leaf(0, 9);
  auto pick_leaf = [&]() {
    int r = leaf(rng);
    if (r == 0) return Formula::truth();
    if (r == 1) return Formula::falsity();
    std::uniform_int_distribution<ltl::PropId> p(0, static_cast<ltl::PropId>(alphabet.size() - 1));
    ltl::PropId id = p(rng);
    return Formula::prop(alphabet.name(id), id);
  };
  if (max_depth <= 1) return pick_leaf();
  std::uniform_int_distribution<int> kind(0, 8);
  switch (kind(rng)) {
    case 0: return pick_leaf();
    case 1: return Formula::negation(random_formula(rng, alphabet, max_depth - 1));
    case 2:
      return Formula::conjunction(random_formula(rng, alphabet, max_depth - 1),
                                  random_formula(rng, alphabet, max_depth - 1));
    case 3:
      return Formula::disjunction(random_formula(rng, alphabet, max_depth - 1),
                                  random_formula(rng, alphabet, max_depth - 1));
    case 4: return Formula::next(random_formula(rng, alphabet, max_depth - 1));
    case 5: return Formula::eventually(random_formula(rng, alphabet, max_depth - 1));
    case 6: return Formula::always(random_formula(rng, alphabet, max_depth - 1));
    default:
      return Formula::until(random_formula(rng, alphabet, max_depth - 1),
                            random_formula(rng, alphabet, max_depth - 1));
  }
}

ltl::Word random_word(std::mt19937_64& rng, const ltl::Alphabet& alphabet, std::size_t length) {
  std::uniform_int_distribution<std::uint64_t> bits(0, (std::uint64_t{1} << alphabet.size()) - 1);
  ltl::Word w;
  for (std::size_t i = 0; i < length; ++i) w.emplace_back(bits(rng));
  return w;
}

std::vector<long double> softmax_ld(const std::vector<long double>& logits) {
  long double mx = *std::max_element(logits.begin(), logits.end());
  std::vector<long double> out;
  long double sum = 0;
  for (auto l : logits) {
    out.push_back(std::exp(l - mx));
    sum += out.back();
  }
  for (auto& o : out) o /= sum;
  return out;
}

}  // namespace t2tl::testing

namespace t2tl::testing {

namespace {

// Task reading of a progressed formula: +1 accepted, -1 rejected, 0 open.
int verdict(const ltl::Formula& f) {
  if (f.kind() == ltl::Kind::True) return 1;
  if (f.kind() == ltl::Kind::False) return -1;
  return 0;
}

}  // namespace

ProductValues value_iteration(const env::Environment& env, const std::vector<ltl::Formula>& members,
                              double gamma) {
  ProductValues out;
  out.states = env.state_count();
  out.members = members.size();
  out.actions = env.action_count();
  const auto a_n = static_cast<std::size_t>(out.actions);
  std::map<std::string, std::size_t> index;
  for (std::size_t m = 0; m < members.size(); ++m) index[members[m].key()] = m;

  struct Edge {
    double reward;
    std::size_t next;  // flat (state * members + member), or npos when final
  };
  constexpr auto npos = static_cast<std::size_t>(-1);
  std::vector<Edge> edges(out.states * out.members * a_n);
  for (std::size_t s = 0; s < out.states; ++s) {
    const env::EnvState here = env.state_at(s);
    for (std::size_t m = 0; m < out.members; ++m) {
      for (int a = 0; a < out.actions; ++a) {
        const env::EnvState there = env.transition(here, a);
        const ltl::Formula next = ltl::progress_task(there.label, members[m]);
        Edge e{static_cast<double>(verdict(next)), npos};
        if (e.reward == 0.0 && !there.terminal) {
          const auto it = index.find(next.key());
          if (it == index.end()) throw std::logic_error("members not closed under progression");
          e.next = there.id * out.members + it->second;
        }
        edges[(s * out.members + m) * a_n + static_cast<std::size_t>(a)] = e;
      }
    }
  }
  out.q.assign(edges.size(), 0.0);
  std::vector<double> v(out.states * out.members, 0.0);
  for (int sweep = 0; sweep < 100000; ++sweep) {
    double change = 0.0;
    for (std::size_t i = 0; i < edges.size(); ++i) {
      const Edge& e = edges[i];
      const double q = e.reward + (e.next == npos ? 0.0 : gamma * v[e.next]);
      change = std::max(change, std::abs(q - out.q[i]));
      out.q[i] = q;
    }
    for (std::size_t k = 0; k < v.size(); ++k) {
      v[k] = *std::max_element(out.q.begin() + static_cast<std::ptrdiff_t>(k * a_n),
                               out.q.begin() + static_cast<std::ptrdiff_t>((k + 1) * a_n));
    }
    if (change < 1e-14) break;
  }
  return out;
}

std::vector<std::size_t> occupiable_states(const env::Environment& env, std::size_t start_id,
                                           const ltl::Formula& root) {
  std::map<std::pair<std::size_t, std::string>, bool> seen;
  std::set<std::size_t> cells;
  std::deque<std::pair<std::size_t, ltl::Formula>> queue;
  const env::EnvState start = env.state_at(start_id);
  const ltl::Formula f0 = ltl::progress_task(start.label, root);
  if (verdict(f0) != 0) return {};
  queue.emplace_back(start_id, f0);
  seen[{start_id, f0.key()}] = true;
  while (!queue.empty()) {
    auto [s, f] = queue.front();
    queue.pop_front();
    cells.insert(s);
    for (int a = 0; a < env.action_count(); ++a) {
      const env::EnvState n = env.transition(env.state_at(s), a);
      const ltl::Formula g = ltl::progress_task(n.label, f);
      if (verdict(g) != 0 || n.terminal) continue;
      if (seen.emplace(std::make_pair(n.id, g.key()), true).second) queue.emplace_back(n.id, g);
    }
  }
  return {cells.begin(), cells.end()};
}

}  // namespace t2tl::testing
