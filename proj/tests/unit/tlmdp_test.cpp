// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <random>
#include <deque>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "t2tl/env/grid.hpp"
#include "t2tl/env/single_state.hpp"
#include "t2tl/error.hpp"
#include "t2tl/ltl/parser.hpp"
#include "t2tl/ltl/semantics.hpp"
#include "t2tl/tl/tlmdp.hpp"

namespace t2tl::tl {
namespace {

using ltl::Formula;
using ltl::LabelSet;

constexpr const char* kDeliver = "F (Coffee & F Office) & G !Decoration";
constexpr const char* kCraft = "F (Wood & F Workshop) & G !Trap & G !Marsh";

std::shared_ptr<const ltl::TaskSet> tasks_for(const env::Environment& e, const char* text) {
  return std::make_shared<const ltl::TaskSet>(ltl::parse(text, e.alphabet()), e.alphabet());
}

TlMdp office_mdp(const char* text = kDeliver, int cap = 0) {
  auto office = env::make_office();
  auto tasks = tasks_for(*office, text);
  return TlMdp(std::move(office), tasks, cap);
}

// Walks the agent to `target` through BFS over free cells, ignoring labels.
std::vector<env::Action> path_to(const env::GridWorld& g, env::Cell from, env::Cell target,
                                 const std::set<int>& avoid) {
  const auto& L = g.layout();
  std::map<env::Cell, std::pair<env::Cell, env::Action>> parent;
  std::deque<env::Cell> q{from};
  parent[from] = {from, -1};
  const int dx[4] = {0, 1, 0, -1}, dy[4] = {-1, 0, 1, 0};
  while (!q.empty()) {
    env::Cell c = q.front();
    q.pop_front();
    if (c == target) break;
    for (int a = 0; a < 4; ++a) {
      env::Cell n{c.x + dx[a], c.y + dy[a]};
      if (L.wall(n.x, n.y) || parent.count(n)) continue;
      if (!(n == target) && avoid.count(L.content(n.x, n.y))) continue;
      parent[n] = {c, a};
      q.push_back(n);
    }
  }
  std::vector<env::Action> path;
  for (env::Cell c = target; !(c == from); c = parent.at(c).first) path.push_back(parent.at(c).second);
  return {path.rbegin(), path.rend()};
}

TEST(TlMdp, ResetAtRoot) {
  TlMdp mdp = office_mdp();
  TlState s = mdp.reset(0);
  EXPECT_EQ(s.task, ltl::TaskRef::member(0));
  EXPECT_FALSE(s.done);
  EXPECT_EQ(s.env.x, 4);
  EXPECT_EQ(s.env.y, 3);
}

TEST(TlMdp, RewardFiresOnArrival) {
  auto world = std::make_unique<env::GridWorld>("tiny", env::parse_layout("k Key\n---\nk@\n"), 10);
  auto tasks = tasks_for(*world, "F Key");
  TlMdp mdp(std::move(world), tasks);
  EXPECT_EQ(mdp.reset(0).task, ltl::TaskRef::member(0));
  TlTransition t = mdp.step(env::kWest);
  EXPECT_EQ(t.reward, 1);
  EXPECT_TRUE(t.done);
  EXPECT_EQ(t.label, LabelSet::single(0));

  auto ss = std::make_unique<env::SingleStateMdp>(ltl::Alphabet({"a", "b"}));
  auto ss_tasks = tasks_for(*ss, "F a");
  TlMdp single(std::move(ss), ss_tasks);
  EXPECT_EQ(single.reset(1).task, ltl::TaskRef::member(0));
}

// An environment whose start state already carries {a}.
class LabeledStart : public env::SingleStateMdp {
 public:
  using SingleStateMdp::SingleStateMdp;
  env::EnvState reset(std::uint64_t seed) override {
    SingleStateMdp::reset(seed);
    state_.label = LabelSet::single(0);
    return state_;
  }
};

TEST(TlMdp, StartLabelCanFinishTheTaskAtReset) {
  auto e = std::make_unique<LabeledStart>(ltl::Alphabet({"a", "b"}));
  auto tasks = tasks_for(*e, "F a");
  TlMdp mdp(std::move(e), tasks);
  TlState s = mdp.reset(0);
  EXPECT_TRUE(s.task.is_true());
  EXPECT_TRUE(s.done);
  EXPECT_THROW(mdp.step(0), SteppedTerminal);
}

TEST(TlMdp, DeliveryRewardsAndTermination) {
  TlMdp mdp = office_mdp();
  auto& office = static_cast<env::GridWorld&>(mdp.environment());
  const auto& L = office.layout();
  const int coffee_p = static_cast<int>(*office.alphabet().find("Coffee"));
  const int office_p = static_cast<int>(*office.alphabet().find("Office"));
  const int deco_p = static_cast<int>(*office.alphabet().find("Decoration"));
  std::set<int> avoid;
  for (int p = 0; p < static_cast<int>(L.propositions.size()); ++p) avoid.insert(p);

  mdp.reset(0);
  auto to_coffee = path_to(office, L.start, L.cells_with(coffee_p).front(), avoid);
  TlTransition t;
  for (env::Action a : to_coffee) t = mdp.step(a);
  EXPECT_EQ(t.reward, 0);
  EXPECT_FALSE(t.done);
  EXPECT_EQ(mdp.formula(), ltl::simplify(ltl::parse("F Office & G !Decoration", office.alphabet())));

  auto to_office = path_to(office, L.cells_with(coffee_p).front(), L.cells_with(office_p).front(), avoid);
  for (env::Action a : to_office) t = mdp.step(a);
  EXPECT_EQ(t.reward, 1);
  EXPECT_TRUE(t.done);
  EXPECT_TRUE(t.to.task.is_true());
  EXPECT_THROW(mdp.step(0), SteppedTerminal);

  mdp.reset(0);
  auto to_deco = path_to(office, L.start, L.cells_with(deco_p).front(), avoid);
  for (env::Action a : to_deco) t = mdp.step(a);
  EXPECT_EQ(t.reward, -1);
  EXPECT_TRUE(t.done);
  EXPECT_TRUE(t.to.task.is_false());
}

TEST(TlMdp, StepCapTruncatesWithZeroReward) {
  TlMdp mdp = office_mdp(kDeliver, 3);
  mdp.reset(0);
  // The cell west of the start is a wall.
  TlTransition t;
  for (int i = 0; i < 3; ++i) t = mdp.step(env::kWest);
  EXPECT_TRUE(t.done);
  EXPECT_TRUE(t.truncated);
  EXPECT_EQ(t.reward, 0);
  EXPECT_EQ(t.to.task, ltl::TaskRef::member(0));
}

TEST(SimultaneousView, OneTransitionPerMember) {
  TlMdp mdp = office_mdp();
  const auto& tasks = mdp.tasks();
  ASSERT_EQ(tasks.size(), 2u);
  mdp.reset(0);
  TlTransition t = mdp.step(env::kNorth);
  auto view = simultaneous_view(t, tasks);
  ASSERT_EQ(view.size(), 2u);

  // Stepping onto Coffee: the root moves to member 1, member 1 stays put.
  TlTransition onto;
  onto.label = LabelSet::of(tasks.alphabet(), {"Coffee"});
  view = simultaneous_view(onto, tasks);
  EXPECT_EQ(view[0].next, ltl::TaskRef::member(1));
  EXPECT_EQ(view[1].next, ltl::TaskRef::member(1));
  EXPECT_EQ(view[0].reward, 0);

  onto.label = LabelSet::of(tasks.alphabet(), {"Decoration"});
  view = simultaneous_view(onto, tasks);
  for (const auto& v : view) {
    EXPECT_EQ(v.reward, -1);
    EXPECT_TRUE(v.done);
  }
}

TEST(SimultaneousView, SingleMemberMatchesTheRealStep) {
  TlMdp mdp = office_mdp("F Email");
  ASSERT_EQ(mdp.tasks().size(), 1u);
  std::mt19937_64 rng(4);
  for (int episode = 0; episode < 50; ++episode) {
    mdp.reset(0);
    while (!mdp.state().done) {
      TlTransition t = mdp.step(static_cast<env::Action>(rng() % 4));
      auto view = simultaneous_view(t, mdp.tasks());
      ASSERT_EQ(view.size(), 1u);
      EXPECT_EQ(view[0].next, t.to.task);
      EXPECT_EQ(view[0].reward, t.reward);
      EXPECT_EQ(view[0].done, t.done);
      EXPECT_EQ(view[0].truncated, t.truncated);
    }
  }
}

TEST(NonMarkovReward, Examples) {
  const ltl::Alphabet zones({"Black_Zone", "White_Zone", "Yellow_Zone", "Red_Zone"});
  Formula safe = ltl::parse("F (Black_Zone & F White_Zone) & G !Red_Zone & G !Yellow_Zone", zones);
  auto L = [&](std::initializer_list<std::string> names) {
    return LabelSet::of(zones, std::vector<std::string>(names));
  };
  EXPECT_EQ(nonmarkov_reward({L({}), L({"Black_Zone"}), L({}), L({"White_Zone"})}, safe), 1);
  EXPECT_EQ(nonmarkov_reward({L({}), L({"Red_Zone"}), L({"Black_Zone"})}, safe), -1);
  const ltl::Alphabet abc({"a", "b", "c"});
  EXPECT_EQ(nonmarkov_reward({LabelSet(), LabelSet(), LabelSet()}, ltl::parse("F a", abc)), 0);
}

// Random-policy episodes: the last Markovian reward must equal the reward the
// evaluator assigns to the raw label word, and every earlier reward is 0.
void check_reward_equivalence(TlMdp& mdp, int episodes, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const Formula root = mdp.tasks().root();
  int outcomes[3] = {0, 0, 0};
  for (int e = 0; e < episodes; ++e) {
    TlState s = mdp.reset(seed);
    ltl::Word word{s.env.label};
    int last = 0;
    while (!mdp.state().done) {
      TlTransition t = mdp.step(static_cast<env::Action>(rng() % 4));
      word.push_back(t.label);
      if (!t.done) ASSERT_EQ(t.reward, 0);
      last = t.reward;
    }
    ASSERT_EQ(last, nonmarkov_reward(word, root)) << "episode " << e;
    ++outcomes[last + 1];
  }
  EXPECT_GT(outcomes[0], 0);
  EXPECT_GT(outcomes[2] + outcomes[1], 0);
}

TEST(RewardEquivalence, OfficeRandomPolicy) {
  TlMdp mdp = office_mdp();
  check_reward_equivalence(mdp, 300, 1);
}

TEST(RewardEquivalence, MiniCraftRandomPolicy) {
  auto craft = std::make_unique<env::MiniCraft>(env::MiniCraftOptions{}, 300);
  auto tasks = tasks_for(*craft, kCraft);
  TlMdp mdp(std::move(craft), tasks);
  check_reward_equivalence(mdp, 100, 2);
}

TEST(TransitionConsistency, FormulaMatchesTaskProgression) {
  TlMdp mdp = office_mdp();
  std::mt19937_64 rng(8);
  for (int e = 0; e < 200; ++e) {
    mdp.reset(0);
    while (!mdp.state().done) {
      const Formula before = mdp.formula();
      TlTransition t = mdp.step(static_cast<env::Action>(rng() % 4));
      EXPECT_EQ(mdp.formula(), ltl::progress_task(t.label, before));
    }
  }
}

TEST(Trace, OneJsonRecordPerLine) {
  TlMdp mdp = office_mdp();
  TraceRecorder rec(mdp);
  rec.on_reset(mdp.reset(0));
  rec.on_step(mdp.step(env::kNorth));
  rec.on_step(mdp.step(env::kNorth));
  std::ostringstream out;
  write_trace(out, rec.records());
  std::istringstream in(out.str());
  std::string line;
  std::vector<nlohmann::json> rows;
  while (std::getline(in, line)) rows.push_back(nlohmann::json::parse(line));
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0]["action"], -1);
  EXPECT_EQ(rows[2]["step"], 2);
  EXPECT_EQ(rows[2]["formula"], ltl::format(mdp.formula()));
  for (const auto& r : rows) {
    for (const char* key : {"step", "action", "label", "formula", "reward", "done"}) {
      EXPECT_TRUE(r.contains(key)) << key;
    }
  }
}

}  // namespace
}  // namespace t2tl::tl
