// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <deque>
#include <random>
#include <set>

#include "t2tl/env/grid.hpp"
#include "t2tl/env/single_state.hpp"
#include "t2tl/error.hpp"

namespace t2tl::env {
namespace {

int prop(const GridLayout& g, const std::string& name) {
  for (std::size_t i = 0; i < g.propositions.size(); ++i) {
    if (g.propositions[i] == name) return static_cast<int>(i);
  }
  return -1;
}

TEST(Layout, ParsesLegendAndGrid) {
  GridLayout g = parse_layout("x Key\n---\n#x\n@.\n");
  EXPECT_EQ(g.width, 2);
  EXPECT_EQ(g.height, 2);
  EXPECT_TRUE(g.wall(0, 0));
  EXPECT_EQ(g.content(1, 0), 0);
  EXPECT_EQ(g.start, (Cell{0, 1}));
  EXPECT_TRUE(g.wall(-1, 0));
}

TEST(Layout, RejectsMalformedInput) {
  EXPECT_THROW(parse_layout("x Key\n#x\n@.\n"), LayoutError);        // no separator
  EXPECT_THROW(parse_layout("---\n#.\n..\n"), LayoutError);          // no start
  EXPECT_THROW(parse_layout("---\n@.\n.\n"), LayoutError);           // ragged
  EXPECT_THROW(parse_layout("---\n@z\n"), LayoutError);              // unmapped char
  EXPECT_THROW(parse_layout(". Key\n---\n@.\n"), LayoutError);       // reserved char
  EXPECT_THROW(parse_layout("x 1bad\n---\n@x\n"), LayoutError);      // bad name
  EXPECT_THROW(parse_layout("---\n@@\n"), LayoutError);              // two starts
}

TEST(Office, ReferenceMapMatchesShippedFile) {
  GridLayout shipped = load_layout(std::string(T2TL_DATA_DIR) + "/office.map");
  GridLayout built_in = office_layout();
  EXPECT_EQ(shipped.walls, built_in.walls);
  EXPECT_EQ(shipped.contents, built_in.contents);
  EXPECT_EQ(shipped.width, 9);
  EXPECT_EQ(shipped.height, 7);
  EXPECT_EQ(shipped.cells_with(prop(shipped, "Coffee")).size(), 1u);
  EXPECT_EQ(shipped.cells_with(prop(shipped, "Office")).size(), 1u);
  EXPECT_GE(shipped.cells_with(prop(shipped, "Decoration")).size(), 2u);
  for (const char* letter : {"A", "B", "C", "D", "Email"}) {
    EXPECT_EQ(shipped.cells_with(prop(shipped, letter)).size(), 1u) << letter;
  }
}

TEST(Office, ResetAtDocumentedStart) {
  auto office = make_office();
  for (std::uint64_t seed : {0u, 1u, 99u}) {
    EnvState s = office->reset(seed);
    EXPECT_EQ(s.x, 4);
    EXPECT_EQ(s.y, 3);
    EXPECT_TRUE(s.label.empty());
  }
}

TEST(Office, StepEastOntoCoffee) {
  auto office = make_office();
  const GridLayout& g = office->layout();
  Cell coffee = g.cells_with(prop(g, "Coffee")).front();
  EnvState left = office->state_at(g.index(coffee.x - 1, coffee.y));
  EnvState next = office->transition(left, kEast);
  EXPECT_EQ(next.label.names(office->alphabet()), std::vector<std::string>{"Coffee"});
}

TEST(Grid, BlockedMoveKeepsCellAndLabel) {
  auto office = make_office();
  const GridLayout& g = office->layout();
  for (std::size_t id = 0; id < office->state_count(); ++id) {
    EnvState s = office->state_at(id);
    if (g.wall(s.x, s.y)) continue;
    for (Action a = 0; a < 4; ++a) {
      EnvState n = office->transition(s, a);
      const int dx[4] = {0, 1, 0, -1};
      const int dy[4] = {-1, 0, 1, 0};
      if (g.wall(s.x + dx[a], s.y + dy[a])) {
        EXPECT_EQ(n, s);
      } else {
        EXPECT_EQ(n.x, s.x + dx[a]);
        EXPECT_EQ(n.y, s.y + dy[a]);
      }
    }
  }
}

TEST(Grid, InvalidActionThrows) {
  auto office = make_office();
  office->reset(0);
  EXPECT_THROW(office->step(4), InvalidAction);
  EXPECT_THROW(office->step(-1), InvalidAction);
}

TEST(Grid, LabelsDependOnPositionOnly) {
  auto office = make_office();
  std::mt19937_64 rng(3);
  std::map<std::pair<int, int>, std::uint64_t> seen;
  office->reset(0);
  for (int t = 0; t < 5000; ++t) {
    auto out = office->step(static_cast<Action>(rng() % 4));
    auto [it, fresh] = seen.emplace(std::make_pair(out.state.x, out.state.y), out.state.label.bits());
    if (!fresh) EXPECT_EQ(it->second, out.state.label.bits());
  }
}

TEST(Features, NormalisedPositionAndFixedLength) {
  auto office = make_office();
  const std::size_t n = office->feature_size();
  EXPECT_EQ(n, 2u + 25u * 9u);
  EnvState origin = office->state_at(0);
  auto f0 = office->features(origin);
  ASSERT_EQ(f0.size(), n);
  EXPECT_EQ(f0[0], 0.0);
  EXPECT_EQ(f0[1], 0.0);
  for (std::size_t id = 0; id < office->state_count(); ++id) {
    auto f = office->features(office->state_at(id));
    ASSERT_EQ(f.size(), n);
    for (double v : f) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
  }
}

TEST(Features, PatchIsOneHotPerCell) {
  auto office = make_office();
  const GridLayout& g = office->layout();
  const std::size_t channels = 1 + g.propositions.size();
  for (std::size_t id = 0; id < office->state_count(); ++id) {
    EnvState s = office->state_at(id);
    auto f = office->features(s);
    std::size_t cell = 0;
    for (int dy = -2; dy <= 2; ++dy) {
      for (int dx = -2; dx <= 2; ++dx, ++cell) {
        double sum = 0;
        for (std::size_t c = 0; c < channels; ++c) sum += f[2 + cell * channels + c];
        const int x = s.x + dx;
        const int y = s.y + dy;
        const bool occupied = g.wall(x, y) || g.content(x, y) >= 0;
        EXPECT_EQ(sum, occupied ? 1.0 : 0.0);
        if (g.wall(x, y)) EXPECT_EQ(f[2 + cell * channels], 1.0);
        if (int p = g.content(x, y); p >= 0) {
          EXPECT_EQ(f[2 + cell * channels + 1 + static_cast<std::size_t>(p)], 1.0);
        }
      }
    }
  }
}

TEST(Determinism, SameSeedSameSequence) {
  for (int which = 0; which < 2; ++which) {
    std::unique_ptr<Environment> a, b;
    if (which == 0) {
      a = make_office();
      b = make_office();
    } else {
      a = std::make_unique<MiniCraft>();
      b = std::make_unique<MiniCraft>();
    }
    a->reset(11);
    b->reset(11);
    std::mt19937_64 rng(5);
    for (int t = 0; t < 500; ++t) {
      const Action act = static_cast<Action>(rng() % 4);
      auto x = a->step(act);
      auto y = b->step(act);
      ASSERT_EQ(x.state, y.state);
      ASSERT_EQ(a->features(x.state), b->features(y.state));
    }
  }
}

TEST(MiniCraft, SameSeedSameLayout) {
  GridLayout a = generate_minicraft(7);
  GridLayout b = generate_minicraft(7);
  EXPECT_EQ(a.contents, b.contents);
  EXPECT_EQ(a.start, b.start);
  GridLayout c = generate_minicraft(8);
  EXPECT_NE(a.contents, c.contents);
}

TEST(MiniCraft, CountsAdjacencyAndReachability) {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    GridLayout g = generate_minicraft(seed);
    ASSERT_EQ(g.width, 45);
    ASSERT_EQ(g.height, 45);
    const int wood = prop(g, "Wood"), shop = prop(g, "Workshop");
    const int trap = prop(g, "Trap"), marsh = prop(g, "Marsh");
    EXPECT_EQ(g.cells_with(wood).size(), 5u);
    EXPECT_EQ(g.cells_with(shop).size(), 5u);
    EXPECT_EQ(g.cells_with(trap).size(), 10u);
    EXPECT_EQ(g.cells_with(marsh).size(), 10u);
    EXPECT_LT(g.content(g.start.x, g.start.y), 0);

    std::vector<Cell> goals = g.cells_with(wood);
    for (auto c : g.cells_with(shop)) goals.push_back(c);
    for (const Cell& c : goals) {
      int hazards = 0;
      for (auto [dx, dy] : {std::pair{0, 1}, {1, 0}, {0, -1}, {-1, 0}}) {
        const int p = g.content(c.x + dx, c.y + dy);
        hazards += p == trap || p == marsh;
      }
      EXPECT_GE(hazards, 1) << "seed " << seed;
    }

    // Independent flood fill over hazard-free, goal-free floor.
    std::set<Cell> seen{g.start};
    std::deque<Cell> todo{g.start};
    std::set<Cell> reached_goals;
    while (!todo.empty()) {
      Cell c = todo.front();
      todo.pop_front();
      for (auto [dx, dy] : {std::pair{0, 1}, {1, 0}, {0, -1}, {-1, 0}}) {
        Cell n{c.x + dx, c.y + dy};
        if (!g.in_bounds(n.x, n.y) || seen.count(n)) continue;
        const int p = g.content(n.x, n.y);
        if (p == trap || p == marsh) continue;
        seen.insert(n);
        if (p >= 0) {
          reached_goals.insert(n);
        } else {
          todo.push_back(n);
        }
      }
    }
    EXPECT_EQ(reached_goals.size(), goals.size()) << "seed " << seed;
  }
}

TEST(MiniCraft, ResetResamplesPerSeed) {
  MiniCraft env;
  env.reset(3);
  auto first = env.layout().contents;
  env.reset(4);
  EXPECT_NE(env.layout().contents, first);
  env.reset(3);
  EXPECT_EQ(env.layout().contents, first);
  EXPECT_EQ(env.feature_size(), 2u + 25u * 5u);
}

TEST(SingleState, ActionEmitsItsProposition) {
  SingleStateMdp mdp(ltl::Alphabet({"a", "b", "c"}));
  EnvState s0 = mdp.reset(42);
  EXPECT_TRUE(s0.label.empty());
  EXPECT_EQ(mdp.feature_size(), 0u);
  EXPECT_TRUE(mdp.features(s0).empty());
  auto out = mdp.step(2);
  EXPECT_EQ(out.state.label, ltl::LabelSet::single(2));
  EXPECT_EQ(out.state.id, 0u);
  EXPECT_THROW(mdp.step(3), InvalidAction);
}

}  // namespace
}  // namespace t2tl::env
