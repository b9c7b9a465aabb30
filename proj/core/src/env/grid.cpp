// SPDX-License-Identifier: Apache-2.0
#include "t2tl/env/grid.hpp"

#include <algorithm>
#include <deque>
#include <random>

#include "t2tl/error.hpp"

namespace t2tl::env {

namespace {

constexpr int kDx[4] = {0, 1, 0, -1};
constexpr int kDy[4] = {-1, 0, 1, 0};

ltl::Alphabet alphabet_of(const GridLayout& layout) { return ltl::Alphabet(layout.propositions); }

}  // namespace

GridWorld::GridWorld(std::string kind, GridLayout layout, int step_cap, int patch)
    : kind_(std::move(kind)), step_cap_(step_cap), patch_(patch) {
  if (patch_ < 1 || patch_ % 2 == 0) throw Error("feature patch size must be odd and positive");
  if (step_cap_ < 1) throw Error("step cap must be positive");
  set_layout(std::move(layout));
}

void GridWorld::set_layout(GridLayout layout) {
  layout.validate();
  layout_ = std::move(layout);
  alphabet_ = alphabet_of(layout_);
  state_ = make_state(layout_.start.x, layout_.start.y);
}

std::size_t GridWorld::feature_size() const {
  return 2 + static_cast<std::size_t>(patch_ * patch_) * (1 + layout_.propositions.size());
}

std::size_t GridWorld::state_count() const {
  return static_cast<std::size_t>(layout_.width) * static_cast<std::size_t>(layout_.height);
}

EnvState GridWorld::make_state(int x, int y) const {
  EnvState s;
  s.x = x;
  s.y = y;
  s.id = layout_.index(x, y);
  if (int p = layout_.content(x, y); p >= 0) s.label.insert(static_cast<ltl::PropId>(p));
  return s;
}

EnvState GridWorld::reset(std::uint64_t seed) {
  regenerate(seed);
  state_ = make_state(layout_.start.x, layout_.start.y);
  return state_;
}

EnvState GridWorld::transition(const EnvState& s, Action a) const {
  check_action(a);
  const int nx = s.x + kDx[a];
  const int ny = s.y + kDy[a];
  if (layout_.wall(nx, ny)) return s;
  return make_state(nx, ny);
}

EnvState GridWorld::state_at(std::size_t id) const {
  if (id >= state_count()) throw Error("grid state id out of range");
  const int w = layout_.width;
  return make_state(static_cast<int>(id % static_cast<std::size_t>(w)),
                    static_cast<int>(id / static_cast<std::size_t>(w)));
}

std::vector<double> GridWorld::features(const EnvState& s) const {
  const std::size_t channels = 1 + layout_.propositions.size();
  std::vector<double> out(feature_size(), 0.0);
  out[0] = layout_.width > 1 ? static_cast<double>(s.x) / (layout_.width - 1) : 0.0;
  out[1] = layout_.height > 1 ? static_cast<double>(s.y) / (layout_.height - 1) : 0.0;
  const int r = patch_ / 2;
  std::size_t cell = 0;
  for (int dy = -r; dy <= r; ++dy) {
    for (int dx = -r; dx <= r; ++dx, ++cell) {
      const int x = s.x + dx;
      const int y = s.y + dy;
      const std::size_t base = 2 + cell * channels;
      if (layout_.wall(x, y)) {
        out[base] = 1.0;
      } else if (int p = layout_.content(x, y); p >= 0) {
        out[base + 1 + static_cast<std::size_t>(p)] = 1.0;
      }
    }
  }
  return out;
}

std::unique_ptr<Environment> GridWorld::clone() const { return std::make_unique<GridWorld>(*this); }

std::unique_ptr<GridWorld> make_office(int step_cap, int patch) {
  return std::make_unique<GridWorld>("office", office_layout(), step_cap, patch);
}

GridLayout generate_minicraft(std::uint64_t seed, const MiniCraftOptions& o) {
  const int goals = o.wood + o.workshop;
  const int hazards = o.trap + o.marsh;
  if (o.size < 3 || o.wood < 0 || o.workshop < 0 || o.trap < 0 || o.marsh < 0) {
    throw LayoutError("minicraft options out of range");
  }
  if (hazards < goals) throw LayoutError("minicraft needs at least one hazard per sub-goal");
  if (goals + hazards + 1 > o.size * o.size / 2) throw LayoutError("minicraft grid too crowded");

  enum : int { kWood = 0, kWorkshop = 1, kTrap = 2, kMarsh = 3 };
  std::mt19937_64 rng(seed);
  auto uniform = [&rng](int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng); };

  for (int attempt = 0; attempt < 100; ++attempt) {
    GridLayout g;
    g.width = g.height = o.size;
    g.propositions = {"Wood", "Workshop", "Trap", "Marsh"};
    g.walls.assign(static_cast<std::size_t>(o.size * o.size), false);
    g.contents.assign(g.walls.size(), -1);
    g.start = {uniform(o.size), uniform(o.size)};

    auto free = [&](int x, int y) {
      return g.in_bounds(x, y) && g.content(x, y) < 0 && !(x == g.start.x && y == g.start.y);
    };
    auto place_uniform = [&](int prop) {
      for (;;) {
        const int x = uniform(o.size);
        const int y = uniform(o.size);
        if (free(x, y)) {
          g.contents[g.index(x, y)] = prop;
          return Cell{x, y};
        }
      }
    };

    std::vector<Cell> subgoals;
    for (int i = 0; i < o.wood; ++i) subgoals.push_back(place_uniform(kWood));
    for (int i = 0; i < o.workshop; ++i) subgoals.push_back(place_uniform(kWorkshop));

    int traps = o.trap;
    int marshes = o.marsh;
    bool stuck = false;
    for (std::size_t i = 0; i < subgoals.size() && !stuck; ++i) {
      std::vector<Cell> around;
      for (int a = 0; a < 4; ++a) {
        const int x = subgoals[i].x + kDx[a];
        const int y = subgoals[i].y + kDy[a];
        if (free(x, y)) around.push_back({x, y});
      }
      if (around.empty()) {
        stuck = true;
        break;
      }
      const Cell c = around[static_cast<std::size_t>(uniform(static_cast<int>(around.size())))];
      const bool trap = marshes == 0 || (traps > 0 && i % 2 == 0);
      g.contents[g.index(c.x, c.y)] = trap ? kTrap : kMarsh;
      (trap ? traps : marshes) -= 1;
    }
    if (stuck) continue;
    for (; traps > 0; --traps) place_uniform(kTrap);
    for (; marshes > 0; --marshes) place_uniform(kMarsh);

    // Every sub-goal must be reachable without stepping on a hazard.
    std::vector<bool> seen(g.walls.size(), false);
    std::deque<Cell> queue{g.start};
    seen[g.index(g.start.x, g.start.y)] = true;
    while (!queue.empty()) {
      const Cell c = queue.front();
      queue.pop_front();
      if (g.content(c.x, c.y) >= 0) continue;  // do not walk through goals or hazards
      for (int a = 0; a < 4; ++a) {
        const int x = c.x + kDx[a];
        const int y = c.y + kDy[a];
        if (!g.in_bounds(x, y) || seen[g.index(x, y)]) continue;
        const int p = g.content(x, y);
        if (p == kTrap || p == kMarsh) continue;
        seen[g.index(x, y)] = true;
        queue.push_back({x, y});
      }
    }
    const bool reachable = std::all_of(subgoals.begin(), subgoals.end(),
                                       [&](const Cell& c) { return seen[g.index(c.x, c.y)]; });
    if (!reachable) continue;
    g.validate();
    return g;
  }
  throw LayoutError("could not place a solvable minicraft layout");
}

MiniCraft::MiniCraft(MiniCraftOptions options, int step_cap, int patch, std::uint64_t layout_seed)
    : GridWorld("minicraft", generate_minicraft(layout_seed, options), step_cap, patch),
      options_(options),
      layout_seed_(layout_seed) {}

void MiniCraft::regenerate(std::uint64_t seed) {
  if (seed == layout_seed_) return;
  set_layout(generate_minicraft(seed, options_));
  layout_seed_ = seed;
}

std::unique_ptr<Environment> MiniCraft::clone() const { return std::make_unique<MiniCraft>(*this); }

}  // namespace t2tl::env
