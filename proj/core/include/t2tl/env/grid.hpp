// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "t2tl/env/environment.hpp"

namespace t2tl::env {

struct Cell {
  int x = 0;
  int y = 0;
  friend bool operator==(const Cell&, const Cell&) = default;
  friend auto operator<=>(const Cell&, const Cell&) = default;
};

struct GridLayout {
  int width = 0;
  int height = 0;
  Cell start;
  std::vector<std::string> propositions;     // alphabet order
  std::vector<bool> walls;                   // row-major
  std::vector<int> contents;                 // row-major, proposition index or -1

  bool in_bounds(int x, int y) const { return x >= 0 && y >= 0 && x < width && y < height; }
  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width) +
           static_cast<std::size_t>(x);
  }
  bool wall(int x, int y) const { return !in_bounds(x, y) || walls[index(x, y)]; }
  int content(int x, int y) const { return in_bounds(x, y) ? contents[index(x, y)] : -1; }
  std::vector<Cell> cells_with(int proposition) const;

  // Throws LayoutError when the start is a wall or holds a proposition.
  void validate() const;
};

// Parses the layout text format documented in docs/layout-format.md.
GridLayout parse_layout(const std::string& text);
GridLayout load_layout(const std::string& path);
std::string render_layout(const GridLayout& layout, std::optional<Cell> agent = std::nullopt);

const char* office_map_text();
GridLayout office_layout();

struct MiniCraftOptions {
  int size = 45;
  int wood = 5;
  int workshop = 5;
  int trap = 10;
  int marsh = 10;
};

// Seeded MiniCraft placement: every sub-goal cell (Wood, Workshop) gets at
// least one hazard (Trap or Marsh) on a neighbouring cell, the remaining
// hazards are uniform, and every sub-goal stays reachable from the start
// without crossing a hazard.
GridLayout generate_minicraft(std::uint64_t seed, const MiniCraftOptions& options = {});

// Four-connected grid with position-only labels and no slip.
class GridWorld : public Environment {
 public:
  // Fixed layout: reset ignores the seed.
  GridWorld(std::string kind, GridLayout layout, int step_cap, int patch = 5);

  std::string kind() const override { return kind_; }
  const ltl::Alphabet& alphabet() const override { return alphabet_; }
  int action_count() const override { return 4; }
  std::size_t feature_size() const override;
  std::size_t state_count() const override;
  int default_step_cap() const override { return step_cap_; }

  EnvState reset(std::uint64_t seed) override;
  EnvState transition(const EnvState& s, Action a) const override;
  EnvState state_at(std::size_t id) const override;
  std::vector<double> features(const EnvState& s) const override;
  std::unique_ptr<Environment> clone() const override;

  const GridLayout& layout() const noexcept { return layout_; }
  int patch() const noexcept { return patch_; }

 protected:
  virtual void regenerate(std::uint64_t /*seed*/) {}
  void set_layout(GridLayout layout);

 private:
  EnvState make_state(int x, int y) const;

  std::string kind_;
  GridLayout layout_;
  ltl::Alphabet alphabet_;
  int step_cap_;
  int patch_;
};

class MiniCraft : public GridWorld {
 public:
  explicit MiniCraft(MiniCraftOptions options = {}, int step_cap = 1000, int patch = 5,
                     std::uint64_t layout_seed = 0);
  std::unique_ptr<Environment> clone() const override;

 protected:
  void regenerate(std::uint64_t seed) override;

 private:
  MiniCraftOptions options_;
  std::uint64_t layout_seed_;
};

std::unique_ptr<GridWorld> make_office(int step_cap = 200, int patch = 5);

}  // namespace t2tl::env
