// SPDX-License-Identifier: Apache-2.0
#include <fstream>
#include <map>
#include <sstream>

#include "t2tl/env/grid.hpp"
#include "t2tl/error.hpp"
#include "t2tl/ltl/alphabet.hpp"

namespace t2tl::env {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

std::vector<Cell> GridLayout::cells_with(int proposition) const {
  std::vector<Cell> out;
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      if (contents[index(x, y)] == proposition) out.push_back({x, y});
    }
  }
  return out;
}

void GridLayout::validate() const {
  if (width <= 0 || height <= 0) throw LayoutError("layout has no cells");
  const auto cells = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  if (walls.size() != cells || contents.size() != cells) {
    throw LayoutError("layout arrays do not match its dimensions");
  }
  if (!in_bounds(start.x, start.y)) throw LayoutError("start cell out of bounds");
  if (wall(start.x, start.y)) throw LayoutError("start cell is a wall");
  if (content(start.x, start.y) >= 0) throw LayoutError("start cell carries a proposition");
  for (std::size_t i = 0; i < cells; ++i) {
    if (contents[i] >= static_cast<int>(propositions.size())) {
      throw LayoutError("cell content refers to an unknown proposition");
    }
    if (walls[i] && contents[i] >= 0) throw LayoutError("wall cell carries a proposition");
  }
}

GridLayout parse_layout(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::map<char, int> legend;
  GridLayout layout;
  bool in_grid = false;
  std::vector<std::string> rows;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!in_grid) {
      const std::string t = trim(line);
      if (t.empty() || t[0] == '#') continue;
      if (t == "---") {
        in_grid = true;
        continue;
      }
      std::istringstream fields(t);
      std::string ch, name, extra;
      fields >> ch >> name;
      if (ch.size() != 1 || name.empty() || (fields >> extra)) {
        throw LayoutError("line " + std::to_string(line_no) +
                          ": expected '<char> <Proposition>' in the legend");
      }
      const char c = ch[0];
      if (c == '#' || c == '.' || c == '@') {
        throw LayoutError("line " + std::to_string(line_no) + ": '" + ch + "' is reserved");
      }
      if (!ltl::is_valid_proposition_name(name)) {
        throw LayoutError("line " + std::to_string(line_no) + ": bad proposition name '" +
                          name + "'");
      }
      if (legend.count(c)) {
        throw LayoutError("line " + std::to_string(line_no) + ": '" + ch + "' mapped twice");
      }
      legend[c] = static_cast<int>(layout.propositions.size());
      layout.propositions.push_back(name);
    } else {
      if (trim(line).empty()) continue;
      rows.push_back(line);
    }
  }
  if (!in_grid) throw LayoutError("layout has no '---' separator");
  if (rows.empty()) throw LayoutError("layout grid is empty");

  layout.height = static_cast<int>(rows.size());
  layout.width = static_cast<int>(rows.front().size());
  bool have_start = false;
  for (int y = 0; y < layout.height; ++y) {
    const std::string& row = rows[static_cast<std::size_t>(y)];
    if (static_cast<int>(row.size()) != layout.width) {
      throw LayoutError("grid row " + std::to_string(y) + " has width " +
                        std::to_string(row.size()) + ", expected " +
                        std::to_string(layout.width));
    }
    for (int x = 0; x < layout.width; ++x) {
      const char c = row[static_cast<std::size_t>(x)];
      bool wall = false;
      int content = -1;
      if (c == '#') {
        wall = true;
      } else if (c == '@') {
        if (have_start) throw LayoutError("layout has more than one start cell");
        have_start = true;
        layout.start = {x, y};
      } else if (c != '.') {
        auto it = legend.find(c);
        if (it == legend.end()) {
          throw LayoutError(std::string("grid character '") + c + "' is not in the legend");
        }
        content = it->second;
      }
      layout.walls.push_back(wall);
      layout.contents.push_back(content);
    }
  }
  if (!have_start) throw LayoutError("layout has no start cell '@'");
  layout.validate();
  return layout;
}

GridLayout load_layout(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw LayoutError("cannot open layout file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_layout(buf.str());
}

std::string render_layout(const GridLayout& layout, std::optional<Cell> agent) {
  std::ostringstream out;
  for (int y = 0; y < layout.height; ++y) {
    for (int x = 0; x < layout.width; ++x) {
      char c = '.';
      if (layout.wall(x, y)) {
        c = '#';
      } else if (agent && agent->x == x && agent->y == y) {
        c = '@';
      } else if (int p = layout.content(x, y); p >= 0) {
        // First letter only; ambiguous names are a debugging nuisance, not an error.
        c = layout.propositions[static_cast<std::size_t>(p)].front();
      }
      out << c;
    }
    out << '\n';
  }
  return out.str();
}

GridLayout office_layout() { return parse_layout(office_map_text()); }

}  // namespace t2tl::env
