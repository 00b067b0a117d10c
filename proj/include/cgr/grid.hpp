#pragma once

#include <algorithm>
#include <compare>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "cgr/errors.hpp"

namespace cgr {

inline constexpr int kMaxGridSide = 256;
inline constexpr char kEmpty = '.';

struct Cell {
  int x = 0;
  int y = 0;

  // Row-major: by y, then x.
  constexpr std::strong_ordering operator<=>(const Cell& o) const {
    if (auto c = y <=> o.y; c != 0) return c;
    return x <=> o.x;
  }
  constexpr bool operator==(const Cell&) const = default;
  constexpr Cell operator+(Cell o) const { return {x + o.x, y + o.y}; }
  constexpr Cell operator-(Cell o) const { return {x - o.x, y - o.y}; }
};

// Row-major rectangle of symbols; '.' is empty.
class Grid {
 public:
  Grid() : Grid(1, 1) {}

  Grid(int width, int height, char fill = kEmpty) : width_(width), height_(height) {
    if (width < 1 || height < 1 || width > kMaxGridSide || height > kMaxGridSide) {
      throw BoundsError("grid size " + std::to_string(width) + "x" + std::to_string(height) + " out of range");
    }
    cells_.assign(static_cast<std::size_t>(width) * height, fill);
  }

  // Rows of equal or ragged length; short rows are padded with '.'.
  static Grid from_rows(const std::vector<std::string>& rows) {
    if (rows.empty()) throw BoundsError("a grid needs at least one row");
    std::size_t w = 0;
    for (const auto& r : rows) w = std::max(w, r.size());
    if (w == 0) throw BoundsError("a grid needs at least one column");
    Grid g(static_cast<int>(w), static_cast<int>(rows.size()));
    for (std::size_t y = 0; y < rows.size(); ++y) {
      for (std::size_t x = 0; x < rows[y].size(); ++x) g.set({static_cast<int>(x), static_cast<int>(y)}, rows[y][x]);
    }
    return g;
  }

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }

  bool in_bounds(Cell c) const noexcept { return c.x >= 0 && c.y >= 0 && c.x < width_ && c.y < height_; }

  char at(Cell c) const {
    if (!in_bounds(c)) throw BoundsError("cell outside grid");
    return cells_[index(c)];
  }

  // '.' for coordinates outside the grid.
  char get(Cell c) const noexcept { return in_bounds(c) ? cells_[index(c)] : kEmpty; }

  void set(Cell c, char symbol) {
    if (!in_bounds(c)) throw BoundsError("cell outside grid");
    cells_[index(c)] = symbol;
  }

  bool occupied(Cell c) const noexcept { return get(c) != kEmpty; }

  std::size_t occupied_count() const noexcept {
    return static_cast<std::size_t>(std::count_if(cells_.begin(), cells_.end(), [](char s) { return s != kEmpty; }));
  }

  bool empty() const noexcept { return occupied_count() == 0; }

  // Occupied cells in row-major order.
  std::vector<Cell> occupied_cells() const {
    std::vector<Cell> out;
    out.reserve(occupied_count());
    for (int y = 0; y < height_; ++y) {
      for (int x = 0; x < width_; ++x) {
        if (cells_[index({x, y})] != kEmpty) out.push_back({x, y});
      }
    }
    return out;
  }

  // Smallest grid containing every occupied cell; nullopt when empty.
  std::optional<Grid> cropped() const {
    auto cells = occupied_cells();
    if (cells.empty()) return std::nullopt;
    int x0 = width_, y0 = height_, x1 = -1, y1 = -1;
    for (auto c : cells) {
      x0 = std::min(x0, c.x);
      y0 = std::min(y0, c.y);
      x1 = std::max(x1, c.x);
      y1 = std::max(y1, c.y);
    }
    Grid out(x1 - x0 + 1, y1 - y0 + 1);
    for (auto c : cells) out.set({c.x - x0, c.y - y0}, get(c));
    return out;
  }

  std::vector<std::string> rows() const {
    std::vector<std::string> out;
    for (int y = 0; y < height_; ++y) out.emplace_back(cells_.begin() + y * width_, cells_.begin() + (y + 1) * width_);
    return out;
  }

  std::string to_string() const {
    std::string out;
    for (const auto& r : rows()) {
      out += r;
      out += '\n';
    }
    return out;
  }

  bool operator==(const Grid&) const = default;

 private:
  std::size_t index(Cell c) const noexcept { return static_cast<std::size_t>(c.y) * width_ + c.x; }

  int width_;
  int height_;
  std::vector<char> cells_;
};

inline std::ostream& operator<<(std::ostream& os, const Grid& g) { return os << g.to_string(); }

// Pattern text: one row per line, '.' empty; trailing newline optional.
inline Grid parse_pattern(std::istream& is) {
  std::vector<std::string> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    for (char c : line) {
      if (c < 0x21 || c > 0x7e) throw ParseError(lineno, "non-printable symbol in pattern");
    }
    rows.push_back(line);
  }
  while (!rows.empty() && rows.back().empty()) rows.pop_back();
  if (rows.empty()) throw ParseError(lineno == 0 ? 1 : lineno, "empty pattern");
  if (rows.size() > static_cast<std::size_t>(kMaxGridSide)) throw ParseError(rows.size(), "pattern too tall");
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() > static_cast<std::size_t>(kMaxGridSide)) throw ParseError(i + 1, "pattern too wide");
  }
  try {
    return Grid::from_rows(rows);
  } catch (const BoundsError& e) {
    throw ParseError(1, e.what());
  }
}

inline Grid parse_pattern(const std::string& text) {
  std::istringstream is(text);
  return parse_pattern(is);
}

inline Grid load_pattern(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot read " + path);
  return parse_pattern(is);
}

}  // namespace cgr
