#pragma once

#include <algorithm>
#include <array>
#include <climits>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "cgr/grid.hpp"

// Bottom-level feature vocabulary for symbol grids.
//
// For every symbol, a cell is on the boundary when one of its 4-neighbours
// (or the grid edge) holds something else. Features are:
//   - edge runs: maximal straight runs (length >= 2) of cells facing the same
//     side; a north-facing run is horizontal and has a foreign cell above
//     each of its cells, and so on for E/S/W;
//   - points: boundary cells not covered by any run;
//   - the fill: all interior (non-boundary) cells of the symbol, as one
//     feature, or a point if there is only one.
// Runs may overlap at corners; together the features cover every occupied
// cell.
namespace cgr {

enum class Facing { N, E, S, W };

inline char facing_char(Facing f) { return "NESW"[static_cast<int>(f)]; }

struct Feature {
  enum class Kind { Point, Run, Fill };

  Kind kind = Kind::Point;
  char symbol = kEmpty;
  Facing facing = Facing::N;  // runs only
  Cell anchor;                // top-left-most covered cell
  std::vector<Cell> cells;    // absolute, row-major

  std::size_t scale() const noexcept { return cells.size(); }

  // Primitive label for points and runs; composite label for fills.
  std::string label() const {
    switch (kind) {
      case Kind::Point: return std::string(1, symbol);
      case Kind::Run: return std::string(1, symbol) + ':' + facing_char(facing) + std::to_string(cells.size());
      case Kind::Fill: return std::string(1, symbol) + ":fill";
    }
    return {};
  }
};

struct RunShape {
  char symbol;
  Facing facing;
  int length;
};

// Decodes a run primitive label such as "x:N3".
inline std::optional<RunShape> parse_run_label(std::string_view label) {
  if (label.size() < 4 || label[1] != ':') return std::nullopt;
  auto pos = std::string_view("NESW").find(label[2]);
  if (pos == std::string_view::npos) return std::nullopt;
  int len = 0;
  for (char c : label.substr(3)) {
    if (c < '0' || c > '9') return std::nullopt;
    len = len * 10 + (c - '0');
    if (len > kMaxGridSide) return std::nullopt;
  }
  if (len < 2) return std::nullopt;
  return RunShape{label[0], static_cast<Facing>(pos), len};
}

inline bool is_fill_label(std::string_view label) {
  return label.size() == 6 && label.substr(1) == ":fill";
}

// Cells of a run relative to its anchor.
inline std::vector<Cell> run_cells(const RunShape& r) {
  std::vector<Cell> out;
  bool horizontal = r.facing == Facing::N || r.facing == Facing::S;
  for (int i = 0; i < r.length; ++i) out.push_back(horizontal ? Cell{i, 0} : Cell{0, i});
  return out;
}

inline std::vector<Feature> extract_features(const Grid& g) {
  const auto occupied = g.occupied_cells();
  std::array<bool, 256> seen{};
  for (auto c : occupied) seen[static_cast<unsigned char>(g.get(c))] = true;
  std::vector<char> symbols;
  for (int i = CHAR_MIN; i <= CHAR_MAX; ++i) {
    if (seen[static_cast<unsigned char>(i)]) symbols.push_back(static_cast<char>(i));
  }

  std::vector<Feature> out;
  const int w = g.width(), h = g.height();
  // mask of the current symbol with a one-cell empty border
  const int stride = w + 2;
  std::vector<char> mask(static_cast<std::size_t>(stride) * static_cast<std::size_t>(h + 2));
  std::vector<char> in_run(static_cast<std::size_t>(stride) * static_cast<std::size_t>(h + 2));
  auto flat = [&](Cell c) { return static_cast<std::size_t>((c.y + 1) * stride + c.x + 1); };
  for (char s : symbols) {
    std::fill(mask.begin(), mask.end(), 0);
    std::fill(in_run.begin(), in_run.end(), 0);
    for (auto c : occupied) {
      if (g.get(c) == s) mask[flat(c)] = 1;
    }
    auto is_s = [&](Cell c) { return mask[flat(c)] != 0; };

    auto scan = [&](Facing facing, Cell outward, bool horizontal) {
      const int outer = horizontal ? h : w;
      const int inner = horizontal ? w : h;
      const long off = outward.y * stride + outward.x;
      const long step = horizontal ? 1 : stride;
      for (int a = 0; a < outer; ++a) {
        auto at = [&](int i) { return horizontal ? Cell{i, a} : Cell{a, i}; };
        const long base = static_cast<long>(flat(at(0)));
        auto faces = [&](int i) {
          long k = base + i * step;
          return mask[static_cast<std::size_t>(k)] && !mask[static_cast<std::size_t>(k + off)];
        };
        int b = 0;
        while (b < inner) {
          if (!faces(b)) {
            ++b;
            continue;
          }
          int e = b;
          while (e + 1 < inner && faces(e + 1)) ++e;
          if (e > b) {
            Feature f;
            f.kind = Feature::Kind::Run;
            f.symbol = s;
            f.facing = facing;
            for (int i = b; i <= e; ++i) {
              f.cells.push_back(at(i));
              in_run[flat(at(i))] = 1;
            }
            f.anchor = f.cells.front();
            out.push_back(std::move(f));
          }
          b = e + 1;
        }
      }
    };
    scan(Facing::N, {0, -1}, true);
    scan(Facing::S, {0, 1}, true);
    scan(Facing::W, {-1, 0}, false);
    scan(Facing::E, {1, 0}, false);

    std::vector<Cell> interior;
    for (auto c : occupied) {
      if (!is_s(c)) continue;
      bool boundary = !is_s(c + Cell{0, -1}) || !is_s(c + Cell{1, 0}) || !is_s(c + Cell{0, 1}) ||
                      !is_s(c + Cell{-1, 0});
      if (boundary) {
        if (!in_run[flat(c)]) out.push_back({Feature::Kind::Point, s, Facing::N, c, {c}});
      } else {
        interior.push_back(c);
      }
    }
    if (interior.size() == 1) {
      out.push_back({Feature::Kind::Point, s, Facing::N, interior.front(), interior});
    } else if (interior.size() > 1) {
      out.push_back({Feature::Kind::Fill, s, Facing::N, interior.front(), interior});
    }
  }

  // Bigger features first; then by position and label.
  std::sort(out.begin(), out.end(), [](const Feature& a, const Feature& b) {
    return std::make_tuple(-static_cast<long>(a.scale()), a.anchor.y, a.anchor.x, a.label()) <
           std::make_tuple(-static_cast<long>(b.scale()), b.anchor.y, b.anchor.x, b.label());
  });
  return out;
}

}  // namespace cgr
