#pragma once

#include <compare>
#include <cstdlib>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cgr/errors.hpp"
#include "cgr/grid.hpp"

namespace cgr {

enum class TransformKind { Identity, Translate, Rotate90, ReflectH, ReflectV, Scale };

// A grid-to-grid geometric map. Translate keeps the canvas, Rotate90 turns it
// clockwise k quarter turns, ReflectH mirrors left/right, ReflectV mirrors
// top/bottom and Scale(k) blows every cell up into a k x k block.
struct Transformation {
  TransformKind kind = TransformKind::Identity;
  int dx = 0;
  int dy = 0;
  int k = 0;

  static constexpr Transformation identity() { return {}; }
  static constexpr Transformation translate(int dx, int dy) { return {TransformKind::Translate, dx, dy, 0}; }
  static constexpr Transformation rotate90(int k) { return {TransformKind::Rotate90, 0, 0, k}; }
  static constexpr Transformation reflect_h() { return {TransformKind::ReflectH, 0, 0, 0}; }
  static constexpr Transformation reflect_v() { return {TransformKind::ReflectV, 0, 0, 0}; }
  static constexpr Transformation scale(int k) { return {TransformKind::Scale, 0, 0, k}; }

  constexpr auto operator<=>(const Transformation&) const = default;
};

inline std::string to_label(const Transformation& t) {
  switch (t.kind) {
    case TransformKind::Identity: return "identity";
    case TransformKind::Translate: return "translate(" + std::to_string(t.dx) + "," + std::to_string(t.dy) + ")";
    case TransformKind::Rotate90: return "rotate90(" + std::to_string(t.k) + ")";
    case TransformKind::ReflectH: return "reflect_h";
    case TransformKind::ReflectV: return "reflect_v";
    case TransformKind::Scale: return "scale(" + std::to_string(t.k) + ")";
  }
  return "?";
}

inline std::optional<Transformation> parse_transformation(std::string_view s) {
  auto args = [&](std::string_view prefix) -> std::optional<std::string> {
    if (s.size() <= prefix.size() + 1 || s.substr(0, prefix.size()) != prefix || s[prefix.size()] != '(' ||
        s.back() != ')') {
      return std::nullopt;
    }
    return std::string(s.substr(prefix.size() + 1, s.size() - prefix.size() - 2));
  };
  auto to_int = [](const std::string& v, int& out) {
    char* end = nullptr;
    long r = std::strtol(v.c_str(), &end, 10);
    if (v.empty() || *end != '\0') return false;
    out = static_cast<int>(r);
    return true;
  };
  if (s == "identity") return Transformation::identity();
  if (s == "reflect_h") return Transformation::reflect_h();
  if (s == "reflect_v") return Transformation::reflect_v();
  if (auto a = args("translate")) {
    auto comma = a->find(',');
    int dx = 0, dy = 0;
    if (comma == std::string::npos || !to_int(a->substr(0, comma), dx) || !to_int(a->substr(comma + 1), dy)) {
      return std::nullopt;
    }
    return Transformation::translate(dx, dy);
  }
  int k = 0;
  if (auto a = args("rotate90"); a && to_int(*a, k) && k >= 1 && k <= 3) return Transformation::rotate90(k);
  if (auto a = args("scale"); a && to_int(*a, k) && k >= 2) return Transformation::scale(k);
  return std::nullopt;
}

inline Grid apply_transformation(const Transformation& t, const Grid& g) {
  const int w = g.width(), h = g.height();
  switch (t.kind) {
    case TransformKind::Identity:
      return g;
    case TransformKind::Translate: {
      Grid out(w, h);
      for (auto c : g.occupied_cells()) {
        Cell d{c.x + t.dx, c.y + t.dy};
        if (!out.in_bounds(d)) throw BoundsError("translation moves a cell off the grid");
        out.set(d, g.get(c));
      }
      return out;
    }
    case TransformKind::Rotate90: {
      const int k = ((t.k % 4) + 4) % 4;
      if (k == 0) return g;
      Grid out = k == 2 ? Grid(w, h) : Grid(h, w);
      for (auto c : g.occupied_cells()) {
        Cell d = k == 1 ? Cell{h - 1 - c.y, c.x} : k == 2 ? Cell{w - 1 - c.x, h - 1 - c.y} : Cell{c.y, w - 1 - c.x};
        out.set(d, g.get(c));
      }
      return out;
    }
    case TransformKind::ReflectH: {
      Grid out(w, h);
      for (auto c : g.occupied_cells()) out.set({w - 1 - c.x, c.y}, g.get(c));
      return out;
    }
    case TransformKind::ReflectV: {
      Grid out(w, h);
      for (auto c : g.occupied_cells()) out.set({c.x, h - 1 - c.y}, g.get(c));
      return out;
    }
    case TransformKind::Scale: {
      if (t.k < 2) throw BoundsError("scale factor must be at least 2");
      if (static_cast<long>(w) * t.k > kMaxGridSide || static_cast<long>(h) * t.k > kMaxGridSide) {
        throw BoundsError("scaled grid exceeds 256x256");
      }
      Grid out(w * t.k, h * t.k);
      for (auto c : g.occupied_cells()) {
        for (int yy = 0; yy < t.k; ++yy) {
          for (int xx = 0; xx < t.k; ++xx) out.set({c.x * t.k + xx, c.y * t.k + yy}, g.get(c));
        }
      }
      return out;
    }
  }
  return g;
}

// The grid h with apply_transformation(t, h) == g, if one exists.
inline std::optional<Grid> invert_transformation(const Transformation& t, const Grid& g) {
  try {
    switch (t.kind) {
      case TransformKind::Identity:
      case TransformKind::ReflectH:
      case TransformKind::ReflectV:
        return apply_transformation(t, g);
      case TransformKind::Translate:
        return apply_transformation(Transformation::translate(-t.dx, -t.dy), g);
      case TransformKind::Rotate90:
        return apply_transformation(Transformation::rotate90(4 - t.k), g);
      case TransformKind::Scale: {
        if (t.k < 2 || g.width() % t.k != 0 || g.height() % t.k != 0) return std::nullopt;
        Grid out(g.width() / t.k, g.height() / t.k);
        for (int y = 0; y < out.height(); ++y) {
          for (int x = 0; x < out.width(); ++x) {
            char s = g.get({x * t.k, y * t.k});
            for (int yy = 0; yy < t.k; ++yy) {
              for (int xx = 0; xx < t.k; ++xx) {
                if (g.get({x * t.k + xx, y * t.k + yy}) != s) return std::nullopt;
              }
            }
            out.set({x, y}, s);
          }
        }
        return out;
      }
    }
  } catch (const BoundsError&) {
    return std::nullopt;
  }
  return std::nullopt;
}

// Every family member whose parameters fit a w x h canvas, in search order:
// Identity, Translate (by |dx|+|dy|, then dx, then dy), Rotate90 k=1..3,
// ReflectH, ReflectV, Scale k=2.. while the result fits.
inline std::vector<Transformation> transformation_family(int w, int h) {
  std::vector<Transformation> out{Transformation::identity()};
  for (int dist = 1; dist <= (w - 1) + (h - 1); ++dist) {
    for (int dx = -(w - 1); dx <= w - 1; ++dx) {
      int rest = dist - std::abs(dx);
      if (rest < 0) continue;
      for (int dy : {-rest, rest}) {
        if (std::abs(dy) > h - 1) continue;
        out.push_back(Transformation::translate(dx, dy));
        if (rest == 0) break;
      }
    }
  }
  for (int k = 1; k <= 3; ++k) out.push_back(Transformation::rotate90(k));
  out.push_back(Transformation::reflect_h());
  out.push_back(Transformation::reflect_v());
  for (int k = 2; w * k <= kMaxGridSide && h * k <= kMaxGridSide; ++k) out.push_back(Transformation::scale(k));
  return out;
}

}  // namespace cgr
