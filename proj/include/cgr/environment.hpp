#pragma once

#include <array>
#include <compare>
#include <fstream>
#include <istream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "cgr/errors.hpp"
#include "cgr/grid.hpp"

namespace cgr {

enum class EnvKind { Maze, PushPuzzle };

enum class Direction { N, E, S, W };

inline constexpr std::array<Direction, 4> kDirections{Direction::N, Direction::E, Direction::S, Direction::W};

inline constexpr Cell delta(Direction d) {
  switch (d) {
    case Direction::N: return {0, -1};
    case Direction::E: return {1, 0};
    case Direction::S: return {0, 1};
    case Direction::W: return {-1, 0};
  }
  return {0, 0};
}

inline char to_char(Direction d) { return "NESW"[static_cast<int>(d)]; }

struct State {
  Cell agent;
  std::optional<Cell> box;

  auto operator<=>(const State&) const = default;
};

inline std::string to_string(const State& s) {
  std::string out = "(" + std::to_string(s.agent.x) + "," + std::to_string(s.agent.y);
  if (s.box) out += "|" + std::to_string(s.box->x) + "," + std::to_string(s.box->y);
  return out + ")";
}

// Grid world: '#' wall, '.' or ' ' free, 'S' start, 'G' goal, and for push
// puzzles one 'B' box and one 'T' box target. Cells outside the grid are walls.
class Environment {
 public:
  static Environment from_rows(std::vector<std::string> rows) {
    std::size_t width = 0;
    for (auto& r : rows) {
      if (!r.empty() && r.back() == '\r') r.pop_back();
      width = std::max(width, r.size());
    }
    while (!rows.empty() && rows.back().empty()) rows.pop_back();
    if (rows.empty() || width == 0) throw InvalidEnvError("empty environment");
    if (rows.size() > static_cast<std::size_t>(kMaxGridSide) || width > static_cast<std::size_t>(kMaxGridSide)) {
      throw InvalidEnvError("environment larger than 256x256");
    }

    Environment env;
    env.grid_ = Grid(static_cast<int>(width), static_cast<int>(rows.size()), '#');
    int starts = 0, goals = 0, boxes = 0, targets = 0;
    for (std::size_t y = 0; y < rows.size(); ++y) {
      for (std::size_t x = 0; x < rows[y].size(); ++x) {
        Cell c{static_cast<int>(x), static_cast<int>(y)};
        char ch = rows[y][x];
        switch (ch) {
          case '#': break;
          case '.':
          case ' ': env.grid_.set(c, ' '); break;
          case 'S': env.start_ = c, ++starts, env.grid_.set(c, ' '); break;
          case 'G': env.goal_ = c, ++goals, env.grid_.set(c, ' '); break;
          case 'B': env.box_ = c, ++boxes, env.grid_.set(c, ' '); break;
          case 'T': env.box_target_ = c, ++targets, env.grid_.set(c, ' '); break;
          default:
            throw InvalidEnvError("line " + std::to_string(y + 1) + ": unexpected character '" + std::string(1, ch) + "'");
        }
      }
    }
    if (starts != 1) throw InvalidEnvError("environment needs exactly one S");
    if (goals != 1) throw InvalidEnvError("environment needs exactly one G");
    if (boxes == 0 && targets == 0) {
      env.kind_ = EnvKind::Maze;
      env.box_.reset();
      env.box_target_.reset();
    } else if (boxes == 1 && targets == 1) {
      env.kind_ = EnvKind::PushPuzzle;
    } else {
      throw InvalidEnvError("a push puzzle needs exactly one B and one T");
    }
    return env;
  }

  static Environment parse(std::istream& is) {
    std::vector<std::string> rows;
    std::string line;
    while (std::getline(is, line)) rows.push_back(line);
    return from_rows(std::move(rows));
  }

  static Environment parse(const std::string& text) {
    std::istringstream is(text);
    return parse(is);
  }

  static Environment load(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw Error("cannot read " + path);
    return parse(is);
  }

  EnvKind kind() const noexcept { return kind_; }
  int width() const noexcept { return grid_.width(); }
  int height() const noexcept { return grid_.height(); }
  Cell start() const noexcept { return start_; }
  Cell goal() const noexcept { return goal_; }
  std::optional<Cell> box() const noexcept { return box_; }
  std::optional<Cell> box_target() const noexcept { return box_target_; }

  bool is_wall(Cell c) const noexcept { return !grid_.in_bounds(c) || grid_.get(c) == '#'; }

  State start_state() const { return {start_, box_}; }

  bool is_goal(const State& s) const {
    if (s.agent != goal_) return false;
    return kind_ == EnvKind::Maze || s.box == box_target_;
  }

  State goal_state() const { return {goal_, box_target_}; }

  // Moves the agent one cell; walking into the box pushes it when the cell
  // beyond is free.
  std::optional<State> step(const State& s, Direction d) const {
    Cell to = s.agent + delta(d);
    if (is_wall(to)) return std::nullopt;
    if (s.box && *s.box == to) {
      Cell beyond = to + delta(d);
      if (is_wall(beyond)) return std::nullopt;
      return State{to, beyond};
    }
    return State{to, s.box};
  }

  // Rows using the input alphabet, with '.' for free cells.
  std::vector<std::string> rows() const {
    std::vector<std::string> out;
    for (int y = 0; y < height(); ++y) {
      std::string r;
      for (int x = 0; x < width(); ++x) {
        Cell c{x, y};
        char ch = is_wall(c) ? '#' : '.';
        if (box_target_ && c == *box_target_) ch = 'T';
        if (box_ && c == *box_) ch = 'B';
        if (c == goal_) ch = 'G';
        if (c == start_) ch = 'S';
        r += ch;
      }
      out.push_back(r);
    }
    return out;
  }

 private:
  Environment() = default;

  Grid grid_;
  EnvKind kind_ = EnvKind::Maze;
  Cell start_;
  Cell goal_;
  std::optional<Cell> box_;
  std::optional<Cell> box_target_;
};

}  // namespace cgr
