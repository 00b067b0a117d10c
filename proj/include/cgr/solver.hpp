#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "cgr/concept_graph.hpp"
#include "cgr/environment.hpp"
#include "cgr/errors.hpp"
#include "cgr/inhibition.hpp"
#include "cgr/trace.hpp"

namespace cgr {

struct Solution {
  std::vector<State> path;
  std::vector<Direction> moves;
  NodeId concept_id;
};

inline std::string moves_string(const std::vector<Direction>& moves, char sep = ' ') {
  std::string out;
  for (std::size_t i = 0; i < moves.size(); ++i) {
    if (i && sep) out += sep;
    out += to_char(moves[i]);
  }
  return out;
}

namespace detail {

// Fixed-size bit set over state indices.
class StateSet {
 public:
  explicit StateSet(std::size_t n = 0) : words_((n + 63) / 64) {}

  void insert(std::size_t i) { words_[i / 64] |= std::uint64_t{1} << (i % 64); }
  bool contains(std::size_t i) const { return (words_[i / 64] >> (i % 64)) & 1u; }

  std::size_t overlap(const StateSet& o) const {
    std::size_t n = 0;
    for (std::size_t i = 0; i < words_.size(); ++i) n += static_cast<std::size_t>(__builtin_popcountll(words_[i] & o.words_[i]));
    return n;
  }

 private:
  std::vector<std::uint64_t> words_;
};

}  // namespace detail

// Grounded planner over one environment.
//
// Every reachable state is a State node of the solver's own concept graph, so
// dead-end pruning and counterfactual inhibition are ordinary inhibition
// sessions. Search grows one path branch per direction from the start and,
// alternately, from the goal; a branch dies when its head is inhibited or
// can only continue through its own trajectory. A forward and a backward
// branch meeting on the same state make a solution.
class Solver {
 public:
  explicit Solver(Environment env, Trace* trace = nullptr)
      : env_(std::move(env)), trace_(trace), sessions_(graph_, trace) {
    build();
  }

  Solver(const Solver&) = delete;
  Solver& operator=(const Solver&) = delete;

  const Environment& environment() const noexcept { return env_; }
  ConceptGraph& graph() noexcept { return graph_; }
  Sessions& sessions() noexcept { return sessions_; }

  // All states reachable by legal actions, their transitions and the goal
  // state as target.
  const StateGraphView& state_graph() const noexcept { return view_; }

  std::size_t state_count() const noexcept { return states_.size(); }
  const std::vector<State>& states() const noexcept { return states_; }
  const State& state_of(NodeId n) const { return states_.at(n.value); }

  std::optional<NodeId> node_of(const State& s) const {
    auto it = index_.find(s);
    if (it == index_.end()) return std::nullopt;
    return NodeId{static_cast<std::uint32_t>(it->second)};
  }

  // Base-layer inhibition of every state with the agent on one of the cells.
  void forbid_cells(const std::vector<Cell>& cells) {
    std::set<Cell> bad(cells.begin(), cells.end());
    for (std::size_t i = 0; i < states_.size(); ++i) {
      if (bad.count(states_[i].agent)) inhibit_base(NodeId{static_cast<std::uint32_t>(i)});
    }
  }

  void forbid_concept(NodeId n) { inhibit_base(n); }

  // States unavailable to planning after the dead-end rule runs to a
  // fixpoint (includes anything already inhibited).
  std::set<State> prune_deadlocks() {
    const std::size_t base = sessions_.depth();
    sessions_.begin();
    prune();
    std::set<State> out;
    for (std::size_t i = 0; i < states_.size(); ++i) {
      if (graph_.is_inhibited(NodeId{static_cast<std::uint32_t>(i)})) out.insert(states_[i]);
    }
    sessions_.release_to(base);
    return out;
  }

  std::optional<Solution> solve() {
    const std::size_t base = sessions_.depth();
    sessions_.begin();
    std::optional<Solution> result;
    try {
      prune();
      result = search();
    } catch (...) {
      sessions_.release_to(base);
      throw;
    }
    sessions_.release_to(base);
    return result;
  }

  // Solve, inhibit the solution's concept, restart; until nothing is left or
  // max solutions are found.
  std::vector<Solution> enumerate_solutions(std::optional<std::size_t> max = std::nullopt) {
    const std::size_t base = sessions_.depth();
    std::vector<Solution> out;
    try {
      while (!max || out.size() < *max) {
        auto s = solve();
        if (!s) break;
        out.push_back(*s);
        sessions_.begin();
        sessions_.inhibit(s->concept_id);
      }
    } catch (...) {
      sessions_.release_to(base);
      throw;
    }
    sessions_.release_to(base);
    return out;
  }

 private:
  struct Branch {
    std::vector<std::uint32_t> path;  // from the branch root to its head
    std::vector<Direction> moves;     // forward: as walked; backward: walked towards the goal
    detail::StateSet visited;
  };

  void build() {
    State s0 = env_.start_state();
    if (env_.is_wall(s0.agent) || (s0.box && (env_.is_wall(*s0.box) || *s0.box == s0.agent))) {
      throw InvalidEnvError("start state is not on free cells");
    }
    std::deque<std::size_t> queue;
    auto intern = [&](const State& s) {
      auto [it, fresh] = index_.emplace(s, states_.size());
      if (fresh) {
        states_.push_back(s);
        queue.push_back(it->second);
      }
      return it->second;
    };
    intern(s0);
    while (!queue.empty()) {
      std::size_t i = queue.front();
      queue.pop_front();
      State cur = states_[i];
      std::vector<std::pair<Direction, std::size_t>> out;
      for (auto d : kDirections) {
        if (auto next = env_.step(cur, d)) out.push_back({d, intern(*next)});
      }
      if (succ_.size() <= i) succ_.resize(i + 1);
      succ_[i] = std::move(out);
    }
    succ_.resize(states_.size());
    pred_.assign(states_.size(), {});
    for (std::size_t i = 0; i < states_.size(); ++i) {
      for (auto [d, j] : succ_[i]) pred_[j].push_back({d, i});
    }

    for (std::size_t i = 0; i < states_.size(); ++i) {
      NodeId n = graph_.create_node(NodeKind::State, "state:" + to_string(states_[i]));
      view_.states.insert(n);
      auto& t = view_.transitions[n];
      for (auto [d, j] : succ_[i]) t.insert(NodeId{static_cast<std::uint32_t>(j)});
      if (env_.is_goal(states_[i])) {
        view_.targets.insert(n);
        goal_ = i;
      }
    }
    start_ = 0;

    if (env_.kind() == EnvKind::PushPuzzle) build_regions();
  }

  // Agent-reachable zones with the box fixed. Pushes are the only moves
  // between zones.
  void build_regions() {
    region_of_.assign(states_.size(), SIZE_MAX);
    std::size_t regions = 0;
    for (std::size_t i = 0; i < states_.size(); ++i) {
      if (region_of_[i] != SIZE_MAX) continue;
      std::vector<std::size_t> stack{i};
      region_of_[i] = regions;
      while (!stack.empty()) {
        std::size_t cur = stack.back();
        stack.pop_back();
        auto walk = [&](const std::vector<std::pair<Direction, std::size_t>>& adj) {
          for (auto [d, j] : adj) {
            if (states_[j].box == states_[cur].box && region_of_[j] == SIZE_MAX) {
              region_of_[j] = regions;
              stack.push_back(j);
            }
          }
        };
        walk(succ_[cur]);
        walk(pred_[cur]);
      }
      ++regions;
    }
    members_.assign(regions, {});
    for (std::size_t i = 0; i < states_.size(); ++i) members_[region_of_[i]].push_back(i);
    for (std::size_t r = 0; r < regions; ++r) {
      const State& s = states_[members_[r].front()];
      region_nodes_.push_back(graph_.create_node(NodeKind::State, "region:box" + to_string(State{*s.box, {}})));
    }
    for (std::size_t r = 0; r < regions; ++r) {
      region_view_.states.insert(region_nodes_[r]);
      auto& t = region_view_.transitions[region_nodes_[r]];
      for (auto i : members_[r]) {
        for (auto [d, j] : succ_[i]) {
          if (region_of_[j] != r) t.insert(region_nodes_[region_of_[j]]);
        }
      }
    }
    if (goal_) region_view_.targets.insert(region_nodes_[region_of_[*goal_]]);
  }

  void inhibit_base(NodeId n) {
    if (sessions_.depth() != 0) throw Error("base-layer inhibition requires depth 0");
    sessions_.inhibit(n);
  }

  NodeId node(std::size_t i) const { return NodeId{static_cast<std::uint32_t>(i)}; }

  bool dead(std::size_t i) const { return graph_.is_inhibited(node(i)); }

  // Dead-end rule in the current session. Mazes are reversible, so a cell
  // whose only live neighbour is the one it was entered from is a dead end;
  // push puzzles are pruned zone by zone, then state by state.
  void prune() {
    if (env_.kind() == EnvKind::Maze) {
      StateGraphView v = view_;
      v.reversible = true;
      v.origins.insert(node(start_));
      sessions_.propagate(&v);
      return;
    }
    sessions_.propagate(&region_view_);
    for (std::size_t r = 0; r < region_nodes_.size(); ++r) {
      if (!graph_.is_inhibited(region_nodes_[r])) continue;
      for (auto i : members_[r]) sessions_.inhibit(node(i));
    }
    sessions_.propagate(&view_);
  }

  // Can `from` still reach `target` through live states outside the branch?
  bool can_reach(std::size_t from, std::size_t target, const detail::StateSet& avoid, bool forward) const {
    if (from == target) return true;
    std::vector<char> seen(states_.size());
    std::vector<std::size_t> stack{from};
    seen[from] = 1;
    while (!stack.empty()) {
      std::size_t cur = stack.back();
      stack.pop_back();
      for (auto [d, j] : forward ? succ_[cur] : pred_[cur]) {
        if (seen[j] || dead(j)) continue;
        if (j == target) return true;
        if (avoid.contains(j)) continue;
        seen[j] = 1;
        stack.push_back(j);
      }
    }
    return false;
  }

  void note(TraceEvent e, std::size_t state) {
    if (trace_) trace_->record(e, to_string(states_[state]), sessions_.depth());
  }

  Branch root_branch(std::size_t i) const {
    Branch b{{static_cast<std::uint32_t>(i)}, {}, detail::StateSet(states_.size())};
    b.visited.insert(i);
    return b;
  }

  // One expansion round, one child branch per live direction.
  std::vector<Branch> expand(const std::vector<Branch>& frontier, bool forward, std::size_t excluded,
                             std::vector<Branch>* reached_goal) {
    std::vector<Branch> next;
    const std::size_t target = forward ? *goal_ : start_;
    for (const auto& b : frontier) {
      std::size_t head = b.path.back();
      for (auto [d, j] : forward ? succ_[head] : pred_[head]) {
        if (dead(j) || b.visited.contains(j)) continue;
        if (j == excluded) {
          if (reached_goal) {
            Branch done = b;
            done.path.push_back(static_cast<std::uint32_t>(j));
            done.moves.push_back(d);
            reached_goal->push_back(std::move(done));
          }
          continue;
        }
        Branch child = b;
        child.path.push_back(static_cast<std::uint32_t>(j));
        child.moves.push_back(d);
        child.visited.insert(j);
        if (!can_reach(j, target, child.visited, forward)) {
          note(TraceEvent::Inhibit, j);
          continue;
        }
        note(TraceEvent::Branch, j);
        next.push_back(std::move(child));
      }
    }
    return next;
  }

  struct Candidate {
    std::vector<std::uint32_t> path;
    std::vector<Direction> moves;
    std::size_t meet;
  };

  bool rejected(const std::vector<std::uint32_t>& path) const {
    auto it = concepts_.find(path);
    return it != concepts_.end() && graph_.is_inhibited(it->second);
  }

  std::vector<Candidate> meetings(const std::vector<Branch>& fwd, const std::vector<Branch>& bwd) const {
    std::map<std::uint32_t, std::vector<const Branch*>> heads;
    for (const auto& b : bwd) heads[b.path.back()].push_back(&b);
    std::vector<Candidate> out;
    for (const auto& f : fwd) {
      auto it = heads.find(f.path.back());
      if (it == heads.end()) continue;
      for (const Branch* b : it->second) {
        if (f.visited.overlap(b->visited) != 1) continue;
        Candidate c{f.path, f.moves, f.path.back()};
        for (std::size_t k = b->path.size() - 1; k-- > 0;) c.path.push_back(b->path[k]);
        for (std::size_t k = b->moves.size(); k-- > 0;) c.moves.push_back(b->moves[k]);
        if (!rejected(c.path)) out.push_back(std::move(c));
      }
    }
    return out;
  }

  std::optional<Solution> finish(const std::vector<Candidate>& found) {
    auto best = std::min_element(found.begin(), found.end(),
                                 [](const Candidate& a, const Candidate& b) { return a.moves < b.moves; });
    note(TraceEvent::Merge, best->meet);
    Solution s;
    for (auto i : best->path) s.path.push_back(states_[i]);
    s.moves = best->moves;
    std::string label = "solution:" + moves_string(s.moves, 0);
    if (auto existing = graph_.find_by_label(NodeKind::SolutionConcept, label)) {
      s.concept_id = *existing;
    } else {
      s.concept_id = graph_.create_node(NodeKind::SolutionConcept, label, s.path.size());
      if (trace_) trace_->record(TraceEvent::CreateNode, std::to_string(s.concept_id.value), sessions_.depth());
    }
    concepts_.emplace(best->path, s.concept_id);
    if (trace_) trace_->record(TraceEvent::Solution, std::to_string(s.concept_id.value), sessions_.depth());
    return s;
  }

  std::optional<Solution> no_solution() {
    if (trace_) trace_->record(TraceEvent::NoSolution, to_string(states_[start_]), sessions_.depth());
    return std::nullopt;
  }

  std::optional<Solution> search() {
    if (!goal_ || dead(start_) || dead(*goal_)) {
      // Nothing can reach the goal, so every first step dies at once.
      if (!dead(start_)) {
        for (auto [d, j] : succ_[start_]) {
          if (!dead(j)) note(TraceEvent::Inhibit, j);
        }
      }
      note(TraceEvent::Inhibit, start_);
      return no_solution();
    }
    note(TraceEvent::Activate, start_);
    note(TraceEvent::Activate, *goal_);
    std::vector<Branch> fwd{root_branch(start_)};
    std::vector<Branch> bwd{root_branch(*goal_)};
    bool first_round = true;

    for (;;) {
      std::vector<Branch> direct;
      fwd = expand(fwd, true, *goal_, first_round ? &direct : nullptr);
      first_round = false;
      std::vector<Candidate> found;
      for (auto& d : direct) {
        if (!rejected(d.path)) found.push_back({d.path, d.moves, d.path.back()});
      }
      auto met = meetings(fwd, bwd);
      found.insert(found.end(), met.begin(), met.end());
      if (!found.empty()) return finish(found);
      if (fwd.empty()) return no_solution();

      bwd = expand(bwd, false, start_, nullptr);
      met = meetings(fwd, bwd);
      if (!met.empty()) return finish(met);
      if (bwd.empty()) return no_solution();
    }
  }

  Environment env_;
  Trace* trace_;
  ConceptGraph graph_;
  Sessions sessions_;

  std::vector<State> states_;
  std::map<State, std::size_t> index_;
  std::vector<std::vector<std::pair<Direction, std::size_t>>> succ_;
  std::vector<std::vector<std::pair<Direction, std::size_t>>> pred_;
  StateGraphView view_;
  std::size_t start_ = 0;
  std::optional<std::size_t> goal_;

  std::vector<std::size_t> region_of_;
  std::vector<std::vector<std::size_t>> members_;
  std::vector<NodeId> region_nodes_;
  StateGraphView region_view_;

  std::map<std::vector<std::uint32_t>, NodeId> concepts_;
};

inline std::optional<Solution> solve(const Environment& env, Trace* trace = nullptr) {
  Solver s(env, trace);
  return s.solve();
}

inline std::vector<Solution> enumerate_solutions(const Environment& env, std::optional<std::size_t> max = std::nullopt,
                                                 Trace* trace = nullptr) {
  Solver s(env, trace);
  return s.enumerate_solutions(max);
}

// Forbidden cells become permanent base-layer inhibitions before solving.
inline std::optional<Solution> solve_with_constraints(const Environment& env, const std::vector<Cell>& forbidden,
                                                      Trace* trace = nullptr) {
  Solver s(env, trace);
  s.forbid_cells(forbidden);
  return s.solve();
}

}  // namespace cgr
