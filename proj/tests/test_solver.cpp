#include <gtest/gtest.h>

#include <sstream>

#include "cgr/errors.hpp"
#include "cgr/solver.hpp"
#include "oracles.hpp"

using namespace cgr;

namespace {

Environment env(std::vector<std::string> rows) { return Environment::from_rows(std::move(rows)); }

oracle::PState pstate(const State& s) { return {s.agent, s.box ? *s.box : oracle::kNoBox}; }

std::string compact(const Solution& s) { return moves_string(s.moves, 0); }

// Replays the moves from the start and checks the path is their trace, has
// no repeated state and ends in the goal state.
void expect_legal(const Environment& e, const Solution& sol) {
  ASSERT_EQ(sol.path.size(), sol.moves.size() + 1);
  ASSERT_EQ(sol.path.front(), e.start_state());
  std::set<State> seen{sol.path.front()};
  for (std::size_t i = 0; i < sol.moves.size(); ++i) {
    auto next = e.step(sol.path[i], sol.moves[i]);
    ASSERT_TRUE(next);
    ASSERT_EQ(*next, sol.path[i + 1]);
    ASSERT_TRUE(seen.insert(*next).second) << "repeated " << to_string(*next);
  }
  ASSERT_TRUE(e.is_goal(sol.path.back()));
}

std::string trace_text(const Environment& e, bool enumerate) {
  Trace t;
  Solver s(e, &t);
  if (enumerate) s.enumerate_solutions();
  else s.solve();
  std::ostringstream os;
  t.write(os);
  return os.str();
}

// Mazes small enough to enumerate by brute force.
std::vector<std::string> enumerable_maze(oracle::Rng& rng, int max_side, std::size_t max_paths) {
  while (true) {
    auto rows = oracle::random_maze_rows(rng, oracle::uniform(rng, 2, max_side), oracle::uniform(rng, 2, max_side), 0.3);
    if (oracle::all_simple_paths(oracle::World(rows), max_paths + 1).size() <= max_paths) return rows;
  }
}

}  // namespace

TEST(StateGraph, Corridor) {
  Solver s(env({"S.G"}));
  EXPECT_EQ(s.state_count(), 3u);
  const auto& v = s.state_graph();
  std::size_t edges = 0;
  for (const auto& [from, to] : v.transitions) edges += to.size();
  EXPECT_EQ(edges, 4u);  // two corridor links, each both ways
  ASSERT_EQ(v.targets.size(), 1u);
  EXPECT_EQ(s.state_of(*v.targets.begin()).agent, (Cell{2, 0}));
  EXPECT_EQ(s.graph().node(NodeId{0}).label, "state:(0,0)");
}

TEST(StateGraph, PocketHasOneTransition) {
  Solver s(env({"S..", "#.#", "#G#"}));
  auto pocket = s.node_of(State{{0, 0}, std::nullopt});
  ASSERT_TRUE(pocket);
  EXPECT_EQ(s.state_graph().transitions.at(*pocket).size(), 1u);
}

TEST(StateGraph, InvalidEnvironments) {
  EXPECT_THROW(env({"S.", ".."}), InvalidEnvError);
  EXPECT_THROW(env({"SG", "B."}), InvalidEnvError);
  EXPECT_THROW(env({"SGx"}), InvalidEnvError);
  EXPECT_THROW(env({"SSG"}), InvalidEnvError);
}

TEST(StateGraph, PushPuzzleMatchesProductConstruction) {
  oracle::Rng rng(5);
  for (int i = 0; i < 30; ++i) {
    auto rows = oracle::random_push_rows(rng, 5, 5, 0.2);
    Environment e = env(rows);
    oracle::World w(rows);
    Solver s(e);
    auto want = oracle::reachable(w);
    std::set<oracle::PState> got;
    for (const auto& st : s.states()) got.insert(pstate(st));
    ASSERT_EQ(got, want);
    for (const auto& [from, tos] : s.state_graph().transitions) {
      std::set<oracle::PState> mine, theirs;
      for (auto t : tos) mine.insert(pstate(s.state_of(t)));
      for (int d = 0; d < 4; ++d) {
        if (auto n = oracle::step(w, pstate(s.state_of(from)), d)) theirs.insert(*n);
      }
      ASSERT_EQ(mine, theirs);
    }
  }
}

TEST(StateGraph, PushesAreOneWay) {
  // pushing the box east cannot be undone by walking back
  Solver s(env({"SB..", "...T", "G..."}));
  State before{{0, 0}, Cell{1, 0}};
  State after{{1, 0}, Cell{2, 0}};
  auto b = s.node_of(before), a = s.node_of(after);
  ASSERT_TRUE(b && a);
  EXPECT_TRUE(s.state_graph().transitions.at(*b).count(*a));
  EXPECT_FALSE(s.state_graph().transitions.at(*a).count(*b));
}

TEST(Prune, StraightCorridorKeepsEverything) {
  Solver s(env({"S...G"}));
  EXPECT_TRUE(s.prune_deadlocks().empty());
}

TEST(Prune, TMazeArm) {
  Environment e = env({"S...G", "##.##", "##.##", "##.##"});
  Solver s(e);
  auto dead = s.prune_deadlocks();
  std::set<Cell> cells;
  for (const auto& st : dead) cells.insert(st.agent);
  EXPECT_EQ(cells, (std::set<Cell>{{2, 1}, {2, 2}, {2, 3}}));
  EXPECT_EQ(cells, oracle::cul_de_sacs(oracle::World(e)));
  EXPECT_EQ(s.sessions().depth(), 0u);
  EXPECT_TRUE(s.graph().inhibited_nodes().empty());
}

TEST(Prune, MazesMatchCulDeSacFilling) {
  oracle::Rng rng(12);
  for (int i = 0; i < 200; ++i) {
    auto rows = oracle::random_maze_rows(rng, oracle::uniform(rng, 1, 8), oracle::uniform(rng, 2, 8), 0.3);
    Environment e = env(rows);
    oracle::World w(rows);
    Solver s(e);
    std::set<Cell> cells;
    for (const auto& st : s.prune_deadlocks()) cells.insert(st.agent);
    ASSERT_EQ(cells, oracle::cul_de_sacs(w)) << i;
  }
}

TEST(Prune, CorneredBoxStates) {
  // box in the top-left corner, target elsewhere
  Environment e = env({"B...", "S..T", "...G"});
  Solver s(e);
  auto dead = s.prune_deadlocks();
  std::size_t with_box = 0;
  for (const auto& st : s.states()) {
    if (st.box == Cell{0, 0}) {
      ++with_box;
      EXPECT_TRUE(dead.count(st)) << to_string(st);
    }
  }
  EXPECT_GT(with_box, 0u);
  EXPECT_FALSE(s.solve());
}

TEST(Prune, PushPuzzlesMatchOracle) {
  oracle::Rng rng(77);
  for (int i = 0; i < 100; ++i) {
    auto rows = oracle::random_push_rows(rng, 5, 5, 0.2);
    Environment e = env(rows);
    oracle::World w(rows);
    Solver s(e);
    std::set<oracle::PState> got;
    for (const auto& st : s.prune_deadlocks()) got.insert(pstate(st));
    ASSERT_EQ(got, oracle::push_deadlocks(w)) << i;
    // nothing that can still finish is pruned
    for (const auto& st : oracle::can_finish(w)) ASSERT_FALSE(got.count(st));
  }
}

TEST(Prune, MazeSafety) {
  oracle::Rng rng(13);
  for (int i = 0; i < 100; ++i) {
    auto rows = enumerable_maze(rng, 6, 300);
    Solver s(env(rows));
    std::set<Cell> dead;
    for (const auto& st : s.prune_deadlocks()) dead.insert(st.agent);
    oracle::World w(rows);
    for (const auto& p : oracle::all_simple_paths(w)) {
      Cell c = w.s;
      ASSERT_FALSE(dead.count(c));
      for (char m : p) {
        c = c + oracle::kSteps[std::string("NESW").find(m)];
        ASSERT_FALSE(dead.count(c)) << p;
      }
    }
  }
}

TEST(Solve, Corridor) {
  Trace t;
  Environment e = env({"S.G"});
  auto sol = solve(e, &t);
  ASSERT_TRUE(sol);
  EXPECT_EQ(sol->path.size(), 3u);
  EXPECT_EQ(moves_string(sol->moves), "E E");
  expect_legal(e, *sol);
  bool reported = false;
  for (const auto& r : t.records()) reported = reported || r.event == TraceEvent::Solution;
  EXPECT_TRUE(reported);
}

TEST(Solve, WalledGoal) {
  Trace t;
  Environment e = env({"S.#.", "..#G"});
  EXPECT_FALSE(solve(e, &t));
  ASSERT_FALSE(t.empty());
  EXPECT_EQ(t.records().back().event, TraceEvent::NoSolution);
  std::set<std::string> inhibited;
  for (const auto& r : t.records()) {
    if (r.event == TraceEvent::Inhibit) inhibited.insert(r.subject);
  }
  // the start and each of its moves are shown dead
  EXPECT_TRUE(inhibited.count("(0,0)"));
  EXPECT_TRUE(inhibited.count("(1,0)"));
  EXPECT_TRUE(inhibited.count("(0,1)"));
}

TEST(Solve, OpenRoomIsLexMinShortest) {
  Environment e = env({"S...", "....", "....", "...G"});
  auto sol = solve(e);
  ASSERT_TRUE(sol);
  EXPECT_EQ(compact(*sol), *oracle::lexmin_shortest(oracle::World(e)));
  EXPECT_EQ(compact(*sol), "EEESSS");
}

TEST(Solve, OpenRoomsAgreeWithOracle) {
  for (int w = 2; w <= 6; ++w) {
    for (int h = 1; h <= 6; ++h) {
      std::vector<std::string> rows(static_cast<std::size_t>(h), std::string(static_cast<std::size_t>(w), '.'));
      rows[0][0] = 'S';
      rows[h - 1][w - 1] = 'G';
      auto sol = solve(env(rows));
      ASSERT_TRUE(sol);
      EXPECT_EQ(compact(*sol), *oracle::lexmin_shortest(oracle::World(rows))) << w << "x" << h;
    }
  }
}

TEST(Solve, MazesSoundAndComplete) {
  oracle::Rng rng(99);
  for (int i = 0; i < 200; ++i) {
    auto rows = oracle::random_maze_rows(rng, oracle::uniform(rng, 2, 8), oracle::uniform(rng, 1, 8), 0.3);
    Environment e = env(rows);
    auto sol = solve(e);
    ASSERT_EQ(sol.has_value(), oracle::solvable(oracle::World(rows))) << i;
    if (sol) expect_legal(e, *sol);
  }
}

TEST(Solve, PushPuzzlesSoundAndComplete) {
  oracle::Rng rng(41);
  int solved = 0;
  for (int i = 0; i < 60; ++i) {
    auto rows = oracle::random_push_rows(rng, 5, 5, 0.15);
    Environment e = env(rows);
    auto sol = solve(e);
    ASSERT_EQ(sol.has_value(), oracle::solvable(oracle::World(rows))) << i;
    if (sol) {
      expect_legal(e, *sol);
      ++solved;
    }
  }
  EXPECT_GT(solved, 0);
}

TEST(Solve, SolutionConcept) {
  Solver s(env({"S..", "...", "..G"}));
  auto a = s.solve();
  ASSERT_TRUE(a);
  const auto& n = s.graph().node(a->concept_id);
  EXPECT_EQ(n.kind, NodeKind::SolutionConcept);
  EXPECT_EQ(n.label, "solution:" + compact(*a));
  EXPECT_EQ(n.scale, a->path.size());
  // solving again reuses the concept
  auto b = s.solve();
  ASSERT_TRUE(b);
  EXPECT_EQ(b->concept_id, a->concept_id);
  EXPECT_EQ(s.sessions().depth(), 0u);
}

TEST(Solve, ForbiddenConceptGivesAnotherPath) {
  Solver s(env({"S..", "...", "..G"}));
  auto first = s.solve();
  ASSERT_TRUE(first);
  s.forbid_concept(first->concept_id);
  auto second = s.solve();
  ASSERT_TRUE(second);
  EXPECT_NE(compact(*first), compact(*second));
}

TEST(Solve, Deterministic) {
  oracle::Rng rng(3);
  for (int i = 0; i < 20; ++i) {
    auto rows = i % 2 ? oracle::random_push_rows(rng, 5, 5, 0.15) : enumerable_maze(rng, 5, 50);
    Environment e = env(rows);
    ASSERT_EQ(trace_text(e, false), trace_text(e, false));
    if (i % 2 == 0) {
      ASSERT_EQ(trace_text(e, true), trace_text(e, true));
    }
  }
}

TEST(Solve, TraceStepsAndDepths) {
  Trace t;
  Solver s(env({"S..", ".#.", "..G"}), &t);
  s.enumerate_solutions();
  for (std::size_t i = 0; i < t.size(); ++i) {
    ASSERT_EQ(t.records()[i].step, i);
    if (t.records()[i].event == TraceEvent::Inhibit) {
      ASSERT_GE(t.records()[i].session_depth, 1u);
    }
  }
}

TEST(Enumerate, SingleRoute) {
  Solver s(env({"S.#", "#.G"}));
  auto all = s.enumerate_solutions();
  ASSERT_EQ(all.size(), 1u);
  EXPECT_EQ(compact(all[0]), "ESE");
  EXPECT_EQ(s.sessions().depth(), 0u);
  EXPECT_TRUE(s.graph().inhibited_nodes().empty());
}

TEST(Enumerate, TwoByTwoRoom) {
  Environment e = env({"S.", ".G"});
  auto all = enumerate_solutions(e);
  std::set<std::string> got;
  for (const auto& s : all) got.insert(compact(s));
  EXPECT_EQ(got, (std::set<std::string>{"ES", "SE"}));
  EXPECT_EQ(got, oracle::all_simple_paths(oracle::World(e)));
}

TEST(Enumerate, MaxStopsEarly) {
  Environment e = env({"S..", "...", "..G"});
  EXPECT_EQ(enumerate_solutions(e, 3).size(), 3u);
  EXPECT_EQ(enumerate_solutions(e).size(), oracle::all_simple_paths(oracle::World(e)).size());
}

TEST(Enumerate, SecondDiffersFromFirst) {
  Environment e = env({"S...", ".##.", "...G"});
  auto all = enumerate_solutions(e);
  ASSERT_EQ(all.size(), 2u);
  EXPECT_NE(compact(all[0]), compact(all[1]));
}

TEST(Enumerate, MatchesAllSimplePaths) {
  oracle::Rng rng(21);
  for (int i = 0; i < 60; ++i) {
    auto rows = enumerable_maze(rng, 6, 400);
    Environment e = env(rows);
    Solver s(e);
    auto all = s.enumerate_solutions();
    std::set<std::string> got;
    for (const auto& sol : all) {
      expect_legal(e, sol);
      ASSERT_TRUE(got.insert(compact(sol)).second) << "duplicate " << compact(sol);
    }
    ASSERT_EQ(got, oracle::all_simple_paths(oracle::World(rows))) << i;
    ASSERT_EQ(s.sessions().depth(), 0u);
  }
}

TEST(Constraints, EmptyIsPlainSolve) {
  Environment e = env({"S..", ".#.", "..G"});
  auto a = solve(e), b = solve_with_constraints(e, {});
  ASSERT_TRUE(a && b);
  EXPECT_EQ(a->moves, b->moves);
}

TEST(Constraints, BlockedCorridor) {
  Environment e = env({"S.#", "#.G"});
  EXPECT_FALSE(solve_with_constraints(e, {{1, 1}}));
}

TEST(Constraints, OtherRoute) {
  Environment e = env({"S...", ".##.", "...G"});
  auto sol = solve_with_constraints(e, {{1, 0}});
  ASSERT_TRUE(sol);
  EXPECT_EQ(compact(*sol), "SSEEE");
}

TEST(Constraints, MatchFilteredReachability) {
  oracle::Rng rng(8);
  for (int i = 0; i < 100; ++i) {
    bool push = i % 4 == 3;
    auto rows = push ? oracle::random_push_rows(rng, 5, 5, 0.15)
                     : oracle::random_maze_rows(rng, oracle::uniform(rng, 2, 8), oracle::uniform(rng, 2, 8), 0.2);
    Environment e = env(rows);
    oracle::World w(rows);
    std::set<Cell> forbidden;
    for (int y = 0; y < e.height(); ++y) {
      for (int x = 0; x < e.width(); ++x) {
        if (!e.is_wall({x, y}) && oracle::coin(rng, 0.15)) forbidden.insert({x, y});
      }
    }
    auto sol = solve_with_constraints(e, {forbidden.begin(), forbidden.end()});
    ASSERT_EQ(sol.has_value(), oracle::solvable(w, forbidden)) << i;
    if (!sol) continue;
    expect_legal(e, *sol);
    for (const auto& st : sol->path) ASSERT_FALSE(forbidden.count(st.agent));
  }
}
