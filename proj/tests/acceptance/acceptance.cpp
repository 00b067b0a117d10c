// Acceptance run: one PASS/FAIL line per criterion, each timed against its
// limit. Exit status is non-zero when any criterion fails.

#include <unistd.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include "cgr/cgr.hpp"
#include "oracles.hpp"

using namespace cgr;
namespace fs = std::filesystem;

namespace {

struct Check {
  bool ok = true;
  std::string why;

  // Records the first failure only.
  bool expect(bool cond, const std::string& what) {
    if (!cond && ok) ok = false, why = what;
    return cond;
  }
};

struct Criterion {
  int number;
  const char* name;
  double limit_ms;
  std::function<void(Check&)> body;
};

Environment env(const std::vector<std::string>& rows) { return Environment::from_rows(rows); }

std::string compact(const Solution& s) { return moves_string(s.moves, 0); }

bool legal(const Environment& e, const Solution& s) {
  if (s.path.size() != s.moves.size() + 1 || s.path.front() != e.start_state()) return false;
  std::set<State> seen{s.path.front()};
  for (std::size_t i = 0; i < s.moves.size(); ++i) {
    auto next = e.step(s.path[i], s.moves[i]);
    if (!next || *next != s.path[i + 1] || !seen.insert(*next).second) return false;
  }
  return e.is_goal(s.path.back());
}

std::optional<std::set<NodeId>> fixpoint(Sessions& s, const oracle::Seeds& seeds, std::optional<std::uint64_t> order,
                                         const StateGraphView* view) {
  s.begin();
  std::optional<std::set<NodeId>> out;
  try {
    for (auto n : seeds.inhibit) s.inhibit(n);
    for (auto n : seeds.activate) s.activate(n);
    PropagateOptions opt;
    opt.view = view;
    opt.order_seed = order;
    s.propagate(opt);
    out = s.graph().inhibited_nodes();
  } catch (const ConflictError&) {
  }
  s.release();
  return out;
}

bool corner(const Environment& e, Cell c) {
  bool ns = e.is_wall(c + Cell{0, -1}) || e.is_wall(c + Cell{0, 1});
  bool ew = e.is_wall(c + Cell{1, 0}) || e.is_wall(c + Cell{-1, 0});
  return ns && ew;
}

void mirror(Check& c) {
  oracle::Rng rng(101);
  ConceptGraph graph;
  Learner l(graph);
  for (int i = 0; i < 100 && c.ok; ++i) {
    auto g = oracle::random_grid(rng, 16, std::string("abcd").substr(0, static_cast<std::size_t>(1 + i % 4)), 0.2 + 0.007 * i);
    auto root = l.observe(g).root;
    c.expect(l.reconstruct(root) == *g.cropped(), "grid " + std::to_string(i) + " does not reconstruct");
  }
}

void non_interference(Check& c) {
  oracle::Rng rng(102);
  ConceptGraph graph;
  Learner l(graph);
  std::vector<std::pair<NodeId, Grid>> seen;
  for (int i = 0; i < 20; ++i) {
    auto g = oracle::random_grid(rng, 10, "xyz", 0.3 + 0.03 * i);
    seen.push_back({l.observe(g).root, *g.cropped()});
  }
  for (std::size_t i = 0; i < seen.size(); ++i) {
    c.expect(l.reconstruct(seen[i].first) == seen[i].second, "pattern " + std::to_string(i) + " changed");
  }
}

void know_when_unknown(Check& c) {
  oracle::Rng rng(103);
  ConceptGraph graph;
  Learner l(graph);
  for (int i = 0; i < 20; ++i) l.observe(oracle::random_grid(rng, 8, "abc", 0.5));
  for (int i = 0; i < 50; ++i) {
    auto novel = oracle::random_grid(rng, 8, "xyz", 0.5);
    for (const auto& m : l.recognize(novel)) {
      c.expect(m.score() < 0.5, "trial " + std::to_string(i) + " scored " + std::to_string(m.score()));
    }
  }
}

void mutex_explanations(Check& c) {
  ConceptGraph g;
  auto f1 = g.create_primitive("f1", 1), f2 = g.create_primitive("f2", 1);
  auto f3 = g.create_primitive("f3", 1), f4 = g.create_primitive("f4", 1);
  g.add_mutex(f2, f3);
  auto pc = g.create_primitive("pc", 1), pd = g.create_primitive("pd", 1);
  auto a = g.create_composite({{f1, {0, 0}}, {f2, {1, 0}}});
  auto b = g.create_composite({{f3, {0, 0}}, {f4, {1, 0}}});
  auto cc = g.create_composite({{f4, {0, 0}}, {pc, {1, 0}}});
  auto d = g.create_composite({{f1, {0, 0}}, {pd, {1, 0}}});
  Sessions s(g);
  std::set<NodeId> detected{f1, f2, f3, f4};
  auto r = explain(s, detected, {a, b, cc, d});
  if (!c.expect(r.explanations.size() == 2, "expected two explanations")) return;
  c.expect(r.explanations[0].chosen == std::set<NodeId>{a, cc} && r.explanations[0].suppressed == std::set<NodeId>{f3},
           "first reading is not {A,C} suppressing f3");
  c.expect(r.explanations[1].chosen == std::set<NodeId>{b, d} && r.explanations[1].suppressed == std::set<NodeId>{f2},
           "second reading is not {B,D} suppressing f2");
  c.expect(r.explanations == oracle::maximal_explanations(g, detected, {a, b, cc, d}), "differs from subset oracle");
  c.expect(s.depth() == 0 && g.inhibited_nodes().empty(), "sessions not released");
}

void fixpoint_properties(Check& c) {
  oracle::Rng rng(105);
  for (int i = 0; i < 100 && c.ok; ++i) {
    auto g = oracle::random_graph(rng, 200);
    auto view = oracle::random_view(rng, g, 20);
    Sessions s(g);
    auto seeds = oracle::random_seeds(rng, g, 0.03, 0.03);
    auto base = fixpoint(s, seeds, std::nullopt, &view);
    for (std::uint64_t k = 0; k < 10; ++k) {
      auto other = fixpoint(s, seeds, 7919 * i + k, &view);
      c.expect(base.has_value() == other.has_value() && (!base || *base == *other), "order changed the fixpoint");
    }
    // monotone in the seeds
    oracle::Seeds small = oracle::random_seeds(rng, g, 0.02, 0.0), big = small;
    for (const auto& n : g.nodes()) {
      if (oracle::coin(rng, 0.02)) big.inhibit.insert(n.id);
    }
    auto lo = fixpoint(s, small, std::nullopt, &view), hi = fixpoint(s, big, std::nullopt, &view);
    c.expect(lo && hi && std::includes(hi->begin(), hi->end(), lo->begin(), lo->end()), "not monotone");
    // idempotent
    s.begin();
    for (auto n : small.inhibit) s.inhibit(n);
    s.propagate(&view);
    c.expect(s.propagate(&view).empty(), "second propagate changed something");
    s.release();
  }
  for (int i = 0; i < 100 && c.ok; ++i) {
    ConceptGraph g;
    auto view = oracle::random_view(rng, g, oracle::uniform(rng, 1, 80));
    Sessions s(g);
    s.begin();
    s.propagate(&view);
    c.expect(g.inhibited_nodes() == oracle::iterated_elimination(view.states, view.transitions, view.targets),
             "rule C differs from iterated elimination on view " + std::to_string(i));
  }
}

void maze_soundness(Check& c) {
  oracle::Rng rng(106);
  for (int i = 0; i < 200 && c.ok; ++i) {
    auto rows = oracle::random_maze_rows(rng, oracle::uniform(rng, 2, 8), oracle::uniform(rng, 1, 8), 0.3);
    Environment e = env(rows);
    auto sol = solve(e);
    c.expect(sol.has_value() == oracle::solvable(oracle::World(rows)), "maze " + std::to_string(i) + " misjudged");
    if (sol) c.expect(legal(e, *sol), "maze " + std::to_string(i) + " path illegal");
  }
}

void enumeration(Check& c) {
  oracle::Rng rng(107);
  for (int i = 0; i < 50 && c.ok; ++i) {
    // open rooms have too many routes to list one solve at a time; keep the
    // instances with at most a few thousand
    std::vector<std::string> rows;
    std::set<std::string> want;
    do {
      rows = oracle::random_maze_rows(rng, oracle::uniform(rng, 2, 6), oracle::uniform(rng, 2, 6), 0.25);
      want = oracle::all_simple_paths(oracle::World(rows), 2001);
    } while (want.size() > 2000);
    Environment e = env(rows);
    std::set<std::string> got;
    for (const auto& s : enumerate_solutions(e)) {
      c.expect(legal(e, s), "illegal path on maze " + std::to_string(i));
      c.expect(got.insert(compact(s)).second, "duplicate on maze " + std::to_string(i));
    }
    c.expect(got == want, "maze " + std::to_string(i) + ": " + std::to_string(got.size()) + " of " +
                              std::to_string(want.size()) + " routes");
  }
}

void deadlocks(Check& c) {
  oracle::Rng rng(108);
  int corners = 0;
  for (int i = 0; i < 50 && c.ok; ++i) {
    auto rows = oracle::random_push_rows(rng, 5, 5, 0.15);
    Environment e = env(rows);
    Solver s(e);
    auto dead = s.prune_deadlocks();
    for (const auto& st : s.states()) {
      if (st.box && *st.box != *e.box_target() && corner(e, *st.box)) {
        ++corners;
        c.expect(dead.count(st) == 1, "cornered box state " + to_string(st) + " kept");
      }
    }
    auto sol = s.solve();
    c.expect(sol.has_value() == oracle::solvable(oracle::World(rows)), "puzzle " + std::to_string(i) + " misjudged");
    if (sol) c.expect(legal(e, *sol), "puzzle " + std::to_string(i) + " path illegal");
  }
  c.expect(corners > 0, "no cornered states sampled");
  // puzzles whose box starts cornered away from its target
  int made = 0;
  while (made < 20 && c.ok) {
    auto rows = oracle::random_push_rows(rng, 5, 5, 0.15);
    Environment e = env(rows);
    if (!corner(e, *e.box())) continue;
    ++made;
    c.expect(!solve(e).has_value(), "cornered start solved");
  }
}

void zero_shot(Check& c) {
  oracle::Rng rng(109);
  ConceptGraph graph;
  Learner l(graph);
  std::vector<std::pair<NodeId, Grid>> shapes;
  for (auto rows : std::vector<std::vector<std::string>>{{"xxx", "x.x", "xxx"}, {"x..", "x..", "xxx"}, {"ab", "ba"}}) {
    Grid g = Grid::from_rows(rows);
    shapes.push_back({l.observe(g).root, g});
  }
  while (shapes.size() < 8) {
    auto g = *oracle::random_grid(rng, 4, "ab", 0.6).cropped();
    auto root = l.observe(g).root;
    if (graph.node(root).kind == NodeKind::Composite) shapes.push_back({root, g});
  }
  for (const auto& [root, g] : shapes) {
    for (const auto& t : transformation_family(g.width(), g.height())) {
      Grid img;
      try {
        img = apply_transformation(t, g);
      } catch (const BoundsError&) {
        continue;
      }
      auto ms = l.match_under_transformations(img);
      bool hit = std::any_of(ms.begin(), ms.end(), [&](const TransformedMatch& m) {
        return m.match.concept_id == root && m.match.score() == 1.0 && m.transformation == t;
      });
      c.expect(hit, "shape " + std::to_string(root.value) + " missed under " + to_label(t));
    }
  }
}

void constraints(Check& c) {
  oracle::Rng rng(110);
  for (int i = 0; i < 50 && c.ok; ++i) {
    auto rows = i % 5 == 4 ? oracle::random_push_rows(rng, 5, 5, 0.15)
                           : oracle::random_maze_rows(rng, oracle::uniform(rng, 2, 8), oracle::uniform(rng, 2, 8), 0.2);
    Environment e = env(rows);
    std::set<Cell> forbidden;
    for (int y = 0; y < e.height(); ++y) {
      for (int x = 0; x < e.width(); ++x) {
        if (!e.is_wall({x, y}) && oracle::coin(rng, 0.15)) forbidden.insert({x, y});
      }
    }
    auto sol = solve_with_constraints(e, {forbidden.begin(), forbidden.end()});
    c.expect(sol.has_value() == oracle::solvable(oracle::World(rows), forbidden), "instance " + std::to_string(i) + " misjudged");
    if (!sol) continue;
    c.expect(legal(e, *sol), "instance " + std::to_string(i) + " path illegal");
    for (const auto& st : sol->path) c.expect(!forbidden.count(st.agent), "path enters a forbidden cell");
  }
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(is), {}};
}

void cli_end_to_end(Check& c) {
  fs::path dir = fs::temp_directory_path() / ("cgr_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  auto put = [&](const std::string& name, const std::string& text) {
    std::ofstream(dir / name, std::ios::binary) << text;
    return (dir / name).string();
  };
  auto cli = [&](const std::string& args, const std::string& out_name) {
    std::string cmd = std::string(CGR_CLI_PATH) + " " + args + " > " + (dir / out_name).string() + " 2>&1";
    return std::system(cmd.c_str());
  };
  std::string pat = put("shape.pat", "ab.\n.ba\nbbb\n");
  std::string env_path = put("maze.env", "S...\n.#..\n...#\n#..G\n");
  std::string g = (dir / "g.txt").string();

  c.expect(cli("learn " + pat + " --graph " + g, "learn.out") == 0, "learn failed");
  std::string learned = slurp(dir / "learn.out");
  std::string root = learned.substr(5, learned.find('\n') - 5);
  c.expect(cli("graph export " + (dir / "x.txt").string() + " --graph " + g, "exp.out") == 0, "export failed");
  c.expect(cli("graph import " + (dir / "x.txt").string() + " --graph " + (dir / "fresh.txt").string(), "imp.out") == 0,
           "import failed");
  c.expect(cli("show " + root + " --graph " + (dir / "fresh.txt").string(), "show.out") == 0, "show failed");
  c.expect(slurp(dir / "show.out") == slurp(pat), "round trip changed the pattern");

  for (const char* run : {"a", "b"}) {
    cli("solve " + env_path + " --enumerate --trace " + (dir / (std::string(run) + ".tsv")).string(), std::string(run) + ".out");
    cli("learn " + pat + " --trace " + (dir / (std::string(run) + "l.tsv")).string(), std::string(run) + "l.out");
  }
  c.expect(!slurp(dir / "a.tsv").empty() && slurp(dir / "a.tsv") == slurp(dir / "b.tsv"), "solve traces differ");
  c.expect(slurp(dir / "a.out") == slurp(dir / "b.out"), "solve output differs");
  c.expect(!slurp(dir / "al.tsv").empty() && slurp(dir / "al.tsv") == slurp(dir / "bl.tsv"), "learn traces differ");
  fs::remove_all(dir);
}

}  // namespace

int main() {
  std::vector<Criterion> all = {
      {1, "mirror property", 5000, mirror},
      {2, "continual learning without interference", 5000, non_interference},
      {3, "novel patterns stay unrecognized", 2000, know_when_unknown},
      {4, "mutex chain explanations", 1000, mutex_explanations},
      {5, "inhibition fixpoint properties", 10000, fixpoint_properties},
      {6, "maze soundness and completeness", 10000, maze_soundness},
      {7, "enumeration completeness", 30000, enumeration},
      {8, "deadlock pruning", 30000, deadlocks},
      {9, "transformation zero-shot", 5000, zero_shot},
      {10, "control via inhibition", 5000, constraints},
      {11, "end-to-end cli", 5000, cli_end_to_end},
  };
  int failed = 0;
  for (const auto& cr : all) {
    Check check;
    auto t0 = std::chrono::steady_clock::now();
    try {
      cr.body(check);
    } catch (const std::exception& e) {
      check.expect(false, std::string("exception: ") + e.what());
    }
    double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    check.expect(ms <= cr.limit_ms, "over time");
    if (!check.ok) ++failed;
    std::printf("%s %2d %s (%.0f ms, limit %.0f ms)%s%s\n", check.ok ? "PASS" : "FAIL", cr.number, cr.name, ms,
                cr.limit_ms, check.ok ? "" : ": ", check.why.c_str());
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(all.size()) - failed, all.size());
  return failed == 0 ? 0 : 1;
}
