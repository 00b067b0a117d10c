#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cgr/concept_graph.hpp"
#include "cgr/environment.hpp"
#include "cgr/errors.hpp"
#include "cgr/graph_io.hpp"
#include "cgr/grid.hpp"
#include "cgr/inhibition.hpp"
#include "cgr/interpretation.hpp"
#include "cgr/learning.hpp"
#include "cgr/solver.hpp"
#include "cgr/trace.hpp"

namespace cgr::cli {

inline constexpr int kOk = 0;
inline constexpr int kNegative = 1;
inline constexpr int kInputError = 2;

namespace detail {

inline Cell parse_cell(const std::string& text) {
  auto comma = text.find(',');
  std::size_t used = 0;
  try {
    if (comma == std::string::npos) throw std::invalid_argument("");
    int x = std::stoi(text.substr(0, comma), &used);
    if (used != comma) throw std::invalid_argument("");
    std::string rest = text.substr(comma + 1);
    int y = std::stoi(rest, &used);
    if (used != rest.size()) throw std::invalid_argument("");
    return {x, y};
  } catch (const std::logic_error&) {
    throw Error("bad cell '" + text + "', expected x,y");
  }
}

inline NodeId parse_node_id(const std::string& text) {
  if (text.empty() || !std::all_of(text.begin(), text.end(), [](char c) { return c >= '0' && c <= '9'; })) {
    throw Error("bad node id '" + text + "'");
  }
  try {
    unsigned long v = std::stoul(text);
    if (v > 0xffffffffUL) throw std::out_of_range("");
    return NodeId{static_cast<std::uint32_t>(v)};
  } catch (const std::logic_error&) {
    throw Error("bad node id '" + text + "'");
  }
}

inline std::size_t parse_count(const std::string& text) {
  bool digits = !text.empty() && std::all_of(text.begin(), text.end(), [](char c) { return c >= '0' && c <= '9'; });
  if (!digits || text.find_first_not_of('0') == std::string::npos || text.size() > 18) {
    throw Error("--enumerate needs a positive count, got '" + text + "'");
  }
  return std::stoull(text);
}

inline ConceptGraph open_graph(const std::string& path, bool may_be_missing) {
  if (may_be_missing && !std::filesystem::exists(path)) return ConceptGraph{};
  return load_graph(path);
}

inline void write_trace(const Trace& trace, const std::string& path) {
  if (path.empty()) return;
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw Error("cannot write " + path);
  trace.write(os);
}

template <class Set>
std::string ids(const Set& s) {
  std::string out;
  for (auto n : s) {
    if (!out.empty()) out += ' ';
    out += std::to_string(n.value);
  }
  return out.empty() ? "-" : out;
}

inline void print_solution(std::ostream& out, const Solution& s) {
  out << "SOLUTION " << s.moves.size() << " moves:";
  for (auto d : s.moves) out << ' ' << to_char(d);
  out << '\n';
}

}  // namespace detail

// Runs one command line (without the program name). Output is written to
// `out`, diagnostics to `err`; the return value is the exit code.
//
//   learn <pattern> [--graph g] [--trace t]   ROOT id / CREATED n / REUSED m
//   show <id> --graph g                        the reconstructed pattern
//   recognize <pattern> --graph g              MATCH id matched/total score x,y
//   explain <pattern> --graph g                EXPLANATION / RESIDUE / UNKNOWN
//   solve <env> [--enumerate [N]] [--forbid x,y ...] [--trace t]
//   graph export <file> --graph g              write g to file
//   graph import <file> --graph g              validate file and store it as g
inline int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"concept graph reasoning engine", "cgr"};
  app.require_subcommand(1);

  std::string pattern, graph_path, trace_path, env_path, node_text, io_file;
  std::vector<std::string> enumerate;
  std::vector<std::string> forbid;

  auto* learn = app.add_subcommand("learn", "observe a pattern and store it in the graph");
  learn->add_option("pattern", pattern, "pattern file")->required();
  learn->add_option("--graph", graph_path, "graph file, created if missing");
  learn->add_option("--trace", trace_path, "trace output file");

  auto* show = app.add_subcommand("show", "print the pattern a node generates");
  show->add_option("node", node_text, "node id")->required();
  show->add_option("--graph", graph_path, "graph file")->required();

  auto* recognize = app.add_subcommand("recognize", "score known concepts against a pattern");
  recognize->add_option("pattern", pattern, "pattern file")->required();
  recognize->add_option("--graph", graph_path, "graph file")->required();

  auto* explain_cmd = app.add_subcommand("explain", "list the maximal consistent readings of a pattern");
  explain_cmd->add_option("pattern", pattern, "pattern file")->required();
  explain_cmd->add_option("--graph", graph_path, "graph file")->required();
  explain_cmd->add_option("--trace", trace_path, "trace output file");

  auto* solve_cmd = app.add_subcommand("solve", "plan a path through a maze or push puzzle");
  solve_cmd->add_option("env", env_path, "environment file")->required();
  auto* enum_opt = solve_cmd->add_option("--enumerate", enumerate, "list solutions, at most N")->expected(0, 1);
  solve_cmd->add_option("--forbid", forbid, "cells the agent may not enter, as x,y");
  solve_cmd->add_option("--trace", trace_path, "trace output file");

  auto* graph_cmd = app.add_subcommand("graph", "move graphs in and out of graph files");
  graph_cmd->require_subcommand(1);
  auto* exp = graph_cmd->add_subcommand("export", "write the graph to a file");
  exp->add_option("file", io_file, "destination")->required();
  exp->add_option("--graph", graph_path, "graph file")->required();
  auto* imp = graph_cmd->add_subcommand("import", "read a graph file into the graph");
  imp->add_option("file", io_file, "source")->required();
  imp->add_option("--graph", graph_path, "graph file")->required();

  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? kOk : kInputError;
  }

  try {
    Trace trace;

    if (learn->parsed()) {
      Grid g = load_pattern(pattern);
      ConceptGraph graph = graph_path.empty() ? ConceptGraph{} : detail::open_graph(graph_path, true);
      Learner learner(graph, &trace);
      auto obs = learner.observe(g);
      out << "ROOT " << obs.root.value << '\n';
      out << "CREATED " << obs.report.nodes_created << '\n';
      out << "REUSED " << obs.report.nodes_reused << '\n';
      if (!graph_path.empty()) save_graph(graph, graph_path);
      detail::write_trace(trace, trace_path);
      return kOk;
    }

    if (show->parsed()) {
      NodeId n = detail::parse_node_id(node_text);
      ConceptGraph graph = load_graph(graph_path);
      Learner learner(graph);
      out << learner.reconstruct(n).to_string();
      return kOk;
    }

    if (recognize->parsed()) {
      Grid g = load_pattern(pattern);
      ConceptGraph graph = load_graph(graph_path);
      Learner learner(graph);
      auto matches = learner.recognize(g);
      for (const auto& m : matches) {
        out << "MATCH " << m.concept_id.value << ' ' << m.matched << '/' << m.total << ' ' << std::fixed
            << std::setprecision(3) << m.score() << ' ' << m.anchor.x << ',' << m.anchor.y << '\n';
      }
      if (matches.empty()) out << "NO MATCH\n";
      return kOk;
    }

    if (explain_cmd->parsed()) {
      Grid g = load_pattern(pattern);
      ConceptGraph graph = load_graph(graph_path);
      Learner learner(graph);
      Sessions sessions(graph, &trace);
      auto result = explain(learner, sessions, g);
      bool any = false;
      for (std::size_t i = 0; i < result.explanations.size(); ++i) {
        const auto& e = result.explanations[i];
        any = any || !e.chosen.empty();
        out << "EXPLANATION " << i + 1 << " chosen: " << detail::ids(e.chosen) << " covered: " << detail::ids(e.covered)
            << " suppressed: " << detail::ids(e.suppressed) << '\n';
      }
      out << "RESIDUE " << detail::ids(result.novel_residue) << '\n';
      out << "UNKNOWN " << result.unknown_features << '\n';
      detail::write_trace(trace, trace_path);
      return any ? kOk : kNegative;
    }

    if (solve_cmd->parsed()) {
      Environment env = Environment::load(env_path);
      std::vector<Cell> forbidden;
      for (const auto& f : forbid) forbidden.push_back(detail::parse_cell(f));
      Solver solver(env, &trace);
      solver.forbid_cells(forbidden);
      int code = kOk;
      if (enum_opt->count() > 0) {
        std::optional<std::size_t> max;
        if (!enumerate.empty() && !enumerate.front().empty()) max = detail::parse_count(enumerate.front());
        auto all = solver.enumerate_solutions(max);
        for (const auto& s : all) detail::print_solution(out, s);
        out << "TOTAL " << all.size() << '\n';
        if (all.empty()) code = kNegative;
      } else if (auto s = solver.solve()) {
        detail::print_solution(out, *s);
      } else {
        out << "NO SOLUTION\n";
        code = kNegative;
      }
      detail::write_trace(trace, trace_path);
      return code;
    }

    if (exp->parsed()) {
      ConceptGraph graph = load_graph(graph_path);
      save_graph(graph, io_file);
      out << "EXPORTED " << graph.size() << " nodes\n";
      return kOk;
    }

    if (imp->parsed()) {
      ConceptGraph graph = load_graph(io_file);
      save_graph(graph, graph_path);
      out << "IMPORTED " << graph.size() << " nodes\n";
      return kOk;
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  }
  return kInputError;
}

inline int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(std::move(args), out, err);
}

}  // namespace cgr::cli
