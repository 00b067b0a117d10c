#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "cgr/concept_graph.hpp"
#include "cgr/errors.hpp"
#include "cgr/features.hpp"
#include "cgr/grid.hpp"
#include "cgr/trace.hpp"
#include "cgr/transformation.hpp"

namespace cgr {

struct SymbolCell {
  Cell cell;
  char symbol = kEmpty;

  constexpr auto operator<=>(const SymbolCell&) const = default;
};

// Bottom-layer mismatch between an input and an internal representation.
struct Discrepancy {
  std::set<SymbolCell> missing;  // expected by the representation, absent in the input
  std::set<SymbolCell> surplus;  // present in the input, not explained

  bool empty() const noexcept { return missing.empty() && surplus.empty(); }
};

struct ObserveReport {
  std::size_t nodes_created = 0;
  std::size_t nodes_reused = 0;
};

struct Observation {
  NodeId root;
  ObserveReport report;
};

struct RecognitionMatch {
  NodeId concept_id;
  Cell anchor;  // where the concept's anchor lands in the input
  std::size_t matched = 0;
  std::size_t total = 1;

  double score() const noexcept { return static_cast<double>(matched) / static_cast<double>(total); }
  bool complete() const noexcept { return matched == total; }
};

struct TransformedMatch {
  RecognitionMatch match;
  Transformation transformation;
};

// A feature placed in the input: its node and absolute anchor.
struct Placement {
  NodeId node;
  Cell anchor;

  constexpr auto operator<=>(const Placement&) const = default;
};

// Builds and queries mirrored compositional representations of grids.
//
// Every shape is stored as a composition DAG whose leaves are the feature
// vocabulary of features.hpp. Roles are offsets between anchors, where an
// anchor is the top-left-most (row-major first) covered cell, so expanding
// any node top-down regenerates exactly the cells it was learned from.
class Learner {
 public:
  explicit Learner(ConceptGraph& graph, Trace* trace = nullptr) : graph_(graph), trace_(trace) {}

  ConceptGraph& graph() noexcept { return graph_; }

  // Learns g. Known composites whose parts are all present activate first
  // (largest first) and cancel their parts; whatever remains unexplained is
  // grouped under one composite, new or reused.
  Observation observe(const Grid& g) {
    if (g.empty()) throw EmptyInputError("observe needs at least one occupied cell");
    const std::size_t before = graph_.size();
    std::set<NodeId> touched;

    for (auto c : g.occupied_cells()) symbol_node(g.get(c));

    struct Element {
      std::vector<Cell> cells;
    };
    std::map<Placement, Element> open;
    std::set<NodeId> feature_nodes;
    for (const auto& f : extract_features(g)) {
      NodeId n = feature_node(f);
      feature_nodes.insert(n);
      touched.insert(n);
      open.emplace(Placement{n, f.anchor}, Element{f.cells});
      trace(TraceEvent::Activate, n);
    }

    // Bottom-up activation of known composites, top-down cancellation of
    // their parts.
    for (;;) {
      auto hit = best_full_match(open);
      if (!hit) break;
      auto [composite, anchor] = *hit;
      Element merged;
      for (const auto& c : graph_.children_of(composite)) {
        auto it = open.find(Placement{c.node, anchor + Cell{c.role.dx, c.role.dy}});
        merged.cells.insert(merged.cells.end(), it->second.cells.begin(), it->second.cells.end());
        trace(TraceEvent::Cancel, c.node);
        open.erase(it);
      }
      trace(TraceEvent::Activate, composite);
      touched.insert(composite);
      open.emplace(Placement{composite, anchor}, std::move(merged));
    }

    NodeId root;
    if (open.size() == 1) {
      root = open.begin()->first.node;
    } else {
      Cell frame = open.begin()->second.cells.front();
      for (const auto& [p, e] : open) {
        for (auto c : e.cells) frame = std::min(frame, c);
      }
      std::vector<Child> children;
      for (const auto& [p, e] : open) {
        Cell off = p.anchor - frame;
        children.push_back({p.node, Role{off.x, off.y}});
      }
      root = make_composite(std::move(children), {});
      touched.insert(root);
    }

    if (feature_nodes.size() >= 2) graph_.record_association(feature_nodes);
    ObserveReport report;
    report.nodes_created = graph_.size() - before;
    report.nodes_reused = static_cast<std::size_t>(
        std::count_if(touched.begin(), touched.end(), [&](NodeId n) { return n.value < before; }));
    return {root, report};
  }

  // Top-down expansion, cropped to the bounding box.
  Grid reconstruct(NodeId root) const {
    if (graph_.is_inhibited(root)) throw InhibitedError("node " + std::to_string(root.value) + " is inhibited");
    std::map<NodeId, std::vector<SymbolCell>> memo;
    const auto& cells = expand(root, memo);
    int x0 = cells.front().cell.x, x1 = x0, y0 = cells.front().cell.y, y1 = y0;
    for (const auto& sc : cells) {
      x0 = std::min(x0, sc.cell.x);
      x1 = std::max(x1, sc.cell.x);
      y0 = std::min(y0, sc.cell.y);
      y1 = std::max(y1, sc.cell.y);
    }
    Grid out(x1 - x0 + 1, y1 - y0 + 1);
    for (const auto& sc : cells) out.set({sc.cell.x - x0, sc.cell.y - y0}, sc.symbol);
    return out;
  }

  // Cells covered by n relative to its anchor, which is always (0, 0).
  std::vector<SymbolCell> cells_of(NodeId n) const {
    std::map<NodeId, std::vector<SymbolCell>> memo;
    return expand(n, memo);
  }

  // Feature placements of g that the graph already knows. Unknown features
  // have no node and cannot excite anything.
  std::vector<Placement> known_placements(const Grid& g) const {
    std::vector<Placement> out;
    for (const auto& f : extract_features(g)) {
      if (auto n = lookup_feature(f)) out.push_back({*n, f.anchor});
    }
    return out;
  }

  // Leaf features of n with offsets from n's anchor.
  std::vector<Placement> leaves_of(NodeId n) const {
    std::map<NodeId, std::vector<Placement>> memo;
    return leaves(n, memo);
  }

  // Best anchor and score of every non-inhibited composite against g, sorted
  // by (score desc, scale desc, id asc). Zero scores are dropped.
  std::vector<RecognitionMatch> recognize(const Grid& g) const {
    std::vector<RecognitionMatch> out;
    if (g.empty()) return out;
    auto placements = known_placements(g);
    if (placements.empty()) return out;
    std::map<NodeId, std::vector<Cell>> by_node;
    for (const auto& p : placements) by_node[p.node].push_back(p.anchor);
    std::set<Placement> present(placements.begin(), placements.end());

    std::map<NodeId, std::vector<Placement>> memo;
    for (const auto& n : graph_.nodes()) {
      if (n.kind != NodeKind::Composite || is_fill_label(n.label) || graph_.is_inhibited(n.id)) continue;
      if (auto m = best_match(n.id, leaves(n.id, memo), by_node, present)) out.push_back(*m);
    }
    sort_matches(out);
    return out;
  }

  // Best anchor of one concept in g, even when it is not a composite.
  std::optional<RecognitionMatch> match_concept(NodeId concept_id, const Grid& g) const {
    auto placements = known_placements(g);
    std::map<NodeId, std::vector<Cell>> by_node;
    for (const auto& p : placements) by_node[p.node].push_back(p.anchor);
    std::set<Placement> present(placements.begin(), placements.end());
    return best_match(concept_id, leaves_of(concept_id), by_node, present);
  }

  // Finds the first family member mapping before onto after and associates
  // it with the action.
  NodeId learn_transformation(const Grid& before, const Grid& after, const std::string& action_label) {
    if (before.empty()) throw EmptyInputError("learn_transformation needs an occupied 'before' grid");
    for (const auto& t : transformation_family(before.width(), before.height())) {
      std::optional<Grid> image;
      try {
        image = apply_transformation(t, before);
      } catch (const BoundsError&) {
        continue;
      }
      if (*image != after) continue;
      NodeId tn = find_or_create(NodeKind::Transformation, to_label(t));
      NodeId an = find_or_create(NodeKind::Primitive, "action:" + action_label);
      graph_.record_association({tn, an});
      return tn;
    }
    throw NoFitError("no transformation maps the first grid onto the second");
  }

  static std::optional<Transformation> transformation_of(const ConceptGraph& graph, NodeId n) {
    const auto& node = graph.node(n);
    if (node.kind != NodeKind::Transformation) return std::nullopt;
    return parse_transformation(node.label);
  }

  // Recognizes g as a transformed version of known concepts: recognize runs
  // on the pre-image of g under every applicable family member.
  std::vector<TransformedMatch> match_under_transformations(const Grid& g) const {
    std::vector<std::pair<std::size_t, TransformedMatch>> ranked;
    std::size_t order = 0;
    auto add = [&](const std::vector<RecognitionMatch>& ms, const Transformation& t) {
      for (const auto& m : ms) ranked.push_back({order, {m, t}});
      ++order;
    };

    auto base = recognize(g);
    add(base, Transformation::identity());

    // Translation pre-images through the shifted canvas; features do not
    // depend on absolute position.
    auto occ = g.occupied_cells();
    if (!occ.empty()) {
      int x0 = g.width(), y0 = g.height(), x1 = -1, y1 = -1;
      for (auto c : occ) {
        x0 = std::min(x0, c.x), y0 = std::min(y0, c.y);
        x1 = std::max(x1, c.x), y1 = std::max(y1, c.y);
      }
      std::vector<Transformation> shifts;
      for (int dy = y1 - (g.height() - 1); dy <= y0; ++dy) {
        for (int dx = x1 - (g.width() - 1); dx <= x0; ++dx) {
          if (dx != 0 || dy != 0) shifts.push_back(Transformation::translate(dx, dy));
        }
      }
      std::sort(shifts.begin(), shifts.end(), [](const Transformation& a, const Transformation& b) {
        return std::make_tuple(std::abs(a.dx) + std::abs(a.dy), a.dx, a.dy) <
               std::make_tuple(std::abs(b.dx) + std::abs(b.dy), b.dx, b.dy);
      });
      for (const auto& t : shifts) {
        std::vector<RecognitionMatch> moved = base;
        for (auto& m : moved) m.anchor = m.anchor - Cell{t.dx, t.dy};
        add(moved, t);
      }
    }

    std::vector<Transformation> others;
    for (int k = 1; k <= 3; ++k) others.push_back(Transformation::rotate90(k));
    others.push_back(Transformation::reflect_h());
    others.push_back(Transformation::reflect_v());
    for (int k = 2; k <= std::min(g.width(), g.height()); ++k) {
      if (g.width() % k == 0 && g.height() % k == 0) others.push_back(Transformation::scale(k));
    }
    // symmetric inputs often share pre-images
    std::vector<std::pair<Grid, std::vector<RecognitionMatch>>> seen{{g, base}};
    for (const auto& t : others) {
      auto pre = invert_transformation(t, g);
      if (!pre) continue;
      auto hit = std::find_if(seen.begin(), seen.end(), [&](const auto& e) { return e.first == *pre; });
      if (hit == seen.end()) {
        seen.push_back({*pre, recognize(*pre)});
        hit = std::prev(seen.end());
      }
      add(hit->second, t);
    }

    std::stable_sort(ranked.begin(), ranked.end(), [&](const auto& a, const auto& b) {
      const auto& ma = a.second.match;
      const auto& mb = b.second.match;
      if (auto c = compare_score(ma, mb); c != 0) return c > 0;
      auto sa = graph_.node(ma.concept_id).scale, sb = graph_.node(mb.concept_id).scale;
      if (sa != sb) return sa > sb;
      if (ma.concept_id != mb.concept_id) return ma.concept_id < mb.concept_id;
      return a.first < b.first;
    });
    std::vector<TransformedMatch> out;
    for (auto& r : ranked) out.push_back(r.second);
    return out;
  }

  // Mismatch between g and the goal's reconstruction placed at the goal's
  // best anchor in g (or with its bounding box at the origin when nothing
  // matches).
  Discrepancy compute_discrepancy(const Grid& g, NodeId goal) const {
    auto cells = cells_of(goal);
    Cell anchor;
    if (auto m = match_concept(goal, g)) {
      anchor = m->anchor;
    } else {
      int x0 = 0;
      for (const auto& sc : cells) x0 = std::min(x0, sc.cell.x);
      anchor = {-x0, 0};
    }
    Discrepancy d;
    std::map<Cell, char> expected;
    for (const auto& sc : cells) {
      Cell at = sc.cell + anchor;
      expected[at] = sc.symbol;
      if (g.get(at) != sc.symbol) d.missing.insert({at, sc.symbol});
    }
    for (auto c : g.occupied_cells()) {
      auto it = expected.find(c);
      if (it == expected.end() || it->second != g.get(c)) d.surplus.insert({c, g.get(c)});
    }
    return d;
  }

  // Chained associations: repeatedly follow the strongest excitatory link
  // to an unvisited, non-inhibited node.
  std::vector<NodeId> imagine(NodeId seed, std::size_t steps) const {
    if (graph_.is_inhibited(seed)) throw InhibitedError("seed is inhibited");
    std::vector<NodeId> chain;
    std::set<NodeId> visited{seed};
    NodeId cur = seed;
    for (std::size_t i = 0; i < steps; ++i) {
      std::optional<NodeId> next;
      std::uint64_t best = 0;
      for (const auto& [n, w] : graph_.associations_of(cur)) {
        if (visited.count(n) || graph_.is_inhibited(n)) continue;
        if (!next || w > best) {
          next = n;
          best = w;
        }
      }
      if (!next) break;
      chain.push_back(*next);
      visited.insert(*next);
      cur = *next;
    }
    return chain;
  }

  // Node of a feature if the graph has it.
  std::optional<NodeId> lookup_feature(const Feature& f) const {
    switch (f.kind) {
      case Feature::Kind::Point:
      case Feature::Kind::Run:
        return graph_.find_by_label(NodeKind::Primitive, f.label());
      case Feature::Kind::Fill: {
        auto point = graph_.find_by_label(NodeKind::Primitive, std::string(1, f.symbol));
        if (!point || !graph_.has_composite_of_size(f.label(), f.cells.size())) return std::nullopt;
        return graph_.find_composite(fill_children(f, *point), f.label());
      }
    }
    return std::nullopt;
  }

  static int compare_score(const RecognitionMatch& a, const RecognitionMatch& b) {
    auto l = static_cast<unsigned long long>(a.matched) * b.total;
    auto r = static_cast<unsigned long long>(b.matched) * a.total;
    return l < r ? -1 : (l > r ? 1 : 0);
  }

 private:
  void trace(TraceEvent e, NodeId n) {
    if (trace_) trace_->record(e, std::to_string(n.value), 0);
  }

  NodeId find_or_create(NodeKind kind, const std::string& label) {
    if (auto n = graph_.find_by_label(kind, label)) return *n;
    NodeId n = kind == NodeKind::Primitive ? graph_.create_primitive(label, 1) : graph_.create_node(kind, label);
    trace(TraceEvent::CreateNode, n);
    return n;
  }

  NodeId symbol_node(char s) { return find_or_create(NodeKind::Primitive, std::string(1, s)); }

  // Column by column, which is already the order composites keep children in.
  static std::vector<Child> fill_children(const Feature& f, NodeId point) {
    int x0 = f.anchor.x, x1 = f.anchor.x;
    for (auto c : f.cells) x0 = std::min(x0, c.x), x1 = std::max(x1, c.x);
    std::vector<std::vector<int>> columns(static_cast<std::size_t>(x1 - x0 + 1));
    for (auto c : f.cells) columns[static_cast<std::size_t>(c.x - x0)].push_back(c.y);
    std::vector<Child> kids;
    kids.reserve(f.cells.size());
    for (int x = x0; x <= x1; ++x) {
      for (int y : columns[static_cast<std::size_t>(x - x0)]) kids.push_back({point, Role{x - f.anchor.x, y - f.anchor.y}});
    }
    return kids;
  }

  NodeId make_composite(std::vector<Child> kids, const std::string& label) {
    if (auto n = graph_.find_composite(kids, label)) return *n;
    NodeId n = graph_.create_composite(std::move(kids), label);
    trace(TraceEvent::CreateNode, n);
    return n;
  }

  NodeId feature_node(const Feature& f) {
    switch (f.kind) {
      case Feature::Kind::Point:
        return symbol_node(f.symbol);
      case Feature::Kind::Run: {
        if (auto n = graph_.find_by_label(NodeKind::Primitive, f.label())) return *n;
        NodeId n = graph_.create_primitive(f.label(), f.scale());
        trace(TraceEvent::CreateNode, n);
        return n;
      }
      case Feature::Kind::Fill:
        return make_composite(fill_children(f, symbol_node(f.symbol)), f.label());
    }
    return NodeId{};
  }

  // Largest structural composite whose children are all open, with the
  // first such anchor in row-major order.
  template <typename Open>
  std::optional<std::pair<NodeId, Cell>> best_full_match(const Open& open) const {
    std::map<NodeId, std::vector<Cell>> anchors;
    for (const auto& [p, e] : open) anchors[p.node].push_back(p.anchor);

    std::optional<std::pair<NodeId, Cell>> best;
    std::uint64_t best_scale = 0;
    for (const auto& n : graph_.nodes()) {
      if (n.kind != NodeKind::Composite || is_fill_label(n.label) || graph_.is_inhibited(n.id)) continue;
      if (best && n.scale <= best_scale) continue;
      const auto& kids = graph_.children_of(n.id);
      auto first = anchors.find(kids.front().node);
      if (first == anchors.end()) continue;
      std::vector<Cell> candidates;
      for (auto a : first->second) candidates.push_back(a - Cell{kids.front().role.dx, kids.front().role.dy});
      std::sort(candidates.begin(), candidates.end());
      for (auto anchor : candidates) {
        bool all = std::all_of(kids.begin(), kids.end(), [&](const Child& c) {
          return open.count(Placement{c.node, anchor + Cell{c.role.dx, c.role.dy}}) != 0;
        });
        if (all) {
          best = std::make_pair(n.id, anchor);
          best_scale = n.scale;
          break;
        }
      }
    }
    return best;
  }

  const std::vector<SymbolCell>& expand(NodeId n, std::map<NodeId, std::vector<SymbolCell>>& memo) const {
    if (auto it = memo.find(n); it != memo.end()) return it->second;
    const auto& node = graph_.node(n);
    std::vector<SymbolCell> out;
    if (node.kind == NodeKind::Primitive) {
      if (node.label.size() == 1 && node.label[0] != kEmpty) {
        out.push_back({{0, 0}, node.label[0]});
      } else if (auto run = parse_run_label(node.label)) {
        for (auto c : run_cells(*run)) out.push_back({c, run->symbol});
      } else {
        throw NotGenerativeError("primitive '" + node.label + "' has no grid rendering");
      }
    } else if (node.kind == NodeKind::Composite) {
      std::set<SymbolCell> acc;
      for (const auto& c : graph_.children_of(n)) {
        for (const auto& sc : expand(c.node, memo)) acc.insert({sc.cell + Cell{c.role.dx, c.role.dy}, sc.symbol});
      }
      out.assign(acc.begin(), acc.end());
    } else {
      throw NotGenerativeError("node " + std::to_string(n.value) + " is not a pattern");
    }
    return memo.emplace(n, std::move(out)).first->second;
  }

  const std::vector<Placement>& leaves(NodeId n, std::map<NodeId, std::vector<Placement>>& memo) const {
    if (auto it = memo.find(n); it != memo.end()) return it->second;
    const auto& node = graph_.node(n);
    std::vector<Placement> out;
    if (node.kind == NodeKind::Composite && !is_fill_label(node.label)) {
      for (const auto& c : graph_.children_of(n)) {
        for (const auto& l : leaves(c.node, memo)) out.push_back({l.node, l.anchor + Cell{c.role.dx, c.role.dy}});
      }
    } else {
      out.push_back({n, {0, 0}});
    }
    return memo.emplace(n, std::move(out)).first->second;
  }

  static std::optional<RecognitionMatch> best_match(NodeId concept_id, const std::vector<Placement>& leaves,
                                                    const std::map<NodeId, std::vector<Cell>>& by_node,
                                                    const std::set<Placement>& present) {
    std::set<Cell> anchors;
    for (const auto& l : leaves) {
      auto it = by_node.find(l.node);
      if (it == by_node.end()) continue;
      for (auto a : it->second) anchors.insert(a - l.anchor);
    }
    std::optional<RecognitionMatch> best;
    for (auto anchor : anchors) {
      std::size_t hits = 0;
      for (const auto& l : leaves) hits += present.count({l.node, anchor + l.anchor});
      if (!best || hits > best->matched) best = RecognitionMatch{concept_id, anchor, hits, leaves.size()};
    }
    if (best && best->matched == 0) return std::nullopt;
    return best;
  }

  void sort_matches(std::vector<RecognitionMatch>& ms) const {
    std::sort(ms.begin(), ms.end(), [&](const RecognitionMatch& a, const RecognitionMatch& b) {
      if (auto c = compare_score(a, b); c != 0) return c > 0;
      auto sa = graph_.node(a.concept_id).scale, sb = graph_.node(b.concept_id).scale;
      if (sa != sb) return sa > sb;
      return a.concept_id < b.concept_id;
    });
  }

  ConceptGraph& graph_;
  Trace* trace_;
};

}  // namespace cgr
