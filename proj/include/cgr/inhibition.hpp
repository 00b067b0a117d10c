#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "cgr/concept_graph.hpp"
#include "cgr/errors.hpp"
#include "cgr/trace.hpp"

namespace cgr {

// The state/action space seen by the dead-end rule.
struct StateGraphView {
  std::set<NodeId> states;
  std::map<NodeId, std::set<NodeId>> transitions;
  std::set<NodeId> targets;

  // In a reversible view every move can be undone, so a trajectory reaching a
  // state arrived from one of its successors and cannot go back. A state
  // other than an origin whose only live successor is that neighbour is then
  // a dead end as well.
  bool reversible = false;
  std::set<NodeId> origins;
};

struct PropagateOptions {
  const StateGraphView* view = nullptr;
  // Visit nodes in a shuffled order; the fixpoint does not depend on it.
  std::optional<std::uint64_t> order_seed;
};

// Stack of revocable inhibition layers over one graph.
//
// Depth 0 is the permanent base layer. Every inhibition and activation is
// recorded in the layer that caused it, so releasing a layer restores the
// exact activation state seen before the matching begin().
class Sessions {
 public:
  struct Layer {
    std::set<NodeId> assumptions;
    std::set<NodeId> derived;
    std::set<NodeId> activated;
  };

  explicit Sessions(ConceptGraph& graph, Trace* trace = nullptr) : graph_(graph), trace_(trace), layers_(1) {}

  Sessions(const Sessions&) = delete;
  Sessions& operator=(const Sessions&) = delete;

  ~Sessions() { release_to(0); }

  ConceptGraph& graph() noexcept { return graph_; }
  const ConceptGraph& graph() const noexcept { return graph_; }

  std::size_t depth() const noexcept { return layers_.size() - 1; }

  const Layer& layer(std::size_t d) const { return layers_.at(d); }

  std::size_t begin() {
    layers_.emplace_back();
    return depth();
  }

  void release() {
    if (depth() == 0) throw UnderflowError("no session to release at depth 0");
    const Layer& top = layers_.back();
    for (auto n : top.assumptions) reset(n);
    for (auto n : top.derived) reset(n);
    for (auto n : top.activated) reset(n);
    layers_.pop_back();
  }

  void release_to(std::size_t d) {
    while (depth() > d) release();
  }

  void inhibit(NodeId n) {
    Status s = graph_.status(n);
    if (s == Status::Inhibited) return;
    if (s == Status::Active) throw ConflictError(n.value, "cannot inhibit active node " + std::to_string(n.value));
    set_inhibited(n);
    layers_.back().assumptions.insert(n);
  }

  // Marks n as triggered in the current layer.
  void activate(NodeId n) {
    Status s = graph_.status(n);
    if (s == Status::Active) return;
    if (s == Status::Inhibited) {
      if (trace_) trace_->record(TraceEvent::Conflict, std::to_string(n.value), depth());
      throw ConflictError(n.value, "cannot activate inhibited node " + std::to_string(n.value));
    }
    graph_.status_[n.value] = Status::Active;
    layers_.back().activated.insert(n);
    if (trace_) trace_->record(TraceEvent::Activate, std::to_string(n.value), depth());
  }

  std::set<NodeId> propagate(const StateGraphView* view = nullptr) {
    PropagateOptions opt;
    opt.view = view;
    return propagate(opt);
  }

  // Runs the inhibition rules to a fixpoint and adds everything derived to
  // the current layer:
  //   - a mutex partner of an active node is inhibited;
  //   - a parent of an inhibited node is inhibited;
  //   - a node with parents, all of them inhibited, is inhibited;
  //   - a non-target state whose transitions all lead to inhibited states is
  //     inhibited (including states without transitions).
  // Throws ConflictError, leaving the graph untouched, if an active node
  // would be inhibited.
  std::set<NodeId> propagate(const PropagateOptions& opt) {
    const std::size_t n_nodes = graph_.size();
    std::vector<char> inhibited(n_nodes), active(n_nodes);
    for (std::size_t i = 0; i < n_nodes; ++i) {
      inhibited[i] = graph_.status_[i] == Status::Inhibited;
      active[i] = graph_.status_[i] == Status::Active;
    }

    // Per-node view data, indexed by node id.
    std::vector<char> is_state(n_nodes), is_target(n_nodes), is_origin(n_nodes);
    std::vector<std::vector<std::uint32_t>> successors;
    if (opt.view) {
      successors.resize(n_nodes);
      for (auto s : opt.view->states) is_state.at(s.value) = 1;
      for (auto s : opt.view->targets) is_target.at(s.value) = 1;
      for (auto s : opt.view->origins) is_origin.at(s.value) = 1;
      for (const auto& [from, tos] : opt.view->transitions) {
        for (auto to : tos) successors.at(from.value).push_back(to.value);
      }
    }

    std::vector<std::uint32_t> order(n_nodes);
    for (std::size_t i = 0; i < n_nodes; ++i) order[i] = static_cast<std::uint32_t>(i);
    if (opt.order_seed) {
      std::mt19937_64 rng(*opt.order_seed);
      std::shuffle(order.begin(), order.end(), rng);
    }

    auto should_inhibit = [&](std::uint32_t n) {
      for (auto p : graph_.mutex_[n]) {
        if (active[p.value]) return true;
      }
      for (const auto& c : graph_.children_[n]) {
        if (inhibited[c.node.value]) return true;
      }
      const auto& parents = graph_.parents_[n];
      if (!parents.empty() &&
          std::all_of(parents.begin(), parents.end(), [&](NodeId p) { return inhibited[p.value] != 0; })) {
        return true;
      }
      if (opt.view && is_state[n] && !is_target[n]) {
        std::size_t live = 0;
        for (auto s : successors[n]) live += inhibited[s] ? 0 : 1;
        if (live == 0) return true;
        if (opt.view->reversible && !is_origin[n] && live == 1) return true;
      }
      return false;
    };

    std::vector<NodeId> added;
    std::size_t live = static_cast<std::size_t>(std::count(inhibited.begin(), inhibited.end(), 0));
    sweeps_ = 0;
    bool changed = live > 0;
    while (changed) {
      changed = false;
      ++sweeps_;
      for (auto n : order) {
        if (inhibited[n] || !should_inhibit(n)) continue;
        if (active[n]) {
          if (trace_) trace_->record(TraceEvent::Conflict, std::to_string(n), depth());
          throw ConflictError(n, "propagation would inhibit active node " + std::to_string(n));
        }
        inhibited[n] = 1;
        added.push_back(NodeId{n});
        changed = --live > 0;
      }
    }

    std::set<NodeId> result(added.begin(), added.end());
    for (auto n : added) {
      set_inhibited(n);
      layers_.back().derived.insert(n);
    }
    return result;
  }

  // Sweeps over the node set taken by the last propagate, including the
  // final sweep that found nothing new. Never more than the node count.
  std::size_t last_sweeps() const noexcept { return sweeps_; }

 private:
  void set_inhibited(NodeId n) {
    graph_.status_[n.value] = Status::Inhibited;
    graph_.depth_[n.value] = depth();
    if (trace_) trace_->record(TraceEvent::Inhibit, std::to_string(n.value), depth());
  }

  void reset(NodeId n) {
    graph_.status_[n.value] = Status::Neutral;
    graph_.depth_[n.value] = 0;
  }

  ConceptGraph& graph_;
  Trace* trace_;
  std::vector<Layer> layers_;
  std::size_t sweeps_ = 0;
};

}  // namespace cgr
