#pragma once

#include <algorithm>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <vector>

#include "cgr/errors.hpp"

namespace cgr {

// Dense, never reused node identifier.
struct NodeId {
  std::uint32_t value = 0;

  constexpr auto operator<=>(const NodeId&) const = default;
};

inline std::ostream& operator<<(std::ostream& os, NodeId id) { return os << id.value; }

enum class NodeKind { Primitive, Composite, State, Transformation, SolutionConcept };

inline std::string_view to_string(NodeKind k) {
  switch (k) {
    case NodeKind::Primitive: return "primitive";
    case NodeKind::Composite: return "composite";
    case NodeKind::State: return "state";
    case NodeKind::Transformation: return "transformation";
    case NodeKind::SolutionConcept: return "solution";
  }
  return "?";
}

inline std::optional<NodeKind> parse_node_kind(std::string_view s) {
  for (auto k : {NodeKind::Primitive, NodeKind::Composite, NodeKind::State, NodeKind::Transformation,
                 NodeKind::SolutionConcept}) {
    if (to_string(k) == s) return k;
  }
  return std::nullopt;
}

// Placement of a child inside its parent: the offset of the child's anchor
// from the parent's anchor, or (ordinal, 0) for sequences.
struct Role {
  int dx = 0;
  int dy = 0;

  constexpr auto operator<=>(const Role&) const = default;
};

struct ConceptNode {
  NodeId id;
  NodeKind kind = NodeKind::Primitive;
  std::string label;
  std::uint64_t scale = 1;
};

struct Child {
  NodeId node;
  Role role;

  constexpr auto operator<=>(const Child&) const = default;
};

struct CompositionLink {
  NodeId parent;
  NodeId child;
  Role role;
};

struct ExcitatoryLink {
  NodeId a;
  NodeId b;
  std::uint64_t weight = 1;
};

struct MutexLink {
  NodeId a;
  NodeId b;
};

enum class Status { Neutral, Active, Inhibited };

class Sessions;

// Node and link store plus the per-node activation state.
//
// Nodes are append-only. Composites are deduplicated on their exact
// (label, child/role multiset), so repeating a create_composite call returns
// the existing node. Activation state is written only through Sessions.
class ConceptGraph {
 public:
  ConceptGraph() = default;

  NodeId create_primitive(std::string label, std::uint64_t scale) {
    return add_node(NodeKind::Primitive, std::move(label), scale);
  }

  // Leaf node of a non-structural kind (State, Transformation, SolutionConcept).
  NodeId create_node(NodeKind kind, std::string label, std::uint64_t scale = 1) {
    if (kind == NodeKind::Composite) throw ArityError("composite nodes need children");
    return add_node(kind, std::move(label), scale);
  }

  NodeId create_composite(std::vector<Child> children, std::string label = {}) {
    for (const auto& c : children) check(c.node);
    // A (child, role) pair is one link, however often it is listed.
    if (!std::is_sorted(children.begin(), children.end())) std::sort(children.begin(), children.end());
    children.erase(std::unique(children.begin(), children.end()), children.end());
    if (children.size() < 2) throw ArityError("a composite needs at least two distinct children");
    if (auto existing = find_composite_sorted(children, label)) return *existing;

    std::uint64_t scale = 0;
    for (const auto& c : children) scale += nodes_[c.node.value].scale;
    NodeId id = add_node(NodeKind::Composite, label, scale);
    for (const auto& c : children) link(id, c);
    composite_index_.emplace(std::make_pair(std::move(label), std::move(children)), id);
    return id;
  }

  std::optional<NodeId> find_composite(std::vector<Child> children, const std::string& label = {}) const {
    if (!std::is_sorted(children.begin(), children.end())) std::sort(children.begin(), children.end());
    children.erase(std::unique(children.begin(), children.end()), children.end());
    return find_composite_sorted(children, label);
  }

  // Lowest id node of the given kind carrying exactly this label.
  // Whether some composite with this label has exactly n children; cheaper
  // than building the child list for a lookup that cannot succeed.
  bool has_composite_of_size(const std::string& label, std::size_t n) const {
    for (auto it = composite_index_.lower_bound(std::make_pair(label, std::vector<Child>{}));
         it != composite_index_.end() && it->first.first == label; ++it) {
      if (it->first.second.size() == n) return true;
    }
    return false;
  }

  std::optional<NodeId> find_by_label(NodeKind kind, std::string_view label) const {
    auto it = label_index_.find(std::make_pair(kind, std::string(label)));
    if (it == label_index_.end()) return std::nullopt;
    return it->second;
  }

  void add_mutex(NodeId a, NodeId b) {
    check(a);
    check(b);
    if (a == b) throw SelfMutexError("node " + std::to_string(a.value) + " cannot be mutex with itself");
    mutex_[a.value].insert(b);
    mutex_[b.value].insert(a);
  }

  // Increments the co-occurrence count of every unordered pair in the set.
  void record_association(const std::set<NodeId>& co_active) {
    for (auto n : co_active) check(n);
    for (auto i = co_active.begin(); i != co_active.end(); ++i) {
      for (auto j = std::next(i); j != co_active.end(); ++j) {
        ++assoc_[i->value][*j];
        ++assoc_[j->value][*i];
      }
    }
  }

  std::size_t size() const noexcept { return nodes_.size(); }
  bool contains(NodeId n) const noexcept { return n.value < nodes_.size(); }

  const ConceptNode& node(NodeId n) const {
    check(n);
    return nodes_[n.value];
  }

  const std::vector<ConceptNode>& nodes() const noexcept { return nodes_; }

  const std::set<NodeId>& parents_of(NodeId n) const {
    check(n);
    return parents_[n.value];
  }

  // Sorted by (child, role).
  const std::vector<Child>& children_of(NodeId n) const {
    check(n);
    return children_[n.value];
  }

  std::set<NodeId> descendants(NodeId n) const {
    std::set<NodeId> out;
    std::vector<NodeId> stack{n};
    while (!stack.empty()) {
      NodeId cur = stack.back();
      stack.pop_back();
      for (const auto& c : children_of(cur)) {
        if (out.insert(c.node).second) stack.push_back(c.node);
      }
    }
    return out;
  }

  bool is_ancestor(NodeId ancestor, NodeId n) const { return descendants(ancestor).count(n) != 0; }

  // Descendants every one of whose parents is n or itself exclusive to n.
  std::set<NodeId> exclusive_descendants(NodeId n) const {
    std::set<NodeId> result = descendants(n);
    bool changed = true;
    while (changed) {
      changed = false;
      for (auto it = result.begin(); it != result.end();) {
        bool outside = std::any_of(parents_of(*it).begin(), parents_of(*it).end(),
                                   [&](NodeId p) { return p != n && result.count(p) == 0; });
        if (outside) {
          it = result.erase(it);
          changed = true;
        } else {
          ++it;
        }
      }
    }
    return result;
  }

  const std::set<NodeId>& mutex_partners(NodeId n) const {
    check(n);
    return mutex_[n.value];
  }

  bool are_mutex(NodeId a, NodeId b) const { return mutex_partners(a).count(b) != 0; }

  std::uint64_t weight(NodeId a, NodeId b) const {
    const auto& m = associations_of(a);
    auto it = m.find(b);
    return it == m.end() ? 0 : it->second;
  }

  const std::map<NodeId, std::uint64_t>& associations_of(NodeId n) const {
    check(n);
    return assoc_[n.value];
  }

  std::vector<CompositionLink> composition_links() const {
    std::vector<CompositionLink> out;
    for (std::size_t p = 0; p < children_.size(); ++p) {
      for (const auto& c : children_[p]) out.push_back({NodeId{static_cast<std::uint32_t>(p)}, c.node, c.role});
    }
    return out;
  }

  // Each unordered pair once, with a < b.
  std::vector<ExcitatoryLink> excitatory_links() const {
    std::vector<ExcitatoryLink> out;
    for (std::size_t a = 0; a < assoc_.size(); ++a) {
      for (const auto& [b, w] : assoc_[a]) {
        if (a < b.value) out.push_back({NodeId{static_cast<std::uint32_t>(a)}, b, w});
      }
    }
    return out;
  }

  std::vector<MutexLink> mutex_links() const {
    std::vector<MutexLink> out;
    for (std::size_t a = 0; a < mutex_.size(); ++a) {
      for (auto b : mutex_[a]) {
        if (a < b.value) out.push_back({NodeId{static_cast<std::uint32_t>(a)}, b});
      }
    }
    return out;
  }

  Status status(NodeId n) const {
    check(n);
    return status_[n.value];
  }
  bool is_active(NodeId n) const { return status(n) == Status::Active; }
  bool is_inhibited(NodeId n) const { return status(n) == Status::Inhibited; }

  // Shallowest session depth that inhibited n; only meaningful when inhibited.
  std::size_t inhibition_depth(NodeId n) const {
    check(n);
    return depth_[n.value];
  }

  std::set<NodeId> inhibited_nodes() const {
    std::set<NodeId> out;
    for (std::size_t i = 0; i < status_.size(); ++i) {
      if (status_[i] == Status::Inhibited) out.insert(NodeId{static_cast<std::uint32_t>(i)});
    }
    return out;
  }

  // Raw restore path used by import. Nodes must be added in id order; the
  // composition index is rebuilt by seal().
  NodeId restore_node(NodeKind kind, std::string label, std::uint64_t scale) {
    return add_node(kind, std::move(label), scale);
  }

  void restore_child(NodeId parent, NodeId child, Role role) {
    check(parent);
    check(child);
    if (parent == child || is_ancestor(child, parent)) {
      throw CycleError("linking " + std::to_string(child.value) + " under " + std::to_string(parent.value) +
                       " creates a cycle");
    }
    auto& kids = children_[parent.value];
    Child c{child, role};
    if (std::find(kids.begin(), kids.end(), c) != kids.end()) {
      throw CycleError("duplicate composition link");
    }
    link(parent, c);
    std::sort(kids.begin(), kids.end());
  }

  void restore_association(NodeId a, NodeId b, std::uint64_t weight) {
    check(a);
    check(b);
    assoc_[a.value][b] = weight;
    assoc_[b.value][a] = weight;
  }

  // Validates composites and rebuilds the dedup index. Returns the first
  // offending node, if any.
  std::optional<NodeId> seal() {
    composite_index_.clear();
    for (const auto& n : nodes_) {
      const auto& kids = children_[n.id.value];
      if (n.kind == NodeKind::Composite) {
        std::uint64_t scale = 0;
        for (const auto& c : kids) scale += nodes_[c.node.value].scale;
        if (kids.size() < 2 || scale != n.scale) return n.id;
        composite_index_.emplace(std::make_pair(n.label, kids), n.id);
      } else if (!kids.empty()) {
        return n.id;
      }
    }
    return std::nullopt;
  }

 private:
  friend class Sessions;

  using CompositeKey = std::pair<std::string, std::vector<Child>>;

  void check(NodeId n) const {
    if (!contains(n)) throw UnknownNodeError("unknown node " + std::to_string(n.value));
  }

  NodeId add_node(NodeKind kind, std::string label, std::uint64_t scale) {
    if (scale == 0) throw ArityError("scale must be positive");
    NodeId id{static_cast<std::uint32_t>(nodes_.size())};
    label_index_.emplace(std::make_pair(kind, label), id);
    nodes_.push_back({id, kind, std::move(label), scale});
    children_.emplace_back();
    parents_.emplace_back();
    mutex_.emplace_back();
    assoc_.emplace_back();
    status_.push_back(Status::Neutral);
    depth_.push_back(0);
    return id;
  }

  void link(NodeId parent, const Child& c) {
    children_[parent.value].push_back(c);
    parents_[c.node.value].insert(parent);
  }

  std::optional<NodeId> find_composite_sorted(const std::vector<Child>& sorted, const std::string& label) const {
    auto it = composite_index_.find(std::make_pair(label, sorted));
    if (it == composite_index_.end()) return std::nullopt;
    return it->second;
  }

  std::vector<ConceptNode> nodes_;
  std::vector<std::vector<Child>> children_;
  std::vector<std::set<NodeId>> parents_;
  std::vector<std::set<NodeId>> mutex_;
  std::vector<std::map<NodeId, std::uint64_t>> assoc_;
  std::vector<Status> status_;
  std::vector<std::size_t> depth_;
  std::map<CompositeKey, NodeId> composite_index_;
  std::map<std::pair<NodeKind, std::string>, NodeId> label_index_;
};

}  // namespace cgr
