#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <set>
#include <vector>

#include "cgr/concept_graph.hpp"
#include "cgr/errors.hpp"
#include "cgr/grid.hpp"
#include "cgr/inhibition.hpp"
#include "cgr/learning.hpp"

namespace cgr {

// One consistent reading of the detected features.
struct Explanation {
  std::set<NodeId> chosen;      // active composites
  std::set<NodeId> covered;     // features claimed by a chosen composite
  std::set<NodeId> suppressed;  // features inhibited through a mutex with a covered feature

  bool operator==(const Explanation&) const = default;
};

struct ExplainResult {
  std::vector<Explanation> explanations;
  // Detected features no explanation accounts for; these call for learning.
  std::set<NodeId> novel_residue;
  // Features of the input that have no node in the graph at all.
  std::size_t unknown_features = 0;
};

namespace detail {

inline bool chosen_less(const Explanation& a, const Explanation& b) {
  if (a.covered.size() != b.covered.size()) return a.covered.size() > b.covered.size();
  return std::lexicographical_compare(a.chosen.begin(), a.chosen.end(), b.chosen.begin(), b.chosen.end());
}

}  // namespace detail

// Searches every maximal consistent cover of `detected` by candidate
// composites.
//
// Candidates are tried in (scale desc, id asc) order. Choosing one opens a
// session, activates it and its detected features, and propagates; a
// conflict abandons the branch. A branch is complete once every feature
// that some candidate contains is covered or suppressed. Each chosen
// composite must claim a feature no other chosen composite has.
inline ExplainResult explain(Sessions& sessions, const std::set<NodeId>& detected, std::vector<NodeId> candidates) {
  const ConceptGraph& g = sessions.graph();
  const std::size_t entry_depth = sessions.depth();

  std::sort(candidates.begin(), candidates.end(), [&](NodeId a, NodeId b) {
    auto sa = g.node(a).scale, sb = g.node(b).scale;
    return sa != sb ? sa > sb : a < b;
  });
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

  std::vector<std::set<NodeId>> parts;
  std::vector<NodeId> cands;
  std::set<NodeId> coverable;
  for (auto c : candidates) {
    std::set<NodeId> mine;
    for (auto d : g.descendants(c)) {
      if (detected.count(d)) mine.insert(d);
    }
    if (mine.empty()) continue;
    coverable.insert(mine.begin(), mine.end());
    cands.push_back(c);
    parts.push_back(std::move(mine));
  }

  std::vector<Explanation> found;
  std::vector<std::size_t> chosen;

  auto suppressed_now = [&](const std::set<NodeId>& covered) {
    std::set<NodeId> out;
    for (auto f : coverable) {
      if (covered.count(f) || !g.is_inhibited(f)) continue;
      const auto& partners = g.mutex_partners(f);
      if (std::any_of(partners.begin(), partners.end(), [&](NodeId p) { return covered.count(p) != 0; })) {
        out.insert(f);
      }
    }
    return out;
  };

  auto irredundant = [&]() {
    for (auto i : chosen) {
      bool unique = false;
      for (auto f : parts[i]) {
        bool elsewhere = std::any_of(chosen.begin(), chosen.end(), [&](std::size_t j) {
          return j != i && parts[j].count(f) != 0;
        });
        if (!elsewhere) {
          unique = true;
          break;
        }
      }
      if (!unique) return false;
    }
    return true;
  };

  std::function<void(std::size_t, const std::set<NodeId>&)> search = [&](std::size_t from,
                                                                          const std::set<NodeId>& covered) {
    auto suppressed = suppressed_now(covered);
    bool complete = std::all_of(coverable.begin(), coverable.end(),
                                [&](NodeId f) { return covered.count(f) || suppressed.count(f); });
    if (complete) {
      if (irredundant()) {
        Explanation e;
        for (auto i : chosen) e.chosen.insert(cands[i]);
        e.covered = covered;
        e.suppressed = std::move(suppressed);
        found.push_back(std::move(e));
      }
      return;
    }
    for (std::size_t i = from; i < cands.size(); ++i) {
      if (g.is_inhibited(cands[i])) continue;
      bool adds = std::any_of(parts[i].begin(), parts[i].end(), [&](NodeId f) { return covered.count(f) == 0; });
      if (!adds) continue;

      sessions.begin();
      bool consistent = true;
      try {
        sessions.activate(cands[i]);
        for (auto f : parts[i]) sessions.activate(f);
        sessions.propagate();
      } catch (const ConflictError&) {
        consistent = false;
      }
      if (consistent) {
        std::set<NodeId> next = covered;
        next.insert(parts[i].begin(), parts[i].end());
        chosen.push_back(i);
        search(i + 1, next);
        chosen.pop_back();
      }
      sessions.release();
    }
  };

  try {
    search(0, {});
  } catch (...) {
    sessions.release_to(entry_depth);
    throw;
  }

  // Keep maximal readings only.
  std::vector<Explanation> maximal;
  for (const auto& e : found) {
    bool dominated = std::any_of(found.begin(), found.end(), [&](const Explanation& o) {
      return o.chosen.size() > e.chosen.size() &&
             std::includes(o.chosen.begin(), o.chosen.end(), e.chosen.begin(), e.chosen.end());
    });
    bool duplicate = std::any_of(maximal.begin(), maximal.end(), [&](const Explanation& o) { return o.chosen == e.chosen; });
    if (!dominated && !duplicate) maximal.push_back(e);
  }
  std::sort(maximal.begin(), maximal.end(), detail::chosen_less);

  ExplainResult result;
  result.explanations = std::move(maximal);
  result.novel_residue = detected;
  for (const auto& e : result.explanations) {
    for (auto f : e.covered) result.novel_residue.erase(f);
    for (auto f : e.suppressed) result.novel_residue.erase(f);
  }
  return result;
}

// Explains a grid: detected features come from the feature extractor and
// candidates from recognition.
inline ExplainResult explain(const Learner& learner, Sessions& sessions, const Grid& grid) {
  std::set<NodeId> detected;
  std::size_t unknown = 0;
  for (const auto& f : extract_features(grid)) {
    if (auto n = learner.lookup_feature(f)) {
      detected.insert(*n);
    } else {
      ++unknown;
    }
  }
  std::vector<NodeId> candidates;
  for (const auto& m : learner.recognize(grid)) candidates.push_back(m.concept_id);
  auto result = explain(sessions, detected, std::move(candidates));
  result.unknown_features = unknown;
  return result;
}

}  // namespace cgr
