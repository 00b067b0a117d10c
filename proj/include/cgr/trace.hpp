#pragma once

#include <cstddef>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace cgr {

enum class TraceEvent { Activate, CreateNode, Cancel, Inhibit, Branch, Merge, Solution, NoSolution, Conflict };

inline std::string_view to_string(TraceEvent e) {
  switch (e) {
    case TraceEvent::Activate: return "activate";
    case TraceEvent::CreateNode: return "create_node";
    case TraceEvent::Cancel: return "cancel";
    case TraceEvent::Inhibit: return "inhibit";
    case TraceEvent::Branch: return "branch";
    case TraceEvent::Merge: return "merge";
    case TraceEvent::Solution: return "solution";
    case TraceEvent::NoSolution: return "no_solution";
    case TraceEvent::Conflict: return "conflict";
  }
  return "?";
}

struct TraceRecord {
  std::size_t step = 0;
  TraceEvent event = TraceEvent::Activate;
  std::string subject;  // node id as decimal, or a state as "(x,y)" / "(x,y|bx,by)"
  std::size_t session_depth = 0;
};

// Append-only record of engine events. Steps are assigned on append and are
// strictly increasing.
class Trace {
 public:
  void record(TraceEvent event, std::string subject, std::size_t depth) {
    records_.push_back({records_.size(), event, std::move(subject), depth});
  }

  const std::vector<TraceRecord>& records() const noexcept { return records_; }
  std::size_t size() const noexcept { return records_.size(); }
  bool empty() const noexcept { return records_.empty(); }

  // One record per line, tab-separated: step, event, subject, session depth.
  void write(std::ostream& os) const {
    for (const auto& r : records_) {
      os << r.step << '\t' << to_string(r.event) << '\t' << r.subject << '\t' << r.session_depth << '\n';
    }
  }

 private:
  std::vector<TraceRecord> records_;
};

}  // namespace cgr
