#pragma once

#include <algorithm>
#include <istream>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "latmove/dataset.hpp"
#include "latmove/model.hpp"

namespace latmove {

/// Ordered compromised nodes s with compromise times z. The first entry is
/// the attacker's entry node at time 0; nodes not listed are never
/// compromised in the window.
class CompromiseTrace {
public:
  CompromiseTrace() = default;

  /// Trace holding only the entry node at time 0.
  static CompromiseTrace starting_at(NodeId entry) {
    CompromiseTrace t;
    t.push(entry, 0.0);
    return t;
  }

  void push(NodeId v, double time) {
    order_.push_back(v);
    times_.push_back(time);
  }

  std::size_t size() const noexcept { return order_.size(); }
  bool empty() const noexcept { return order_.empty(); }

  std::span<const NodeId> order() const noexcept { return order_; }
  std::span<const double> times() const noexcept { return times_; }

  NodeId node(std::size_t i) const { return order_.at(i); }
  double time(std::size_t i) const { return times_.at(i); }

  bool contains(NodeId v) const {
    return std::find(order_.begin(), order_.end(), v) != order_.end();
  }

  /// Per-node compromise time (star for nodes absent from the trace).
  std::vector<SplitTime> per_node_times(std::size_t node_count) const {
    std::vector<SplitTime> z(node_count, star);
    for (std::size_t i = 0; i < order_.size(); ++i)
      if (order_[i].index < node_count) z[order_[i].index] = times_[i];
    return z;
  }

  /// Empty string when valid, otherwise the first problem found.
  std::string check(const ObservationWindow& window) const {
    if (order_.empty()) return {};
    if (times_.front() != 0.0) return "first compromise time must be 0";
    for (std::size_t i = 0; i < order_.size(); ++i) {
      if (!window.contains(times_[i])) return "compromise time outside window";
      if (i > 0 && times_[i] < times_[i - 1]) return "compromise times must be non-decreasing";
      for (std::size_t j = 0; j < i; ++j)
        if (order_[j] == order_[i]) return "trace nodes must be distinct";
    }
    return {};
  }

  bool operator==(const CompromiseTrace&) const = default;

private:
  std::vector<NodeId> order_;
  std::vector<double> times_;
};

inline void write_trace_csv(std::ostream& os, const CompromiseTrace& trace,
                            const NetworkModel& model) {
  os << "node,time\n";
  for (std::size_t i = 0; i < trace.size(); ++i)
    os << model.label(trace.node(i)) << ',' << detail::format_double(trace.time(i)) << '\n';
}

inline CompromiseTrace read_trace_csv(std::istream& is, const NetworkModel& model) {
  CompromiseTrace trace;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (detail::trim(line).empty()) continue;
    auto cols = detail::split_csv(line);
    if (lineno == 1 && !cols.empty() && cols[0] == "node") continue;
    auto t = cols.size() == 2 ? detail::parse_double(cols[1]) : std::nullopt;
    if (!t) throw std::runtime_error("trace line " + std::to_string(lineno) + ": malformed");
    trace.push(model.require_node(cols[0]), *t);
  }
  return trace;
}

}  // namespace latmove
