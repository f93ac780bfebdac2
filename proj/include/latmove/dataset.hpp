#pragma once

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "latmove/model.hpp"

namespace latmove {

/// One observed message (tau, src, dst).
struct EventRecord {
  double time = 0.0;
  NodeId src;
  NodeId dst;

  constexpr bool operator==(const EventRecord&) const = default;
};

/// Compromise time of a node, or the star sentinel (never compromised in [0,T]).
using SplitTime = std::optional<double>;
inline constexpr std::nullopt_t star = std::nullopt;

struct MessageCounts {
  std::size_t pre = 0;   // events with time < split
  std::size_t post = 0;  // events with time >= split

  constexpr bool operator==(const MessageCounts&) const = default;
};

/// Time-ordered list of observed messages with a per-edge time index.
class Dataset {
public:
  using Pair = std::pair<NodeId, NodeId>;

  Dataset() = default;

  /// Inserts keeping time order; ties go after existing events.
  void add(const EventRecord& e) {
    if (events_.empty() || events_.back().time <= e.time) {
      events_.push_back(e);
    } else {
      auto it = std::upper_bound(events_.begin(), events_.end(), e.time,
                                 [](double t, const EventRecord& r) { return t < r.time; });
      events_.insert(it, e);
    }
    auto& times = by_pair_[{e.src, e.dst}];
    if (times.empty() || times.back() <= e.time)
      times.push_back(e.time);
    else
      times.insert(std::upper_bound(times.begin(), times.end(), e.time), e.time);
  }

  void add(double time, NodeId src, NodeId dst) { add(EventRecord{time, src, dst}); }

  std::span<const EventRecord> events() const noexcept { return events_; }
  std::size_t size() const noexcept { return events_.size(); }
  bool empty() const noexcept { return events_.empty(); }

  /// Sorted event times on src -> dst.
  std::span<const double> times(NodeId src, NodeId dst) const {
    auto it = by_pair_.find({src, dst});
    if (it == by_pair_.end()) return {};
    return it->second;
  }

  std::size_t count(NodeId src, NodeId dst) const { return times(src, dst).size(); }

  /// Every (src, dst) pair that carries at least one event, with its times.
  const std::map<Pair, std::vector<double>>& pairs() const noexcept { return by_pair_; }

  bool operator==(const Dataset& o) const { return events_ == o.events_; }

private:
  std::vector<EventRecord> events_;
  std::map<Pair, std::vector<double>> by_pair_;
};

/// Splits the messages on src -> dst at the source's compromise time.
/// Events exactly at the split count as post-compromise.
inline MessageCounts count_messages(const Dataset& data, NodeId src, NodeId dst,
                                    SplitTime split, const ObservationWindow& /*window*/) {
  auto t = data.times(src, dst);
  if (!split) return {t.size(), 0};
  auto pre = static_cast<std::size_t>(std::lower_bound(t.begin(), t.end(), *split) - t.begin());
  return {pre, t.size() - pre};
}

// ---------------------------------------------------------------------------
// CSV

namespace detail {

inline std::string format_double(double x) {
  char buf[32];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 17);
  return std::string(buf, p);
}

inline std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split_csv(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    auto comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

inline std::optional<double> parse_double(std::string_view s) {
  double v = 0.0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

}  // namespace detail

inline void write_dataset_csv(std::ostream& os, const Dataset& data, const NetworkModel& model) {
  os << "time,src,dst\n";
  for (const auto& e : data.events())
    os << detail::format_double(e.time) << ',' << model.label(e.src) << ',' << model.label(e.dst)
       << '\n';
}

/// Reads "time,src,dst" rows, resolving labels against the model.
inline Dataset read_dataset_csv(std::istream& is, const NetworkModel& model) {
  Dataset data;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (detail::trim(line).empty()) continue;
    auto cols = detail::split_csv(line);
    if (lineno == 1 && !cols.empty() && cols[0] == "time") continue;
    if (cols.size() != 3)
      throw std::runtime_error("dataset line " + std::to_string(lineno) + ": expected 3 columns");
    auto t = detail::parse_double(cols[0]);
    if (!t) throw std::runtime_error("dataset line " + std::to_string(lineno) + ": bad time");
    data.add(*t, model.require_node(cols[1]), model.require_node(cols[2]));
  }
  return data;
}

}  // namespace latmove
