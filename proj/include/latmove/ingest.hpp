#pragma once

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <set>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "latmove/dataset.hpp"
#include "latmove/model.hpp"

namespace latmove {

/// One "user,computer,time" authentication line.
struct AuthRecord {
  std::string user;
  std::string computer;
  std::int64_t time = 0;  // seconds

  bool operator==(const AuthRecord&) const = default;
};

struct MalformedLine {
  std::size_t line = 0;  // 1-based
  std::string text;
  std::string reason;
};

struct AuthLog {
  std::vector<AuthRecord> records;  // file order
  std::vector<MalformedLine> malformed;
};

inline AuthLog parse_auth_log(std::istream& is) {
  if (!is) throw std::runtime_error("auth log stream is not readable");
  AuthLog log;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (detail::trim(line).empty()) continue;
    auto cols = detail::split_csv(line);
    auto reject = [&](std::string reason) {
      log.malformed.push_back({lineno, line, std::move(reason)});
    };
    if (cols.size() != 3) {
      reject("expected 3 comma-separated fields");
      continue;
    }
    if (cols[0].empty() || cols[1].empty()) {
      reject("empty identifier");
      continue;
    }
    std::int64_t t = 0;
    const auto& ts = cols[2];
    auto [p, ec] = std::from_chars(ts.data(), ts.data() + ts.size(), t);
    if (ec != std::errc() || p != ts.data() + ts.size() || t < 0) {
      reject("time is not a non-negative integer");
      continue;
    }
    log.records.push_back({cols[0], cols[1], t});
  }
  if (is.bad()) throw std::runtime_error("error while reading auth log");
  return log;
}

struct ExtractionConfig {
  std::int64_t hour_start = 0;  // inclusive start second of the 3600 s slice
  std::size_t min_in = 15;      // a node is kept when in-messages exceed this ...
  std::size_t min_out = 15;     // ... and out-messages exceed this
  bool require_both = true;     // false: either threshold suffices
  bool chain_pairs = true;      // same-second groups: consecutive pairs (true) or all ordered pairs
};

inline constexpr std::int64_t seconds_per_hour = 3600;

/// Inferred host-to-host message.
struct HostMessage {
  std::int64_t time = 0;
  std::string src;
  std::string dst;

  auto operator<=>(const HostMessage&) const = default;
};

/// Same-user authentications within one second imply messages between the
/// hosts involved, directed in file order. Output is sorted by
/// (time, src, dst) so it does not depend on how users are interleaved.
inline std::vector<HostMessage> infer_edges(const std::vector<AuthRecord>& records,
                                            const ExtractionConfig& config) {
  const std::int64_t end = config.hour_start + seconds_per_hour;
  std::map<std::pair<std::string, std::int64_t>, std::vector<const std::string*>> groups;
  for (const auto& r : records)
    if (r.time >= config.hour_start && r.time < end) groups[{r.user, r.time}].push_back(&r.computer);

  std::vector<HostMessage> out;
  for (const auto& [key, hosts] : groups) {
    for (std::size_t i = 0; i + 1 < hosts.size(); ++i) {
      const std::size_t last = config.chain_pairs ? i + 2 : hosts.size();
      for (std::size_t j = i + 1; j < last; ++j)
        if (*hosts[i] != *hosts[j]) out.push_back({key.second, *hosts[i], *hosts[j]});
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

struct ExtractionResult {
  NetworkModel model;  // benign rates in messages per minute, increments 0
  std::map<std::pair<std::string, std::string>, std::size_t> hourly_counts;
  std::vector<std::string> survivors;  // hosts passing the filter, before the component step
  bool empty = false;
  std::string report;
};

/// Drops hosts that fail the in/out message thresholds (repeating until no
/// more hosts drop, since removing a host lowers its neighbours' counts),
/// then keeps the largest weakly connected component. Ties go to the
/// component holding the lexicographically smallest host.
inline ExtractionResult extract_subgraph(const std::vector<HostMessage>& events,
                                         const ExtractionConfig& config) {
  std::map<std::pair<std::string, std::string>, std::size_t> counts;
  for (const auto& e : events) ++counts[{e.src, e.dst}];

  std::set<std::string> alive;
  for (const auto& [k, c] : counts) {
    alive.insert(k.first);
    alive.insert(k.second);
  }
  auto keep = [&](std::size_t in, std::size_t out) {
    return config.require_both ? (in > config.min_in && out > config.min_out)
                               : (in > config.min_in || out > config.min_out);
  };
  for (bool changed = true; changed;) {
    changed = false;
    std::map<std::string, std::pair<std::size_t, std::size_t>> io;  // in, out
    for (const auto& [k, c] : counts) {
      if (!alive.contains(k.first) || !alive.contains(k.second)) continue;
      io[k.first].second += c;
      io[k.second].first += c;
    }
    for (auto it = alive.begin(); it != alive.end();) {
      auto [in, out] = io[*it];
      if (!keep(in, out)) {
        it = alive.erase(it);
        changed = true;
      } else {
        ++it;
      }
    }
  }

  // Weakly connected components over surviving edges (alive is sorted, so
  // index order is lexicographic).
  std::vector<std::string> names(alive.begin(), alive.end());
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < names.size(); ++i) index[names[i]] = i;
  std::vector<std::size_t> parent(names.size());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (const auto& [k, c] : counts) {
    if (!alive.contains(k.first) || !alive.contains(k.second)) continue;
    std::size_t a = find(index[k.first]), b = find(index[k.second]);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
  std::map<std::size_t, std::size_t> sizes;  // root -> size; root is the smallest member
  for (std::size_t i = 0; i < names.size(); ++i) ++sizes[find(i)];

  ExtractionResult result;
  result.survivors = names;
  if (sizes.empty()) {
    result.empty = true;
    result.report = "no hosts survive the message thresholds";
    return result;
  }
  std::size_t best_root = sizes.begin()->first, best_size = 0;
  for (const auto& [root, size] : sizes)
    if (size > best_size) best_root = root, best_size = size;

  for (std::size_t i = 0; i < names.size(); ++i)
    if (find(i) == best_root) result.model.add_node(names[i]);
  for (const auto& [k, c] : counts) {
    auto s = result.model.find_node(k.first), d = result.model.find_node(k.second);
    if (!s || !d) continue;
    result.hourly_counts[k] = c;
    result.model.set_edge(*s, *d, EdgeParams{static_cast<double>(c) / 60.0, 0.0});
  }
  result.report = std::to_string(result.model.node_count()) + " hosts, " +
                  std::to_string(result.model.edge_count()) + " edges";
  return result;
}

/// Malicious increment on every edge = fraction x benign rate.
inline NetworkModel attach_attack_rates(NetworkModel model, double malicious_fraction) {
  if (!(malicious_fraction >= 0.0)) throw std::invalid_argument("malicious fraction must be >= 0");
  model.transform_params([&](const Edge&, EdgeParams& p) {
    p.malicious_increment = malicious_fraction * p.benign_rate;
  });
  return model;
}

/// "rate_per_min,count": number of edges at each distinct benign rate.
inline void write_rate_histogram_csv(std::ostream& os, const NetworkModel& model) {
  std::map<double, std::size_t> hist;
  for (const Edge& e : model.edges()) ++hist[e.params.benign_rate];
  os << "rate_per_min,count\n";
  for (const auto& [rate, n] : hist) os << detail::format_double(rate) << ',' << n << '\n';
}

}  // namespace latmove
