#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "latmove/model.hpp"

namespace latmove {

using EdgeLabels = std::vector<std::pair<std::string, std::string>>;

namespace detail {

inline void require_positive(std::initializer_list<int> sizes) {
  for (int s : sizes)
    if (s <= 0) throw std::invalid_argument("topology sizes must be positive");
}

inline void link_both(NetworkModel& m, NodeId a, NodeId b, EdgeParams p) {
  m.set_edge(a, b, p);
  m.set_edge(b, a, p);
}

}  // namespace detail

/// Attacker node "A" feeding hub "H", which exchanges traffic with leaves U1..Un.
inline NetworkModel star_topology(int leaves, EdgeParams rates = {1.0, 0.0}) {
  detail::require_positive({leaves});
  NetworkModel m;
  NodeId a = m.add_node("A");
  NodeId hub = m.add_node("H");
  m.set_edge(a, hub, rates);
  for (int i = 1; i <= leaves; ++i)
    detail::link_both(m, hub, m.add_node("U" + std::to_string(i)), rates);
  return m;
}

/// Center chain C1..Cn (bidirectional) with `legs` leaf hosts Ci_j hanging
/// off every center node (bidirectional).
inline NetworkModel caterpillar_topology(int length, int legs, EdgeParams rates = {1.0, 0.0}) {
  detail::require_positive({length, legs});
  NetworkModel m;
  std::vector<NodeId> center;
  for (int i = 1; i <= length; ++i) center.push_back(m.add_node("C" + std::to_string(i)));
  for (int i = 0; i + 1 < length; ++i) detail::link_both(m, center[i], center[i + 1], rates);
  for (int i = 0; i < length; ++i)
    for (int j = 1; j <= legs; ++j)
      detail::link_both(m, center[i],
                        m.add_node("C" + std::to_string(i + 1) + "_" + std::to_string(j)), rates);
  return m;
}

/// Forward edges C1 -> C2 -> ... -> Cn of a caterpillar.
inline EdgeLabels caterpillar_center_edges(int length) {
  EdgeLabels out;
  for (int i = 1; i < length; ++i)
    out.emplace_back("C" + std::to_string(i), "C" + std::to_string(i + 1));
  return out;
}

/// Entry "A", `paths` parallel chains Pp_1..Pp_L, all converging on goal "G".
inline NetworkModel goal_paths_topology(int paths, int path_len, EdgeParams rates = {1.0, 0.0}) {
  detail::require_positive({paths, path_len});
  NetworkModel m;
  NodeId a = m.add_node("A");
  std::vector<std::vector<NodeId>> chain(paths);
  for (int p = 0; p < paths; ++p)
    for (int i = 1; i <= path_len; ++i)
      chain[p].push_back(m.add_node("P" + std::to_string(p + 1) + "_" + std::to_string(i)));
  NodeId goal = m.add_node("G");
  for (int p = 0; p < paths; ++p) {
    m.set_edge(a, chain[p].front(), rates);
    for (int i = 0; i + 1 < path_len; ++i) m.set_edge(chain[p][i], chain[p][i + 1], rates);
    m.set_edge(chain[p].back(), goal, rates);
  }
  return m;
}

/// Edges of path p (1-based) from A to G in a goal_paths topology.
inline EdgeLabels goal_path_edges(int path, int path_len) {
  EdgeLabels out;
  std::string prev = "A";
  for (int i = 1; i <= path_len; ++i) {
    std::string cur = "P" + std::to_string(path) + "_" + std::to_string(i);
    out.emplace_back(prev, cur);
    prev = cur;
  }
  out.emplace_back(prev, "G");
  return out;
}

/// Named generator dispatch: "star" {leaves}, "caterpillar" {length, legs},
/// "goal_paths" {paths, path_len}. Benign rates are 1 and increments 0.
inline NetworkModel preset_topology(std::string_view kind, const std::vector<int>& sizes) {
  auto need = [&](std::size_t n) {
    if (sizes.size() != n)
      throw std::invalid_argument("preset " + std::string(kind) + " takes " + std::to_string(n) +
                                  " size parameter(s)");
  };
  if (kind == "star") {
    need(1);
    return star_topology(sizes[0]);
  }
  if (kind == "caterpillar") {
    need(2);
    return caterpillar_topology(sizes[0], sizes[1]);
  }
  if (kind == "goal_paths") {
    need(2);
    return goal_paths_topology(sizes[0], sizes[1]);
  }
  throw std::invalid_argument("unknown preset topology: " + std::string(kind));
}

/// Sets every edge's malicious increment to `increment`.
inline NetworkModel with_uniform_increment(NetworkModel m, double increment) {
  m.transform_params([&](const Edge&, EdgeParams& p) { p.malicious_increment = increment; });
  return m;
}

/// Sets increments on the listed edges, leaving others untouched.
inline NetworkModel with_edge_increments(NetworkModel m, const EdgeLabels& edges, double increment) {
  for (const auto& [s, d] : edges) {
    NodeId src = m.require_node(s), dst = m.require_node(d);
    const Edge* e = m.find_edge(src, dst);
    if (!e) throw std::invalid_argument("no edge " + s + "->" + d);
    m.set_edge(src, dst, EdgeParams{e->params.benign_rate, increment});
  }
  return m;
}

}  // namespace latmove
