#pragma once

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <json.hpp>

namespace latmove {

/// Dense index into a model's node table. Labels are metadata held by the model.
struct NodeId {
  std::uint32_t index = 0;

  constexpr auto operator<=>(const NodeId&) const = default;
};

/// Rates on one directed edge. The compromised-source rate is
/// benign_rate + malicious_increment.
struct EdgeParams {
  double benign_rate = 0.0;
  double malicious_increment = 0.0;

  constexpr double compromised_rate() const noexcept {
    return benign_rate + malicious_increment;
  }
  constexpr bool operator==(const EdgeParams&) const = default;
};

struct Edge {
  NodeId src;
  NodeId dst;
  EdgeParams params;

  constexpr bool operator==(const Edge&) const = default;
};

/// Length T of the observation window [0, T].
class ObservationWindow {
public:
  explicit ObservationWindow(double horizon) : horizon_(horizon) {
    if (!(horizon > 0.0) || !std::isfinite(horizon))
      throw std::invalid_argument("observation horizon must be finite and positive");
  }

  double horizon() const noexcept { return horizon_; }
  bool contains(double t) const noexcept { return t >= 0.0 && t <= horizon_; }

private:
  double horizon_;
};

/// Directed graph with per-edge benign rate and malicious increment.
///
/// Edges are kept sorted by (src, dst) so each node's out-edges form a
/// contiguous span. The model does not reject invalid content on
/// construction; call validate_model() to get a report.
class NetworkModel {
public:
  NetworkModel() = default;

  NodeId add_node(std::string label) {
    if (by_label_.contains(label))
      throw std::invalid_argument("duplicate node label: " + label);
    NodeId id{static_cast<std::uint32_t>(labels_.size())};
    by_label_.emplace(label, id);
    labels_.push_back(std::move(label));
    rebuild_offsets();
    return id;
  }

  /// Inserts or replaces the edge src -> dst.
  void set_edge(NodeId src, NodeId dst, EdgeParams params) {
    Edge e{src, dst, params};
    auto it = std::lower_bound(edges_.begin(), edges_.end(), e, edge_less);
    if (it != edges_.end() && it->src == src && it->dst == dst) {
      it->params = params;
      return;
    }
    edges_.insert(it, e);
    rebuild_offsets();
  }

  void set_edge(std::string_view src, std::string_view dst, EdgeParams params) {
    set_edge(require_node(src), require_node(dst), params);
  }

  std::size_t node_count() const noexcept { return labels_.size(); }
  std::size_t edge_count() const noexcept { return edges_.size(); }

  const std::string& label(NodeId v) const { return labels_.at(v.index); }
  std::span<const std::string> labels() const noexcept { return labels_; }

  std::optional<NodeId> find_node(std::string_view label) const {
    auto it = by_label_.find(std::string(label));
    if (it == by_label_.end()) return std::nullopt;
    return it->second;
  }

  NodeId require_node(std::string_view label) const {
    if (auto v = find_node(label)) return *v;
    throw std::invalid_argument("unknown node: " + std::string(label));
  }

  bool contains(NodeId v) const noexcept { return v.index < labels_.size(); }

  std::span<const Edge> edges() const noexcept { return edges_; }

  /// Out-edges of v, sorted by destination. Empty for unknown nodes.
  std::span<const Edge> out_edges(NodeId v) const noexcept {
    if (!contains(v)) return {};
    return std::span<const Edge>(edges_).subspan(offsets_[v.index],
                                                 offsets_[v.index + 1] - offsets_[v.index]);
  }

  /// Position of src -> dst in edges(), if present.
  std::optional<std::size_t> edge_index(NodeId src, NodeId dst) const noexcept {
    auto out = out_edges(src);
    auto it = std::lower_bound(out.begin(), out.end(), dst,
                               [](const Edge& e, NodeId d) { return e.dst < d; });
    if (it == out.end() || it->dst != dst) return std::nullopt;
    return static_cast<std::size_t>(&*it - edges_.data());
  }

  const Edge* find_edge(NodeId src, NodeId dst) const noexcept {
    auto i = edge_index(src, dst);
    return i ? &edges_[*i] : nullptr;
  }

  /// Applies f to every edge's params in place (used by model transforms).
  template <class F>
  void transform_params(F&& f) {
    for (auto& e : edges_) f(e, e.params);
  }

  bool operator==(const NetworkModel& o) const {
    return labels_ == o.labels_ && edges_ == o.edges_;
  }

private:
  static bool edge_less(const Edge& a, const Edge& b) noexcept {
    return std::tie(a.src, a.dst) < std::tie(b.src, b.dst);
  }

  void rebuild_offsets() {
    offsets_.assign(labels_.size() + 1, 0);
    std::size_t i = 0;
    for (std::size_t v = 0; v < labels_.size(); ++v) {
      offsets_[v] = i;
      while (i < edges_.size() && edges_[i].src.index == v) ++i;
    }
    offsets_[labels_.size()] = i;
  }

  std::vector<std::string> labels_;
  std::unordered_map<std::string, NodeId> by_label_;
  std::vector<Edge> edges_;
  std::vector<std::size_t> offsets_{0};
};

// ---------------------------------------------------------------------------
// Validation

enum class ViolationKind { non_positive_rate, negative_increment, non_finite_rate, self_edge, dangling_node };

struct Violation {
  ViolationKind kind;
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool ok() const noexcept { return violations.empty(); }
  bool has(ViolationKind k) const {
    return std::any_of(violations.begin(), violations.end(),
                       [k](const Violation& v) { return v.kind == k; });
  }
};

inline ValidationReport validate_model(const NetworkModel& model) {
  ValidationReport report;
  auto name = [&](NodeId v) {
    return model.contains(v) ? model.label(v) : "#" + std::to_string(v.index);
  };
  for (const Edge& e : model.edges()) {
    const std::string where = name(e.src) + "->" + name(e.dst);
    if (!model.contains(e.src) || !model.contains(e.dst))
      report.violations.push_back({ViolationKind::dangling_node, "dangling node: " + where});
    if (e.src == e.dst)
      report.violations.push_back({ViolationKind::self_edge, "self-edge: " + where});
    if (!std::isfinite(e.params.benign_rate) || !std::isfinite(e.params.malicious_increment)) {
      report.violations.push_back({ViolationKind::non_finite_rate, "non-finite rate: " + where});
      continue;
    }
    if (!(e.params.benign_rate > 0.0))
      report.violations.push_back(
          {ViolationKind::non_positive_rate, "edge rate must be positive: " + where});
    if (e.params.malicious_increment < 0.0)
      report.violations.push_back(
          {ViolationKind::negative_increment, "malicious increment must be non-negative: " + where});
  }
  return report;
}

/// Smallest strictly positive benign rate or malicious increment in the
/// model; +inf when there is none.
inline double min_positive_rate(const NetworkModel& model) {
  double m = std::numeric_limits<double>::infinity();
  for (const Edge& e : model.edges()) {
    if (e.params.benign_rate > 0.0) m = std::min(m, e.params.benign_rate);
    if (e.params.malicious_increment > 0.0) m = std::min(m, e.params.malicious_increment);
  }
  return m;
}

// ---------------------------------------------------------------------------
// JSON: {"nodes": [...], "edges": [{"src","dst","benign_rate","malicious_increment"}]}

inline nlohmann::json to_json(const NetworkModel& model) {
  nlohmann::json nodes = nlohmann::json::array();
  for (const auto& l : model.labels()) nodes.push_back(l);
  nlohmann::json edges = nlohmann::json::array();
  for (const Edge& e : model.edges()) {
    edges.push_back({{"src", model.label(e.src)},
                     {"dst", model.label(e.dst)},
                     {"benign_rate", e.params.benign_rate},
                     {"malicious_increment", e.params.malicious_increment}});
  }
  return {{"nodes", std::move(nodes)}, {"edges", std::move(edges)}};
}

inline NetworkModel model_from_json(const nlohmann::json& j) {
  NetworkModel model;
  for (const auto& n : j.at("nodes")) model.add_node(n.get<std::string>());
  for (const auto& e : j.at("edges")) {
    model.set_edge(e.at("src").get<std::string>(), e.at("dst").get<std::string>(),
                   EdgeParams{e.at("benign_rate").get<double>(),
                              e.value("malicious_increment", 0.0)});
  }
  return model;
}

}  // namespace latmove
