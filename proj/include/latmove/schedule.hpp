#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include <json.hpp>

#include "latmove/model.hpp"

namespace latmove {

/// Per-compromise-index malicious rates. The k-th compromised node (k = 1 is
/// the entry) emits its malicious stream at increments[k-1]; beyond the list
/// the last value grows by tail_step per index, or, without a tail, the
/// model's own edge increments apply.
///
///   {0.03, 0.06} tail 0   -> "enter slowly, traverse quickly"
///   {0.05}       tail 0.05 -> escalation by 0.05 per compromised node
struct AttackSchedule {
  std::vector<double> increments;
  std::optional<double> tail_step;
  bool relative = false;  // values are fractions of each edge's benign rate

  bool empty() const noexcept { return increments.empty(); }

  std::optional<double> value_for(std::size_t k) const {
    if (increments.empty() || k == 0) return std::nullopt;
    if (k <= increments.size()) return increments[k - 1];
    if (!tail_step) return std::nullopt;
    return increments.back() + *tail_step * static_cast<double>(k - increments.size());
  }

  /// Malicious increment on edge e when its source is the k-th compromised node.
  double increment(const Edge& e, std::size_t k) const {
    auto v = value_for(k);
    if (!v) return e.params.malicious_increment;
    return relative ? *v * e.params.benign_rate : *v;
  }

  bool operator==(const AttackSchedule&) const = default;
};

inline nlohmann::json to_json(const AttackSchedule& s) {
  nlohmann::json j{{"increments", s.increments}, {"relative", s.relative}};
  if (s.tail_step) j["tail_step"] = *s.tail_step;
  return j;
}

inline AttackSchedule schedule_from_json(const nlohmann::json& j) {
  AttackSchedule s;
  s.increments = j.value("increments", std::vector<double>{});
  s.relative = j.value("relative", false);
  if (j.contains("tail_step") && !j["tail_step"].is_null()) s.tail_step = j["tail_step"].get<double>();
  return s;
}

}  // namespace latmove
