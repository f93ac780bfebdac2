#pragma once

#include <algorithm>
#include <optional>
#include <stdexcept>
#include <vector>

#include "latmove/dataset.hpp"
#include "latmove/model.hpp"
#include "latmove/rng.hpp"
#include "latmove/schedule.hpp"
#include "latmove/trace.hpp"

namespace latmove {

struct SimulationResult {
  Dataset dataset;
  CompromiseTrace trace;  // empty for benign runs
  bool attack = false;
};

namespace detail {

/// Event-driven exact simulation of all edge processes. Rates are piecewise
/// constant between compromises, so the aggregate rate and the cumulative
/// selection table are rebuilt only when a node is compromised.
///
/// A compromised source emits on every out-edge at benign + increment. An
/// arrival on a compromised -> uncompromised edge is malicious with
/// probability increment / (benign + increment); a malicious arrival
/// compromises its destination at the arrival time. The arrival itself is
/// recorded like any other message.
inline SimulationResult gillespie(const NetworkModel& model, std::optional<NodeId> entry,
                                  const ObservationWindow& window, const AttackSchedule& schedule,
                                  RngSeed seed) {
  const auto edges = model.edges();
  const double horizon = window.horizon();
  SplitMix64 rng(seed);

  SimulationResult out;
  out.attack = entry.has_value();

  std::vector<std::size_t> rank(model.node_count(), 0);  // 0 = uncompromised
  std::vector<double> increment(edges.size(), 0.0);
  std::vector<double> cumulative(edges.size(), 0.0);
  double total = 0.0;

  auto rebuild = [&] {
    total = 0.0;
    for (std::size_t i = 0; i < edges.size(); ++i) {
      const Edge& e = edges[i];
      std::size_t k = model.contains(e.src) ? rank[e.src.index] : 0;
      increment[i] = k > 0 ? std::max(0.0, schedule.increment(e, k)) : 0.0;
      total += std::max(0.0, e.params.benign_rate) + increment[i];
      cumulative[i] = total;
    }
  };

  std::size_t compromised = 0;
  if (entry) {
    rank[entry->index] = ++compromised;
    out.trace.push(*entry, 0.0);
  }
  rebuild();

  double t = 0.0;
  while (true) {
    t += rng.exponential(total);
    if (!(t <= horizon)) break;
    const double pick = rng.uniform() * total;
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), pick);
    std::size_t i = std::min<std::size_t>(it - cumulative.begin(), edges.size() - 1);
    const Edge& e = edges[i];
    out.dataset.add(t, e.src, e.dst);

    if (increment[i] > 0.0 && rank[e.dst.index] == 0) {
      const double rate = std::max(0.0, e.params.benign_rate) + increment[i];
      if (rng.uniform() * rate < increment[i]) {
        rank[e.dst.index] = ++compromised;
        out.trace.push(e.dst, t);
        rebuild();
      }
    }
  }
  return out;
}

}  // namespace detail

/// Homogeneous Poisson traffic at every edge's benign rate over [0, T].
inline SimulationResult simulate_benign(const NetworkModel& model, const ObservationWindow& window,
                                        RngSeed seed) {
  return detail::gillespie(model, std::nullopt, window, AttackSchedule{}, seed);
}

/// Benign traffic plus an attacker holding `entry` from time 0 and spreading
/// along malicious messages.
inline SimulationResult simulate_attack_schedule(const NetworkModel& model, NodeId entry,
                                                 const ObservationWindow& window,
                                                 const AttackSchedule& schedule, RngSeed seed) {
  if (!model.contains(entry)) throw std::invalid_argument("unknown entry node");
  return detail::gillespie(model, entry, window, schedule, seed);
}

inline SimulationResult simulate_attack(const NetworkModel& model, NodeId entry,
                                        const ObservationWindow& window, RngSeed seed) {
  return simulate_attack_schedule(model, entry, window, AttackSchedule{}, seed);
}

}  // namespace latmove
