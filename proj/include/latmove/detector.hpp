#pragma once

#include <cmath>
#include <limits>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <variant>

#include <json.hpp>

#include "latmove/dataset.hpp"
#include "latmove/estimator.hpp"
#include "latmove/likelihood.hpp"
#include "latmove/model.hpp"
#include "latmove/rng.hpp"
#include "latmove/schedule.hpp"
#include "latmove/topology.hpp"

namespace latmove {

struct DetectorConfig {
  NetworkModel detector_model;
  NodeId entry;
  std::size_t n_samples = 10000;
  RngSeed seed;
  AttackSchedule schedule;  // attacker strategy assumed by the detector
  std::optional<double> epsilon_rate;
  std::size_t workers = 1;
  LikelihoodForm form = LikelihoodForm::event_time;
};

/// Both detectors flag an attack at LOW values: low log_lr for the
/// likelihood-ratio detector, low baseline_ll for the anomaly detector.
struct DetectorScore {
  LogProb baseline_ll;
  LogProb attack_ll;
  double log_lr = 0.0;  // baseline_ll - attack_ll
  double ess = 0.0;
  std::size_t n_truncated = 0;
  bool degenerate = false;  // at least one side is -inf
};

inline DetectorScore score(const DetectorConfig& config, const Dataset& data,
                           const ObservationWindow& window) {
  if (!config.detector_model.contains(config.entry))
    throw std::invalid_argument("entry node is not in the detector model");
  DetectorScore s;
  s.baseline_ll = baseline_log_likelihood(config.detector_model, data, window);
  EstimatorOptions opts{config.schedule, config.epsilon_rate, config.workers, config.form};
  const EstimateResult est = estimate_attack_log_likelihood(
      config.detector_model, data, config.entry, window, config.n_samples, config.seed, opts);
  s.attack_ll = est.log_estimate;
  s.ess = est.ess;
  s.n_truncated = est.n_truncated;

  const bool b = s.baseline_ll.finite(), a = s.attack_ll.finite();
  s.degenerate = !(a && b);
  if (a && b)
    s.log_lr = s.baseline_ll.value - s.attack_ll.value;
  else if (!a && !b)
    s.log_lr = 0.0;
  else if (!b)
    s.log_lr = -std::numeric_limits<double>::infinity();
  else
    s.log_lr = std::numeric_limits<double>::infinity();
  return s;
}

// ---------------------------------------------------------------------------
// Detector-side model misspecification

struct NoMisspecification {
  bool operator==(const NoMisspecification&) const = default;
};
/// Each increment is scaled by max(0, 1 + eps), eps ~ Normal(0, std_fraction).
struct GaussianNoise {
  double std_fraction = 0.0;
  bool operator==(const GaussianNoise&) const = default;
};
/// Increments outside the edge subset become 0.
struct PathRestrict {
  EdgeLabels edges;
  bool operator==(const PathRestrict&) const = default;
};
/// Increments on the edge set are set to `rate`.
struct PathBroaden {
  EdgeLabels edges;
  double rate = 0.0;
  bool operator==(const PathBroaden&) const = default;
};

using MisspecificationTransform =
    std::variant<NoMisspecification, GaussianNoise, PathRestrict, PathBroaden>;

inline NetworkModel apply_misspecification(NetworkModel model,
                                           const MisspecificationTransform& transform,
                                           RngSeed seed) {
  struct Visitor {
    NetworkModel& m;
    RngSeed seed;

    void operator()(const NoMisspecification&) const {}

    void operator()(const GaussianNoise& g) const {
      if (!(g.std_fraction > 0.0)) return;
      SplitMix64 rng(seed);
      std::normal_distribution<double> eps(0.0, g.std_fraction);
      m.transform_params([&](const Edge&, EdgeParams& p) {
        p.malicious_increment *= std::max(0.0, 1.0 + eps(rng));
      });
    }

    void operator()(const PathRestrict& r) const {
      std::set<std::pair<NodeId, NodeId>> keep;
      for (const auto& [s, d] : r.edges) keep.emplace(m.require_node(s), m.require_node(d));
      m.transform_params([&](const Edge& e, EdgeParams& p) {
        if (!keep.contains({e.src, e.dst})) p.malicious_increment = 0.0;
      });
    }

    void operator()(const PathBroaden& b) const { m = with_edge_increments(m, b.edges, b.rate); }
  };
  std::visit(Visitor{model, seed}, transform);
  return model;
}

inline const char* to_string(LikelihoodForm f) {
  return f == LikelihoodForm::count ? "count" : "event_time";
}

inline LikelihoodForm likelihood_form_from_string(std::string_view s) {
  if (s == "count") return LikelihoodForm::count;
  if (s == "event_time") return LikelihoodForm::event_time;
  throw std::invalid_argument("unknown likelihood form: " + std::string(s));
}

inline nlohmann::json to_json(const MisspecificationTransform& t) {
  struct Visitor {
    nlohmann::json operator()(const NoMisspecification&) const { return {{"kind", "none"}}; }
    nlohmann::json operator()(const GaussianNoise& g) const {
      return {{"kind", "gaussian_noise"}, {"std_fraction", g.std_fraction}};
    }
    nlohmann::json operator()(const PathRestrict& r) const {
      return {{"kind", "path_restrict"}, {"edges", r.edges}};
    }
    nlohmann::json operator()(const PathBroaden& b) const {
      return {{"kind", "path_broaden"}, {"edges", b.edges}, {"rate", b.rate}};
    }
  };
  return std::visit(Visitor{}, t);
}

inline MisspecificationTransform transform_from_json(const nlohmann::json& j) {
  const std::string kind = j.value("kind", "none");
  if (kind == "none") return NoMisspecification{};
  if (kind == "gaussian_noise") return GaussianNoise{j.at("std_fraction").get<double>()};
  if (kind == "path_restrict") return PathRestrict{j.at("edges").get<EdgeLabels>()};
  if (kind == "path_broaden")
    return PathBroaden{j.at("edges").get<EdgeLabels>(), j.at("rate").get<double>()};
  throw std::invalid_argument("unknown misspecification kind: " + kind);
}

}  // namespace latmove
