#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "latmove/dataset.hpp"
#include "latmove/likelihood.hpp"
#include "latmove/model.hpp"
#include "latmove/parallel.hpp"
#include "latmove/rng.hpp"
#include "latmove/schedule.hpp"
#include "latmove/trace.hpp"

namespace latmove {

/// Base model plus infinitesimal-rate malicious edges from the entry node to
/// every node it does not already reach in one hop, so that every node is
/// eventually compromised with probability one. The extra edges only shape
/// the trace proposal; data is always scored against the base model.
struct AugmentedModel {
  NetworkModel base;
  NodeId entry;
  std::vector<NodeId> added;  // destinations of the added entry -> v edges
  double epsilon_rate = 0.0;
  AttackSchedule schedule;
};

/// Default infinitesimal rate: min(1e-6 / (T N^2), 1e-6 * smallest positive
/// rate in the model).
inline double default_epsilon_rate(const NetworkModel& model, const ObservationWindow& window) {
  const double n = static_cast<double>(std::max<std::size_t>(model.node_count(), 1));
  const double by_horizon = 1e-6 / (window.horizon() * n * n);
  const double min_rate = min_positive_rate(model);
  return std::isfinite(min_rate) ? std::min(by_horizon, 1e-6 * min_rate) : by_horizon;
}

inline AugmentedModel augment_network(const NetworkModel& model, NodeId entry,
                                      const ObservationWindow& window,
                                      const AttackSchedule& schedule = {},
                                      std::optional<double> epsilon_rate = std::nullopt) {
  if (!model.contains(entry)) throw std::invalid_argument("unknown entry node");
  AugmentedModel aug{model, entry, {}, epsilon_rate.value_or(default_epsilon_rate(model, window)),
                     schedule};
  if (!(aug.epsilon_rate > 0.0)) throw std::invalid_argument("epsilon rate must be positive");
  for (std::uint32_t i = 0; i < model.node_count(); ++i) {
    NodeId v{i};
    if (v == entry) continue;
    const Edge* e = model.find_edge(entry, v);
    if (!e || !(schedule.increment(*e, 1) > 0.0)) aug.added.push_back(v);
  }
  return aug;
}

struct SampledTrace {
  CompromiseTrace trace;
  bool truncated = false;  // some nodes left at star when the horizon was passed
};

/// Draws compromise traces from the attacker's prior under an augmented
/// model: exponential waiting time at the frontier rate, then the next node
/// in proportion to its inflow rate, until the horizon or full compromise.
class TraceSampler {
public:
  TraceSampler(const AugmentedModel& aug, const ObservationWindow& window)
      : aug_(&aug), horizon_(window.horizon()), inflow_(aug.base.node_count()),
        done_(aug.base.node_count()) {}

  /// Fills order/times; returns true when the trace was padded at the horizon.
  bool sample(SplitMix64& rng, std::vector<NodeId>& order, std::vector<double>& times) {
    const NetworkModel& model = aug_->base;
    const std::size_t n = model.node_count();
    std::fill(inflow_.begin(), inflow_.end(), 0.0);
    std::fill(done_.begin(), done_.end(), 0);
    order.clear();
    times.clear();

    auto compromise = [&](NodeId v, double t) {
      done_[v.index] = 1;
      inflow_[v.index] = 0.0;
      order.push_back(v);
      times.push_back(t);
      const std::size_t k = order.size();
      for (const Edge& e : model.out_edges(v))
        if (!done_[e.dst.index]) inflow_[e.dst.index] += std::max(0.0, aug_->schedule.increment(e, k));
    };

    compromise(aug_->entry, 0.0);
    for (NodeId v : aug_->added) inflow_[v.index] += aug_->epsilon_rate;

    double t = 0.0;
    while (order.size() < n) {
      double frontier = 0.0;
      for (std::size_t v = 0; v < n; ++v)
        if (!done_[v]) frontier += inflow_[v];
      t += rng.exponential(frontier);
      if (!(t <= horizon_)) return true;
      const double pick = rng.uniform() * frontier;
      double acc = 0.0;
      std::size_t chosen = n;
      for (std::size_t v = 0; v < n; ++v) {
        if (done_[v] || !(inflow_[v] > 0.0)) continue;
        chosen = v;
        acc += inflow_[v];
        if (pick < acc) break;
      }
      compromise(NodeId{static_cast<std::uint32_t>(chosen)}, t);
    }
    return false;
  }

private:
  const AugmentedModel* aug_;
  double horizon_;
  std::vector<double> inflow_;
  std::vector<char> done_;
};

inline SampledTrace sample_trace(const AugmentedModel& aug, const ObservationWindow& window,
                                 RngSeed seed) {
  TraceSampler sampler(aug, window);
  SplitMix64 rng(seed);
  std::vector<NodeId> order;
  std::vector<double> times;
  SampledTrace out;
  out.truncated = sampler.sample(rng, order, times);
  for (std::size_t i = 0; i < order.size(); ++i) out.trace.push(order[i], times[i]);
  return out;
}

// ---------------------------------------------------------------------------

/// ln sum exp(x_i), accumulated left to right with a running maximum.
class LogSumExp {
public:
  void add(double x) {
    if (x == neg_inf) return;
    if (x <= max_) {
      sum_ += std::exp(x - max_);
    } else {
      sum_ = sum_ * std::exp(max_ - x) + 1.0;
      max_ = x;
    }
  }
  double value() const { return max_ == neg_inf ? neg_inf : max_ + std::log(sum_); }
  double max() const noexcept { return max_; }

private:
  double max_ = neg_inf;
  double sum_ = 0.0;
};

/// (sum w)^2 / sum w^2 from log-weights; 0 when no weight is positive.
inline double effective_sample_size(std::span<const double> log_weights) {
  LogSumExp s1, s2;
  for (double l : log_weights) {
    s1.add(l);
    s2.add(2.0 * l);
  }
  if (s1.value() == neg_inf) return 0.0;
  return std::exp(2.0 * s1.value() - s2.value());
}

struct EstimateResult {
  LogProb log_estimate;
  double standard_error_log = std::numeric_limits<double>::infinity();
  std::size_t n_samples = 0;
  std::size_t n_truncated = 0;
  double ess = 0.0;
  bool all_zero = false;  // every sampled trace gave zero data likelihood
};

struct EstimatorOptions {
  AttackSchedule schedule;
  std::optional<double> epsilon_rate;
  std::size_t workers = 1;
  LikelihoodForm form = LikelihoodForm::count;
};

/// Monte Carlo estimate of ln P(D | entry compromised at 0): the data
/// likelihood averaged over compromise traces drawn from the attacker prior.
/// Sample i always uses the stream derive_seed(seed, "trace", i), so results
/// do not depend on the worker count and a run with n samples is a prefix of
/// a run with more.
inline EstimateResult estimate_attack_log_likelihood(const NetworkModel& model, const Dataset& data,
                                                     NodeId entry, const ObservationWindow& window,
                                                     std::size_t n_samples, RngSeed seed,
                                                     const EstimatorOptions& options = {}) {
  if (n_samples == 0) throw std::invalid_argument("n_samples must be at least 1");
  const AugmentedModel aug =
      augment_network(model, entry, window, options.schedule, options.epsilon_rate);
  const LikelihoodContext ctx(model, data, window, options.schedule, options.form);

  std::vector<double> log_w(n_samples);
  std::vector<char> truncated(n_samples);
  const std::size_t workers = std::max<std::size_t>(options.workers, 1);
  const std::size_t chunk = (n_samples + workers - 1) / workers;
  parallel_for(workers, workers, [&](std::size_t w) {
    TraceSampler sampler(aug, window);
    std::vector<NodeId> order;
    std::vector<double> times;
    for (std::size_t i = w * chunk; i < std::min(n_samples, (w + 1) * chunk); ++i) {
      SplitMix64 rng(derive_seed(seed, "trace", i));
      truncated[i] = sampler.sample(rng, order, times);
      log_w[i] = ctx.evaluate(order, times).value;
    }
  });

  EstimateResult r;
  r.n_samples = n_samples;
  r.n_truncated = static_cast<std::size_t>(std::count(truncated.begin(), truncated.end(), 1));
  r.log_estimate.off_model_events = ctx.baseline().off_model_events;

  LogSumExp lse;
  for (double l : log_w) lse.add(l);
  const double m = lse.max();
  if (m == neg_inf) {
    r.log_estimate.value = neg_inf;
    r.all_zero = true;
    return r;
  }
  double s1 = 0.0, s2 = 0.0;
  std::size_t finite = 0;
  for (double l : log_w) {
    if (l == neg_inf) continue;
    const double w = std::exp(l - m);
    s1 += w;
    s2 += w * w;
    ++finite;
  }
  const double n = static_cast<double>(n_samples);
  r.log_estimate.value = m + (std::log(s1) - std::log(n));
  r.ess = s1 * s1 / s2;
  if (finite >= 2) {
    const double mean = s1 / n;
    const double var = std::max(0.0, (s2 / n - mean * mean) * n / (n - 1.0));
    r.standard_error_log = std::sqrt(var / n) / mean;
  }
  return r;
}

}  // namespace latmove
