#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

#include "latmove/dataset.hpp"
#include "latmove/model.hpp"
#include "latmove/schedule.hpp"
#include "latmove/trace.hpp"

namespace latmove {

inline constexpr double neg_inf = -std::numeric_limits<double>::infinity();

/// Natural-log probability (or density) with structured diagnostics.
/// The value is finite or -inf, never NaN or +inf.
struct LogProb {
  double value = 0.0;
  bool off_model_events = false;  // data on a pair that is not an edge of the model
  bool unreachable_step = false;  // trace compromises a node with zero inflow rate

  bool finite() const noexcept { return std::isfinite(value); }
};

/// ln k!
inline double log_factorial(std::size_t k) {
  static const auto table = [] {
    std::array<double, 2048> t{};
    for (std::size_t i = 1; i < t.size(); ++i) t[i] = t[i - 1] + std::log(static_cast<double>(i));
    return t;
  }();
  if (k < table.size()) return table[k];
  return boost::math::lgamma(static_cast<double>(k) + 1.0);
}

/// ln Poisson(k; mean). Mean 0 puts all mass on k = 0.
inline double log_poisson(std::size_t k, double mean) {
  if (mean <= 0.0) return k == 0 ? 0.0 : neg_inf;
  if (k == 0) return -mean;
  return static_cast<double>(k) * std::log(mean) - mean - log_factorial(k);
}

/// How a compromised source's edge is scored.
///
/// count: Poisson pmf of the pre- and post-compromise message counts,
///   Poisson(pre; z*benign) * Poisson(post; (T-z)*(benign+increment)).
/// event_time: the Poisson-process density of the observed message times
///   with the rate switching at z, scaled by the same T^n/n! factor that turns
///   the uncompromised density into Poisson(n; T*benign).
///
/// Both agree for uncompromised sources and for sources compromised at 0,
/// so baselines and single-node traces are identical. They differ by the
/// z-dependent factor z^pre (T-z)^post n! / (pre! post! T^n), which the count
/// form introduces because the statistic it scores changes with z.
enum class LikelihoodForm { count, event_time };

inline double split_count_term(std::size_t n, std::size_t pre, double z, double horizon,
                               double benign, double inc) {
  return log_poisson(pre, z * benign) + log_poisson(n - pre, (horizon - z) * (benign + inc));
}

inline double split_event_term(std::size_t n, std::size_t pre, double z, double horizon,
                               double benign, double inc) {
  const std::size_t post = n - pre;
  const double compromised = benign + inc;
  double v = -z * benign - (horizon - z) * compromised - log_factorial(n);
  if (pre > 0) v += static_cast<double>(pre) * std::log(benign);
  if (post > 0) v += static_cast<double>(post) * std::log(compromised);
  if (n > 0) v += static_cast<double>(n) * std::log(horizon);
  return v;
}

/// Precomputed per-edge data for repeated evaluation of ln P(D | z) against
/// one (model, dataset, window). Evaluation costs O(out-degree of the
/// compromised nodes), starting from the all-star baseline.
///
/// An uncompromised source's edge contributes Poisson(total; T * benign); a
/// compromised source's edge is scored per LikelihoodForm. Edges whose
/// effective increment is zero keep the uncompromised term: the rate does
/// not change at compromise, so the edge carries no information
/// about z and cancels between the attack and no-attack hypotheses.
///
/// The model and dataset must outlive the context.
class LikelihoodContext {
public:
  LikelihoodContext(const NetworkModel& model, const Dataset& data, const ObservationWindow& window,
                    AttackSchedule schedule = {}, LikelihoodForm form = LikelihoodForm::count)
      : model_(&model), schedule_(std::move(schedule)), horizon_(window.horizon()), form_(form) {
    const auto edges = model.edges();
    times_.reserve(edges.size());
    baseline_terms_.reserve(edges.size());
    double total = 0.0;
    for (const Edge& e : edges) {
      auto t = data.times(e.src, e.dst);
      times_.push_back(t);
      const double term = log_poisson(t.size(), horizon_ * e.params.benign_rate);
      baseline_terms_.push_back(term);
      total += term;
    }
    for (const auto& [pair, t] : data.pairs()) {
      if (!model.find_edge(pair.first, pair.second)) {
        off_model_ = true;
        break;
      }
    }
    baseline_ = off_model_ ? neg_inf : total;
  }

  LogProb baseline() const noexcept { return {baseline_, off_model_, false}; }

  /// ln P(D | z) for the compromise trace (empty trace = all star).
  LogProb evaluate(const CompromiseTrace& trace) const {
    return evaluate(trace.order(), trace.times());
  }

  LogProb evaluate(std::span<const NodeId> order, std::span<const double> times) const {
    if (off_model_) return baseline();
    double sum = baseline_;
    for (std::size_t i = 0; i < order.size(); ++i) sum += node_delta(order[i], i + 1, times[i]);
    return {sum, false, false};
  }

  /// Change to the log-likelihood when node v, compromised k-th, switches
  /// regime at time z.
  double node_delta(NodeId v, std::size_t k, double z) const {
    const auto edges = model_->edges();
    auto out = model_->out_edges(v);
    if (out.empty()) return 0.0;
    const std::size_t first = static_cast<std::size_t>(out.data() - edges.data());
    double delta = 0.0;
    for (std::size_t j = 0; j < out.size(); ++j) {
      const Edge& e = out[j];
      const double inc = schedule_.increment(e, k);
      if (!(inc > 0.0)) continue;
      const auto t = times_[first + j];
      const auto pre = static_cast<std::size_t>(std::lower_bound(t.begin(), t.end(), z) - t.begin());
      const double split = form_ == LikelihoodForm::count
                               ? split_count_term(t.size(), pre, z, horizon_, e.params.benign_rate, inc)
                               : split_event_term(t.size(), pre, z, horizon_, e.params.benign_rate, inc);
      delta += split - baseline_terms_[first + j];
    }
    return delta;
  }

  const NetworkModel& model() const noexcept { return *model_; }
  const AttackSchedule& schedule() const noexcept { return schedule_; }
  double horizon() const noexcept { return horizon_; }

private:
  const NetworkModel* model_;
  AttackSchedule schedule_;
  double horizon_;
  LikelihoodForm form_;
  std::vector<std::span<const double>> times_;
  std::vector<double> baseline_terms_;
  double baseline_ = 0.0;
  bool off_model_ = false;
};

/// ln P(D | z) for a compromise trace; nodes outside the trace are star.
inline LogProb conditional_data_log_likelihood(const NetworkModel& model, const Dataset& data,
                                               const CompromiseTrace& trace,
                                               const ObservationWindow& window,
                                               const AttackSchedule& schedule = {},
                                               LikelihoodForm form = LikelihoodForm::count) {
  return LikelihoodContext(model, data, window, schedule, form).evaluate(trace);
}

/// ln P(D | all star): the anomaly detector's statistic.
inline LogProb baseline_log_likelihood(const NetworkModel& model, const Dataset& data,
                                       const ObservationWindow& window) {
  return LikelihoodContext(model, data, window).baseline();
}

// ---------------------------------------------------------------------------
// Trace density

struct FrontierRates {
  double lambda_prime = 0.0;  // malicious rate from the prefix to all nodes outside it
  double delta_prime = 0.0;   // malicious rate into the last prefix node from the ones before it
};

/// Frontier rates after the nodes in `prefix` have been compromised in order.
inline FrontierRates frontier_rates(const NetworkModel& model, std::span<const NodeId> prefix,
                                    const AttackSchedule& schedule = {}) {
  std::vector<char> in_prefix(model.node_count(), 0);
  for (NodeId v : prefix) in_prefix.at(v.index) = 1;
  FrontierRates r;
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    for (const Edge& e : model.out_edges(prefix[i])) {
      const double inc = schedule.increment(e, i + 1);
      if (!in_prefix[e.dst.index]) r.lambda_prime += inc;
      if (i + 1 < prefix.size() && e.dst == prefix.back()) r.delta_prime += inc;
    }
  }
  return r;
}

/// ln P(z, s | z_1 = 0, s_1 = entry): the law of the attacker's compromise
/// trace inside [0, T], including the survival factor for nodes never
/// reached before T.
inline LogProb trace_log_density(const NetworkModel& model, const CompromiseTrace& trace,
                                 const ObservationWindow& window,
                                 const AttackSchedule& schedule = {}) {
  if (trace.empty()) throw std::invalid_argument("trace must start at the entry node");
  if (auto why = trace.check(window); !why.empty()) throw std::invalid_argument(why);
  const auto order = trace.order();
  const auto times = trace.times();
  double sum = 0.0;
  for (std::size_t j = 0; j + 1 < order.size(); ++j) {
    const double lambda = frontier_rates(model, order.first(j + 1), schedule).lambda_prime;
    const double inflow = frontier_rates(model, order.first(j + 2), schedule).delta_prime;
    if (!(inflow > 0.0)) return {neg_inf, false, true};
    sum += std::log(inflow) - lambda * (times[j + 1] - times[j]);
  }
  const double survivors = frontier_rates(model, order, schedule).lambda_prime;
  sum -= survivors * (window.horizon() - times.back());
  return {sum, false, false};
}

}  // namespace latmove
