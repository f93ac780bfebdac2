#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <vector>

#include <json.hpp>

#include "latmove/dataset.hpp"
#include "latmove/rng.hpp"

namespace latmove {

enum class Orientation { lower_is_positive, higher_is_positive };

struct LabeledScores {
  std::vector<double> attack;  // positives
  std::vector<double> benign;  // negatives
  Orientation orientation = Orientation::lower_is_positive;
};

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
  bool operator==(const RocPoint&) const = default;
};

struct RocCurve {
  std::vector<RocPoint> points;  // from (0,0) to (1,1), both coordinates non-decreasing
  double auc = 0.0;

  /// Highest TPR reached at the given FPR, interpolating linearly along
  /// the curve between thresholds.
  double tpr_at(double fpr) const {
    double best = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
      const RocPoint& p = points[i];
      if (p.fpr <= fpr) {
        best = std::max(best, p.tpr);
        continue;
      }
      const RocPoint& q = points[i - 1];
      const double w = (fpr - q.fpr) / (p.fpr - q.fpr);
      return std::max(best, q.tpr + w * (p.tpr - q.tpr));
    }
    return best;
  }
};

/// Trapezoidal area under the curve.
inline double auc(const RocCurve& curve) {
  double area = 0.0;
  for (std::size_t i = 1; i < curve.points.size(); ++i) {
    const auto& a = curve.points[i - 1];
    const auto& b = curve.points[i];
    area += (b.fpr - a.fpr) * (a.tpr + b.tpr) * 0.5;
  }
  return area;
}

/// Sweeps a threshold over every distinct score; a realization is flagged
/// positive when its score is at or beyond the threshold in the positive
/// direction. Equal scores cross the threshold together.
inline RocCurve roc_curve(const LabeledScores& scores) {
  if (scores.attack.empty() || scores.benign.empty())
    throw std::invalid_argument("roc_curve needs non-empty attack and benign scores");
  const double sign = scores.orientation == Orientation::lower_is_positive ? 1.0 : -1.0;
  auto keyed = [&](const std::vector<double>& v) {
    std::vector<double> k(v.size());
    std::transform(v.begin(), v.end(), k.begin(), [&](double x) { return sign * x; });
    std::sort(k.begin(), k.end());
    return k;
  };
  const auto pos = keyed(scores.attack);
  const auto neg = keyed(scores.benign);
  const double np = static_cast<double>(pos.size()), nn = static_cast<double>(neg.size());

  RocCurve curve;
  curve.points.push_back({0.0, 0.0});
  std::size_t i = 0, j = 0;
  while (i < pos.size() || j < neg.size()) {
    double t;
    if (j == neg.size() || (i < pos.size() && pos[i] <= neg[j]))
      t = pos[i];
    else
      t = neg[j];
    while (i < pos.size() && pos[i] == t) ++i;
    while (j < neg.size() && neg[j] == t) ++j;
    curve.points.push_back({static_cast<double>(j) / nn, static_cast<double>(i) / np});
  }
  curve.auc = auc(curve);
  return curve;
}

inline void write_roc_csv(std::ostream& os, const RocCurve& curve) {
  os << "fpr,tpr\n";
  for (const auto& p : curve.points)
    os << detail::format_double(p.fpr) << ',' << detail::format_double(p.tpr) << '\n';
}

// ---------------------------------------------------------------------------
// Paired comparison of the two detectors

inline constexpr std::size_t fpr_grid_size = 101;  // 0.00, 0.01, ..., 1.00

inline double fpr_grid(std::size_t i) { return static_cast<double>(i) / 100.0; }

struct DominanceReport {
  double auc_lr = 0.0;
  double auc_anomaly = 0.0;
  double auc_diff = 0.0;  // auc_lr - auc_anomaly
  double ci_low = 0.0;    // 95% paired-bootstrap percentile interval
  double ci_high = 0.0;
  double auc_diff_se = 0.0;
  double max_tpr_deficit = 0.0;  // max over the grid of TPR_anomaly - TPR_lr
  std::vector<double> tpr_diff;     // TPR_lr - TPR_anomaly per grid point
  std::vector<double> tpr_diff_se;  // bootstrap standard error per grid point
  std::size_t n_boot = 0;

  /// LR is never worse than anomaly by more than two bootstrap SE.
  bool no_worse_everywhere() const {
    for (std::size_t i = 0; i < tpr_diff.size(); ++i)
      if (-tpr_diff[i] > 2.0 * tpr_diff_se[i]) return false;
    return true;
  }

  /// LR beats anomaly by more than two bootstrap SE at every grid FPR < 0.05.
  bool dominance_low_fpr() const {
    for (std::size_t i = 0; i < tpr_diff.size() && fpr_grid(i) < 0.05 - 1e-12; ++i)
      if (!(tpr_diff[i] > 2.0 * tpr_diff_se[i])) return false;
    return true;
  }
};

namespace detail {

inline double quantile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

inline double stddev(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

}  // namespace detail

/// Compares LR and anomaly scores computed on the same realizations. The
/// bootstrap resamples realizations (attack and benign separately) and
/// applies the same resample to both detectors. With fewer than two
/// replicates the interval collapses to the point estimate.
inline DominanceReport dominance_report(const LabeledScores& lr, const LabeledScores& anomaly,
                                        std::size_t n_boot, RngSeed seed) {
  if (lr.attack.size() != anomaly.attack.size() || lr.benign.size() != anomaly.benign.size())
    throw std::invalid_argument("dominance_report needs scores from the same realizations");

  auto grid_tpr = [](const RocCurve& c) {
    std::vector<double> out(fpr_grid_size);
    for (std::size_t i = 0; i < fpr_grid_size; ++i) out[i] = c.tpr_at(fpr_grid(i));
    return out;
  };

  DominanceReport r;
  r.n_boot = n_boot;
  const RocCurve c_lr = roc_curve(lr), c_an = roc_curve(anomaly);
  r.auc_lr = c_lr.auc;
  r.auc_anomaly = c_an.auc;
  r.auc_diff = r.auc_lr - r.auc_anomaly;
  const auto t_lr = grid_tpr(c_lr), t_an = grid_tpr(c_an);
  r.tpr_diff.resize(fpr_grid_size);
  r.max_tpr_deficit = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < fpr_grid_size; ++i) {
    r.tpr_diff[i] = t_lr[i] - t_an[i];
    r.max_tpr_deficit = std::max(r.max_tpr_deficit, -r.tpr_diff[i]);
  }
  r.tpr_diff_se.assign(fpr_grid_size, 0.0);
  r.ci_low = r.ci_high = r.auc_diff;
  if (n_boot < 2) return r;

  SplitMix64 rng(seed);
  auto draw = [&](std::size_t n) {
    std::vector<std::size_t> idx(n);
    for (auto& k : idx) k = static_cast<std::size_t>(rng.uniform() * static_cast<double>(n));
    return idx;
  };
  auto pick = [](const LabeledScores& s, const std::vector<std::size_t>& ia,
                 const std::vector<std::size_t>& ib) {
    LabeledScores o{{}, {}, s.orientation};
    o.attack.reserve(ia.size());
    o.benign.reserve(ib.size());
    for (auto k : ia) o.attack.push_back(s.attack[k]);
    for (auto k : ib) o.benign.push_back(s.benign[k]);
    return o;
  };

  std::vector<double> diffs(n_boot);
  std::vector<std::vector<double>> grid(fpr_grid_size, std::vector<double>(n_boot));
  for (std::size_t b = 0; b < n_boot; ++b) {
    const auto ia = draw(lr.attack.size());
    const auto ib = draw(lr.benign.size());
    const RocCurve bl = roc_curve(pick(lr, ia, ib)), ba = roc_curve(pick(anomaly, ia, ib));
    diffs[b] = bl.auc - ba.auc;
    const auto gl = grid_tpr(bl), ga = grid_tpr(ba);
    for (std::size_t i = 0; i < fpr_grid_size; ++i) grid[i][b] = gl[i] - ga[i];
  }
  r.ci_low = detail::quantile(diffs, 0.025);
  r.ci_high = detail::quantile(diffs, 0.975);
  r.auc_diff_se = detail::stddev(diffs);
  for (std::size_t i = 0; i < fpr_grid_size; ++i) r.tpr_diff_se[i] = detail::stddev(grid[i]);
  return r;
}

inline nlohmann::json to_json(const DominanceReport& r) {
  return {{"auc_lr", r.auc_lr},
          {"auc_anomaly", r.auc_anomaly},
          {"auc_diff", r.auc_diff},
          {"ci_low", r.ci_low},
          {"ci_high", r.ci_high},
          {"max_tpr_deficit", r.max_tpr_deficit},
          {"auc_diff_se", r.auc_diff_se},
          {"n_boot", r.n_boot},
          {"tpr_diff", r.tpr_diff},
          {"tpr_diff_se", r.tpr_diff_se},
          {"no_worse_everywhere", r.no_worse_everywhere()},
          {"dominance_low_fpr", r.dominance_low_fpr()}};
}

}  // namespace latmove
