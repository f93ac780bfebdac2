#include <algorithm>
#include <cmath>

#include <gtest/gtest.h>

#include "latmove/estimator.hpp"
#include "latmove/simulator.hpp"
#include "latmove/topology.hpp"
#include "../support/oracles.hpp"

using namespace latmove;

TEST(Augment, AddsOnlyMissingEntryEdges) {
  NetworkModel full;
  auto a = full.add_node("a"), b = full.add_node("b"), c = full.add_node("c");
  full.set_edge(a, b, {1.0, 0.1});
  full.set_edge(a, c, {1.0, 0.1});
  ObservationWindow w(10.0);
  EXPECT_TRUE(augment_network(full, a, w).added.empty());

  auto chain = oracle::chain(3, 1.0, 0.1);
  auto aug = augment_network(chain, NodeId{0}, w);
  ASSERT_EQ(aug.added.size(), 1u);
  EXPECT_EQ(aug.added[0], NodeId{2});
  EXPECT_EQ(aug.base, chain);

  // An entry edge that carries no malicious rate does not count as reaching v.
  full.set_edge(a, c, {1.0, 0.0});
  aug = augment_network(full, a, w);
  ASSERT_EQ(aug.added.size(), 1u);
  EXPECT_EQ(aug.added[0], c);

  EXPECT_THROW(augment_network(chain, NodeId{7}, w), std::invalid_argument);
  EXPECT_THROW(augment_network(chain, NodeId{0}, w, {}, 0.0), std::invalid_argument);
}

TEST(Augment, EpsilonRateBound) {
  auto m = with_uniform_increment(star_topology(4), 0.03);
  ASSERT_EQ(m.node_count(), 6u);
  ObservationWindow w(1500.0);
  const double eps = augment_network(m, m.require_node("A"), w).epsilon_rate;
  EXPECT_GT(eps, 0.0);
  EXPECT_LE(eps, std::min(1e-6 / (1500.0 * 36.0), 1e-6 * 0.03));
}

TEST(SampleTrace, DeterministicAndValid) {
  auto m = with_uniform_increment(caterpillar_topology(3, 2), 0.3);
  ObservationWindow w(10.0);
  auto aug = augment_network(m, m.require_node("C2"), w);
  for (std::uint64_t s = 0; s < 50; ++s) {
    auto a = sample_trace(aug, w, RngSeed{s});
    EXPECT_EQ(a.trace, sample_trace(aug, w, RngSeed{s}).trace);
    EXPECT_EQ(a.trace.check(w), "");
    EXPECT_EQ(a.trace.node(0), m.require_node("C2"));
    EXPECT_EQ(a.truncated, a.trace.size() < m.node_count());
  }
}

TEST(SampleTrace, SingleNodeNetwork) {
  NetworkModel one;
  auto v = one.add_node("only");
  ObservationWindow w(5.0);
  auto s = sample_trace(augment_network(one, v, w), w, RngSeed{1});
  ASSERT_EQ(s.trace.size(), 1u);
  EXPECT_FALSE(s.truncated);
}

TEST(SampleTrace, TwoNodeTimesAreTruncatedExponential) {
  const double d = 0.4, T = 3.0;
  auto m = oracle::chain(2, 1.0, d);
  ObservationWindow w(T);
  auto aug = augment_network(m, NodeId{0}, w);
  const int n = 100000;
  std::vector<double> times;
  int survived = 0;
  for (int i = 0; i < n; ++i) {
    auto s = sample_trace(aug, w, derive_seed(RngSeed{3}, "ks", i));
    if (s.trace.size() == 2)
      times.push_back(s.trace.time(1));
    else
      ++survived;
  }
  // Survival mass e^{-dT}.
  const double p_star = std::exp(-d * T);
  EXPECT_NEAR(static_cast<double>(survived) / n, p_star, 4.0 * std::sqrt(p_star * (1 - p_star) / n));
  // KS against Exp(d) conditioned on <= T.
  std::sort(times.begin(), times.end());
  const double m_n = static_cast<double>(times.size());
  double ks = 0.0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    const double F = (1.0 - std::exp(-d * times[i])) / (1.0 - p_star);
    ks = std::max({ks, std::abs(F - i / m_n), std::abs(F - (i + 1) / m_n)});
  }
  EXPECT_LT(ks, 1.628 / std::sqrt(m_n));
}

TEST(LogSumExp, StreamingMatchesDirect) {
  LogSumExp l;
  EXPECT_EQ(l.value(), neg_inf);
  for (double x : {-1000.0, -1001.0, neg_inf, -999.5}) l.add(x);
  const double direct =
      -999.5 + std::log(std::exp(-0.5) + std::exp(-1.5) + 1.0);
  EXPECT_NEAR(l.value(), direct, 1e-12);
}

TEST(Ess, Examples) {
  std::vector<double> w{0.0, 0.0, std::log(2.0)};
  EXPECT_NEAR(effective_sample_size(w), 16.0 / 6.0, 1e-12);
  std::vector<double> equal(7, -3.0);
  EXPECT_NEAR(effective_sample_size(equal), 7.0, 1e-12);
  std::vector<double> dominant{0.0, -800.0, -900.0, -700.0};
  EXPECT_NEAR(effective_sample_size(dominant), 1.0, 1e-12);
  std::vector<double> none{neg_inf, neg_inf};
  EXPECT_EQ(effective_sample_size(none), 0.0);
}

TEST(Estimator, SingleSampleIsThatSamplesLikelihood) {
  auto m = with_uniform_increment(star_topology(3), 0.2);
  ObservationWindow w(15.0);
  auto sim = simulate_attack(m, m.require_node("A"), w, RngSeed{2});
  const RngSeed seed{77};
  auto est = estimate_attack_log_likelihood(m, sim.dataset, m.require_node("A"), w, 1, seed);
  auto aug = augment_network(m, m.require_node("A"), w);
  auto tr = sample_trace(aug, w, derive_seed(seed, "trace", 0)).trace;
  EXPECT_EQ(est.log_estimate.value, conditional_data_log_likelihood(m, sim.dataset, tr, w).value);
  EXPECT_EQ(est.n_samples, 1u);
  EXPECT_EQ(est.standard_error_log, INFINITY);
}

TEST(Estimator, SingleNodeNetworkIsExact) {
  NetworkModel one;
  auto v = one.add_node("only");
  ObservationWindow w(5.0);
  auto exact = conditional_data_log_likelihood(one, {}, CompromiseTrace::starting_at(v), w).value;
  for (std::size_t n : {1u, 5u, 100u})
    EXPECT_EQ(estimate_attack_log_likelihood(one, {}, v, w, n, RngSeed{n}).log_estimate.value, exact);
}

TEST(Estimator, IndependentOfWorkerCount) {
  auto m = with_uniform_increment(caterpillar_topology(3, 2), 0.5);
  ObservationWindow w(10.0);
  auto sim = simulate_attack(m, m.require_node("C1"), w, RngSeed{8});
  EstimatorOptions one, four;
  four.workers = 4;
  auto a = estimate_attack_log_likelihood(m, sim.dataset, m.require_node("C1"), w, 999, RngSeed{1}, one);
  auto b = estimate_attack_log_likelihood(m, sim.dataset, m.require_node("C1"), w, 999, RngSeed{1}, four);
  EXPECT_EQ(a.log_estimate.value, b.log_estimate.value);
  EXPECT_EQ(a.ess, b.ess);
  EXPECT_EQ(a.n_truncated, b.n_truncated);
  EXPECT_GT(a.ess, 1.0);
  EXPECT_TRUE(std::isfinite(a.standard_error_log));
}

TEST(Estimator, AllZeroWeights) {
  auto m = oracle::chain(2, 1.0, 0.5);
  Dataset d;
  d.add(0.5, NodeId{1}, NodeId{0});  // no such edge
  auto est = estimate_attack_log_likelihood(m, d, NodeId{0}, ObservationWindow(2.0), 10, RngSeed{1});
  EXPECT_EQ(est.log_estimate.value, neg_inf);
  EXPECT_TRUE(est.all_zero);
  EXPECT_TRUE(est.log_estimate.off_model_events);
  EXPECT_EQ(est.ess, 0.0);
  EXPECT_THROW(estimate_attack_log_likelihood(m, d, NodeId{0}, ObservationWindow(2.0), 0, RngSeed{1}),
               std::invalid_argument);
}

TEST(Estimator, ConvergesToQuadratureOracle) {
  auto m = oracle::chain(2, 1.0, 0.3, true);
  const double T = 4.0;
  ObservationWindow w(T);
  auto sim = simulate_attack(m, NodeId{0}, w, RngSeed{21});
  for (auto form : {LikelihoodForm::count, LikelihoodForm::event_time}) {
    EstimatorOptions o;
    o.form = form;
    auto est = estimate_attack_log_likelihood(m, sim.dataset, NodeId{0}, w, 20000, RngSeed{4}, o);
    const double truth =
        std::log(oracle::two_node_marginal(m, sim.dataset, T, form == LikelihoodForm::event_time));
    EXPECT_NEAR(est.log_estimate.value, truth, std::max(0.02, 5.0 * est.standard_error_log));
  }
}
