#include <cmath>

#include <gtest/gtest.h>

#include "latmove/detector.hpp"
#include "latmove/simulator.hpp"
#include "latmove/topology.hpp"
#include "../support/oracles.hpp"

using namespace latmove;

namespace {

DetectorConfig config(NetworkModel m, NodeId entry, std::size_t n, RngSeed seed) {
  DetectorConfig c;
  c.detector_model = std::move(m);
  c.entry = entry;
  c.n_samples = n;
  c.seed = seed;
  return c;
}

}  // namespace

TEST(Detector, ZeroIncrementGivesZeroLogLr) {
  auto gen = with_uniform_increment(star_topology(4), 0.5);
  auto det = star_topology(4);
  ObservationWindow w(10.0);
  for (std::uint64_t s = 0; s < 10; ++s) {
    auto sim = simulate_attack(gen, gen.require_node("A"), w, RngSeed{s});
    for (auto form : {LikelihoodForm::count, LikelihoodForm::event_time}) {
      auto cfg = config(det, det.require_node("A"), 50, RngSeed{s});
      cfg.form = form;
      auto sc = score(cfg, sim.dataset, w);
      EXPECT_EQ(sc.log_lr, 0.0);
      EXPECT_FALSE(sc.degenerate);
    }
  }
}

TEST(Detector, StrongAttackGivesNegativeLogLr) {
  auto m = oracle::chain(2, 1.0, 3.0);
  ObservationWindow w(5.0);
  Dataset d;
  for (int i = 0; i < 20; ++i) d.add(0.1 + 0.24 * i, NodeId{0}, NodeId{1});
  auto cfg = config(m, NodeId{0}, 200, RngSeed{1});
  auto sc = score(cfg, d, w);
  EXPECT_LT(sc.log_lr, 0.0);
  EXPECT_NEAR(sc.attack_ll.value, std::log(oracle::two_node_marginal(m, d, 5.0, true)), 1e-9);
  EXPECT_EQ(sc.log_lr, sc.baseline_ll.value - sc.attack_ll.value);
}

TEST(Detector, BenignScoresAboveAttackScoresOnAverage) {
  auto m = with_uniform_increment(star_topology(4), 0.3);
  ObservationWindow w(20.0);
  auto cfg = config(m, m.require_node("A"), 200, RngSeed{0});
  double benign = 0.0, attack = 0.0;
  const int n = 200;
  for (int i = 0; i < n; ++i) {
    cfg.seed = derive_seed(RngSeed{5}, "est", i);
    benign += score(cfg, simulate_benign(m, w, derive_seed(RngSeed{5}, "b", i)).dataset, w).log_lr;
    attack += score(cfg,
                    simulate_attack(m, m.require_node("A"), w, derive_seed(RngSeed{5}, "a", i)).dataset,
                    w)
                  .log_lr;
  }
  EXPECT_GT(benign / n, attack / n);
}

TEST(Detector, DegenerateScoresAreFlagged) {
  auto m = oracle::chain(2, 1.0, 0.5);
  Dataset d;
  d.add(0.5, NodeId{1}, NodeId{0});
  auto cfg = config(m, NodeId{0}, 10, RngSeed{1});
  auto sc = score(cfg, d, ObservationWindow(1.0));
  EXPECT_TRUE(sc.degenerate);
  EXPECT_EQ(sc.log_lr, 0.0);
  cfg.entry = NodeId{5};
  EXPECT_THROW(score(cfg, d, ObservationWindow(1.0)), std::invalid_argument);
}

TEST(Misspecification, NoneAndZeroNoiseAreIdentity) {
  auto m = with_uniform_increment(caterpillar_topology(3, 2), 0.25);
  EXPECT_EQ(apply_misspecification(m, NoMisspecification{}, RngSeed{1}), m);
  EXPECT_EQ(apply_misspecification(m, GaussianNoise{0.0}, RngSeed{1}), m);
}

TEST(Misspecification, NoiseIsSeededAndNonNegative) {
  auto m = with_uniform_increment(caterpillar_topology(4, 2), 0.25);
  auto a = apply_misspecification(m, GaussianNoise{0.3}, RngSeed{3});
  EXPECT_EQ(a, apply_misspecification(m, GaussianNoise{0.3}, RngSeed{3}));
  EXPECT_NE(a, apply_misspecification(m, GaussianNoise{0.3}, RngSeed{4}));
  EXPECT_NE(a, m);
  double mean = 0.0;
  for (std::size_t i = 0; i < a.edge_count(); ++i) {
    EXPECT_GE(a.edges()[i].params.malicious_increment, 0.0);
    EXPECT_EQ(a.edges()[i].params.benign_rate, m.edges()[i].params.benign_rate);
    mean += a.edges()[i].params.malicious_increment / 0.25;
  }
  EXPECT_NEAR(mean / a.edge_count(), 1.0, 0.3);
  EXPECT_TRUE(validate_model(apply_misspecification(m, GaussianNoise{5.0}, RngSeed{1})).ok());
}

TEST(Misspecification, PathRestrictAndBroaden) {
  auto m = with_uniform_increment(caterpillar_topology(4, 2), 0.25);
  auto center = caterpillar_center_edges(4);
  auto r = apply_misspecification(m, PathRestrict{center}, RngSeed{0});
  for (const auto& e : r.edges()) {
    const bool on = std::find(center.begin(), center.end(),
                              std::pair{r.label(e.src), r.label(e.dst)}) != center.end();
    EXPECT_EQ(e.params.malicious_increment, on ? 0.25 : 0.0);
  }
  auto g = goal_paths_topology(3, 2);
  auto b = apply_misspecification(g, PathBroaden{goal_path_edges(1, 2), 0.5}, RngSeed{0});
  int n = 0;
  for (const auto& e : b.edges()) n += e.params.malicious_increment == 0.5;
  EXPECT_EQ(n, 3);
}

TEST(Misspecification, JsonRoundTrip) {
  std::vector<MisspecificationTransform> all{
      NoMisspecification{}, GaussianNoise{0.2}, PathRestrict{{{"C1", "C2"}}},
      PathBroaden{{{"A", "P1_1"}, {"P1_1", "P1_2"}}, 0.5}};
  for (const auto& t : all) EXPECT_EQ(transform_from_json(to_json(t)), t);
  EXPECT_THROW(transform_from_json({{"kind", "bogus"}}), std::invalid_argument);
  EXPECT_EQ(likelihood_form_from_string(to_string(LikelihoodForm::count)), LikelihoodForm::count);
  EXPECT_EQ(likelihood_form_from_string("event_time"), LikelihoodForm::event_time);
  EXPECT_THROW(likelihood_form_from_string("exact"), std::invalid_argument);
}
