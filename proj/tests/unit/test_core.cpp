#include <sstream>

#include <gtest/gtest.h>

#include "latmove/dataset.hpp"
#include "latmove/model.hpp"
#include "latmove/rng.hpp"
#include "latmove/schedule.hpp"
#include "latmove/topology.hpp"
#include "latmove/trace.hpp"

using namespace latmove;

namespace {

NetworkModel two_nodes(double benign = 1.0, double inc = 0.0) {
  NetworkModel m;
  m.add_node("a");
  m.add_node("b");
  m.set_edge("a", "b", {benign, inc});
  return m;
}

}  // namespace

TEST(Model, EdgesSortedAndReplaced) {
  NetworkModel m;
  auto a = m.add_node("a"), b = m.add_node("b"), c = m.add_node("c");
  m.set_edge(c, a, {1.0, 0.0});
  m.set_edge(a, c, {2.0, 0.0});
  m.set_edge(a, b, {3.0, 0.0});
  m.set_edge(a, c, {4.0, 0.5});
  ASSERT_EQ(m.edge_count(), 3u);
  EXPECT_EQ(m.out_edges(a).size(), 2u);
  EXPECT_EQ(m.out_edges(b).size(), 0u);
  EXPECT_EQ(m.out_edges(c).size(), 1u);
  EXPECT_EQ(m.find_edge(a, c)->params, (EdgeParams{4.0, 0.5}));
  EXPECT_DOUBLE_EQ(m.find_edge(a, c)->params.compromised_rate(), 4.5);
  EXPECT_EQ(m.find_edge(b, a), nullptr);
  EXPECT_THROW(m.add_node("a"), std::invalid_argument);
  EXPECT_THROW(m.require_node("zz"), std::invalid_argument);
}

TEST(Model, ValidateCatchesBadEdges) {
  EXPECT_TRUE(validate_model(two_nodes()).ok());

  auto zero = two_nodes(0.0);
  auto r = validate_model(zero);
  ASSERT_TRUE(r.has(ViolationKind::non_positive_rate));
  EXPECT_NE(r.violations[0].message.find("edge rate must be positive"), std::string::npos);

  NetworkModel self;
  auto a = self.add_node("a");
  self.set_edge(a, a, {1.0, 0.0});
  r = validate_model(self);
  ASSERT_TRUE(r.has(ViolationKind::self_edge));
  EXPECT_NE(r.violations[0].message.find("self-edge"), std::string::npos);

  EXPECT_TRUE(validate_model(two_nodes(1.0, -0.1)).has(ViolationKind::negative_increment));
  EXPECT_TRUE(validate_model(two_nodes(NAN)).has(ViolationKind::non_finite_rate));
}

TEST(Model, ObservationWindowRejectsBadHorizon) {
  EXPECT_THROW(ObservationWindow{0.0}, std::invalid_argument);
  EXPECT_THROW(ObservationWindow{-1.0}, std::invalid_argument);
  EXPECT_THROW(ObservationWindow{INFINITY}, std::invalid_argument);
  ObservationWindow w(2.0);
  EXPECT_TRUE(w.contains(0.0));
  EXPECT_TRUE(w.contains(2.0));
  EXPECT_FALSE(w.contains(2.5));
}

TEST(Model, JsonRoundTrip) {
  auto m = with_uniform_increment(caterpillar_topology(3, 2), 0.25);
  EXPECT_EQ(model_from_json(to_json(m)), m);
  EXPECT_EQ(model_from_json(nlohmann::json::parse(to_json(m).dump())), m);
}

TEST(Model, MinPositiveRate) {
  auto m = two_nodes(2.0, 0.03);
  EXPECT_DOUBLE_EQ(min_positive_rate(m), 0.03);
  EXPECT_EQ(min_positive_rate(NetworkModel{}), INFINITY);
}

TEST(Dataset, CountMessagesExamples) {
  auto m = two_nodes();
  auto a = m.require_node("a"), b = m.require_node("b");
  Dataset d;
  d.add(0.5, a, b);
  d.add(1.5, a, b);
  ObservationWindow w(2.0);
  EXPECT_EQ(count_messages(d, a, b, 1.0, w), (MessageCounts{1, 1}));
  EXPECT_EQ(count_messages(d, a, b, star, w), (MessageCounts{2, 0}));
  EXPECT_EQ(count_messages(Dataset{}, a, b, 0.7, w), (MessageCounts{0, 0}));
  EXPECT_EQ(count_messages(d, b, a, 1.0, w), (MessageCounts{0, 0}));
  // An event exactly at the split counts as post-compromise.
  EXPECT_EQ(count_messages(d, a, b, 1.5, w), (MessageCounts{1, 1}));
}

TEST(Dataset, KeepsTimeOrderAndCsvRoundTrip) {
  auto m = two_nodes();
  m.set_edge("b", "a", {1.0, 0.0});
  auto a = m.require_node("a"), b = m.require_node("b");
  Dataset d;
  d.add(1.25, a, b);
  d.add(0.1, b, a);
  d.add(0.7, a, b);
  d.add(1.0 / 3.0, a, b);
  ASSERT_EQ(d.size(), 4u);
  for (std::size_t i = 1; i < d.size(); ++i) EXPECT_LE(d.events()[i - 1].time, d.events()[i].time);
  auto t = d.times(a, b);
  EXPECT_TRUE(std::is_sorted(t.begin(), t.end()));

  std::stringstream ss;
  write_dataset_csv(ss, d, m);
  EXPECT_EQ(read_dataset_csv(ss, m), d);

  std::stringstream bad("time,src,dst\n0.5,a\n");
  EXPECT_THROW(read_dataset_csv(bad, m), std::runtime_error);
}

TEST(Trace, CheckAndCsv) {
  auto m = caterpillar_topology(2, 1);
  ObservationWindow w(5.0);
  auto t = CompromiseTrace::starting_at(m.require_node("C1"));
  t.push(m.require_node("C2"), 1.5);
  EXPECT_EQ(t.check(w), "");
  auto z = t.per_node_times(m.node_count());
  EXPECT_EQ(z[m.require_node("C2").index], 1.5);
  EXPECT_FALSE(z[m.require_node("C1_1").index].has_value());

  std::stringstream ss;
  write_trace_csv(ss, t, m);
  EXPECT_EQ(read_trace_csv(ss, m), t);

  auto late = t;
  late.push(m.require_node("C1_1"), 6.0);
  EXPECT_FALSE(late.check(w).empty());
  auto dup = t;
  dup.push(m.require_node("C1"), 2.0);
  EXPECT_FALSE(dup.check(w).empty());
  CompromiseTrace backwards;
  backwards.push(NodeId{0}, 0.0);
  backwards.push(NodeId{1}, 2.0);
  backwards.push(NodeId{2}, 1.0);
  EXPECT_FALSE(backwards.check(w).empty());
}

TEST(Topology, PresetSizes) {
  auto star = preset_topology("star", {4});
  EXPECT_EQ(star.node_count(), 6u);
  EXPECT_EQ(star.edge_count(), 1u + 2u * 4u);
  EXPECT_NE(star.find_edge(star.require_node("A"), star.require_node("H")), nullptr);
  EXPECT_NE(star.find_edge(star.require_node("U3"), star.require_node("H")), nullptr);
  for (const auto& e : star.edges()) EXPECT_EQ(e.params.benign_rate, 1.0);

  auto cat = preset_topology("caterpillar", {3, 2});
  EXPECT_EQ(cat.node_count(), 9u);
  EXPECT_EQ(cat.edge_count(), 2u * (2u + 6u));

  auto goal = preset_topology("goal_paths", {3, 2});
  EXPECT_EQ(goal.node_count(), 8u);
  EXPECT_EQ(goal.edge_count(), 3u * 3u);
  EXPECT_TRUE(validate_model(goal).ok());

  EXPECT_THROW(preset_topology("ring", {3}), std::invalid_argument);
  EXPECT_THROW(preset_topology("star", {3, 1}), std::invalid_argument);
  EXPECT_THROW(preset_topology("star", {0}), std::invalid_argument);
}

TEST(Topology, EdgeIncrementHelpers) {
  auto goal = with_edge_increments(goal_paths_topology(3, 2), goal_path_edges(2, 2), 0.5);
  int positive = 0;
  for (const auto& e : goal.edges()) positive += e.params.malicious_increment > 0.0;
  EXPECT_EQ(positive, 3);
  EXPECT_EQ(goal.find_edge(goal.require_node("P2_2"), goal.require_node("G"))->params.malicious_increment,
            0.5);
  EXPECT_THROW(with_edge_increments(goal, {{"A", "G"}}, 0.5), std::invalid_argument);
  EXPECT_EQ(caterpillar_center_edges(3).size(), 2u);
}

TEST(Schedule, FallbackAndTail) {
  Edge e{NodeId{0}, NodeId{1}, {2.0, 0.1}};
  AttackSchedule none;
  EXPECT_EQ(none.increment(e, 1), 0.1);
  EXPECT_EQ(none.increment(e, 7), 0.1);

  AttackSchedule slow_fast{{0.03, 0.06}, 0.0, false};
  EXPECT_EQ(slow_fast.increment(e, 1), 0.03);
  EXPECT_EQ(slow_fast.increment(e, 2), 0.06);
  EXPECT_EQ(slow_fast.increment(e, 5), 0.06);

  AttackSchedule escalate{{0.05}, 0.05, false};
  EXPECT_NEAR(escalate.increment(e, 3), 0.15, 1e-15);

  AttackSchedule partial{{0.3}, std::nullopt, false};
  EXPECT_EQ(partial.increment(e, 2), 0.1);

  AttackSchedule relative{{0.5}, std::nullopt, true};
  EXPECT_EQ(relative.increment(e, 1), 1.0);

  EXPECT_EQ(schedule_from_json(to_json(escalate)), escalate);
  EXPECT_EQ(schedule_from_json(to_json(partial)), partial);
}

TEST(Rng, DeterministicAndDistinctStreams) {
  RngSeed s{42};
  EXPECT_EQ(derive_seed(s, "trace", 3), derive_seed(s, "trace", 3));
  EXPECT_NE(derive_seed(s, "trace", 3).value, derive_seed(s, "trace", 4).value);
  EXPECT_NE(derive_seed(s, "trace", 3).value, derive_seed(s, "noise", 3).value);
  EXPECT_NE(derive_seed(s, "trace", 3).value, derive_seed(RngSeed{43}, "trace", 3).value);

  SplitMix64 a(s), b(s);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a(), b());

  SplitMix64 r(RngSeed{7});
  double sum = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = r.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += r.exponential(2.0);
  }
  EXPECT_NEAR(sum / n, 0.5, 5.0 * 0.5 / std::sqrt(n));
  EXPECT_EQ(r.exponential(0.0), INFINITY);
}
