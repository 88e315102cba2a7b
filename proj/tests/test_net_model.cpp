#include <gtest/gtest.h>

#include "fixtures.hpp"

using namespace rattack;
using fixtures::rows;

namespace {

Network diamond(double c_top, double c_bottom) {
  return Network(4, {{1, 2, c_top}, {1, 3, c_bottom}, {2, 4, kInfinity}, {3, 4, kInfinity}}, 1, 4);
}

AttackProblem diamond_problem(double c_top, double c_bottom) {
  Network net = diamond(c_top, c_bottom);
  RoutingMatrix r = rows(net, {{1, 2, 0.5}, {1, 3, 0.5}, {2, 4, 1}, {3, 4, 1}});
  return AttackProblem(std::move(net), std::move(r), {});
}

bool has_rule(const std::vector<Violation>& v, const std::string& rule) {
  return std::any_of(v.begin(), v.end(), [&](const Violation& x) { return x.rule == rule; });
}

}  // namespace

TEST(Network, SortsLinksAndBuildsAdjacency) {
  Network net(3, {{2, 3, 1}, {1, 3, 2}, {1, 2, 3}}, 1, 3);
  ASSERT_EQ(net.link_count(), 3u);
  EXPECT_EQ(net.link(0).tail, 1);
  EXPECT_EQ(net.link(0).head, 2);
  EXPECT_EQ(net.link(1).head, 3);
  EXPECT_EQ(net.out_links(1).size(), 2u);
  EXPECT_EQ(net.in_links(3).size(), 2u);
  EXPECT_EQ(*net.find_link(2, 3), 2u);
  EXPECT_FALSE(net.find_link(3, 1).has_value());
  EXPECT_THROW(net.link_id(3, 1), Error);
}

TEST(Network, RejectsOutOfRangeIds) {
  EXPECT_THROW(Network(2, {{1, 3, 1}}, 1, 2), Error);
  EXPECT_THROW(Network(2, {}, 0, 2), Error);
}

TEST(Validate, WellFormedMeasurementInstanceHasNoViolations) {
  EXPECT_TRUE(validate(fixtures::fig45()).empty());
  EXPECT_TRUE(validate(fixtures::fig2()).empty());
  EXPECT_TRUE(validate(fixtures::fig6(0.01)).empty());
}

TEST(Validate, RowSumViolationNamesTheNode) {
  AttackProblem p = diamond_problem(1, 1);
  p.default_routing.set_ratio(p.network, p.network.link_id(1, 3), 0.4);
  auto v = validate(p);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].rule, "row-sum");
  EXPECT_EQ(v[0].node, 1);
}

TEST(Validate, DisconnectedGraph) {
  Network net(3, {{1, 2, 1}}, 1, 3);
  RoutingMatrix r = rows(net, {{1, 2, 1}});
  auto v = validate(AttackProblem(net, r, {}));
  EXPECT_TRUE(has_rule(v, "disconnected"));
}

TEST(Validate, StructuralRules) {
  {
    Network net(2, {{1, 1, 1}, {1, 2, 1}}, 1, 2);
    EXPECT_TRUE(has_rule(validate(AttackProblem(net, rows(net, {{1, 2, 1}}), {})), "self-loop"));
  }
  {
    Network net(2, {{1, 2, 1}, {1, 2, 2}}, 1, 2);
    EXPECT_TRUE(has_rule(validate(AttackProblem(net, RoutingMatrix(net), {})), "duplicate-link"));
  }
  {
    Network net(2, {{1, 2, -1}}, 1, 2);
    EXPECT_TRUE(has_rule(validate(AttackProblem(net, rows(net, {{1, 2, 1}}), {})), "capacity"));
  }
  {
    Network net(2, {{1, 2, 1}}, 1, 2);
    EXPECT_TRUE(has_rule(validate(AttackProblem(net, rows(net, {{1, 2, 1}}), {2})), "adversarial-destination"));
  }
  {
    AttackProblem p = diamond_problem(1, 1);
    p.default_routing.clear_row(p.network, 2);
    EXPECT_TRUE(has_rule(validate(p), "missing-row"));
  }
}

TEST(Validate, BoundsMustAdmitAFeasibleRow) {
  AttackProblem p = diamond_problem(1, 1).with_adversaries({1});
  DispatchBounds b(p.network);
  b.lower[p.network.link_id(1, 2)] = 0.7;
  b.lower[p.network.link_id(1, 3)] = 0.7;
  p.bounds = b;
  EXPECT_TRUE(has_rule(validate(p), "bounds-infeasible"));
}

TEST(RoutingFromPaths, SymmetricSplit) {
  Network net = diamond(1, 1);
  RoutingMatrix r = routing_from_paths(net, {{{1, 2, 4}, 0.5}, {{1, 3, 4}, 0.5}});
  EXPECT_DOUBLE_EQ(r.ratio(net.link_id(1, 2)), 0.5);
  EXPECT_DOUBLE_EQ(r.ratio(net.link_id(1, 3)), 0.5);
  EXPECT_DOUBLE_EQ(r.ratio(net.link_id(2, 4)), 1.0);
  EXPECT_DOUBLE_EQ(r.ratio(net.link_id(3, 4)), 1.0);
}

TEST(RoutingFromPaths, SinglePathIsAllOnes) {
  Network net(3, {{1, 2, 1}, {2, 3, 1}}, 1, 3);
  RoutingMatrix r = routing_from_paths(net, {{{1, 2, 3}, 1.0}});
  EXPECT_DOUBLE_EQ(r.ratio(0), 1.0);
  EXPECT_DOUBLE_EQ(r.ratio(1), 1.0);
}

TEST(RoutingFromPaths, ZeroWeightPathIgnored) {
  Network net(4, {{1, 2, 1}, {1, 3, 1}, {2, 3, 1}, {2, 4, 1}, {3, 4, 1}}, 1, 4);
  RoutingMatrix r = routing_from_paths(net, {{{1, 2, 4}, 0.3}, {{1, 3, 4}, 0.7}, {{1, 2, 3, 4}, 0.0}});
  EXPECT_NEAR(r.ratio(net.link_id(1, 2)), 0.3, 1e-15);
  EXPECT_NEAR(r.ratio(net.link_id(1, 3)), 0.7, 1e-15);
  EXPECT_NEAR(r.ratio(net.link_id(2, 3)), 0.0, 1e-15);
}

TEST(PathFraction, ProductOfRatios) {
  AttackProblem p = diamond_problem(1, 1);
  EXPECT_DOUBLE_EQ(path_fraction(p.network, p.default_routing, {1, 2, 4}), 0.5);
  Network chain(3, {{1, 2, 1}, {2, 3, 1}}, 1, 3);
  EXPECT_DOUBLE_EQ(path_fraction(chain, rows(chain, {{1, 2, 1}, {2, 3, 1}}), {1, 2, 3}), 1.0);
  AttackProblem m = fixtures::fig45();
  EXPECT_NEAR(path_fraction(m.network, m.default_routing, {1, 2, 4, 6}), 1.0 / 7, 1e-15);
  // Cross-check against the simulated flow on that path's first hops.
  FlowAssignment f = propagate(m.network, m.default_routing, 1.0);
  EXPECT_NEAR(f.flow[m.network.link_id(2, 4)], 1.0 / 7, 1e-12);
  EXPECT_THROW(path_fraction(p.network, p.default_routing, {1, 4}), Error);
}

TEST(SingleHopToMultihop, ChainForOneByOne) {
  SingleHopInstance inst;
  inst.lambda = {4};
  inst.mu = {2};
  inst.edges = {{0}};
  inst.routing = {{1.0}};
  normalize(inst);
  AttackProblem p = singlehop_to_multihop(inst);
  EXPECT_EQ(p.network.node_count(), 4);  // s0, s1, d1, d0
  EXPECT_EQ(p.network.link_count(), 3u);
  EXPECT_DOUBLE_EQ(p.network.capacity(p.network.link_id(3, 4)), 2.0);
  EXPECT_TRUE(validate(p).empty());
}

TEST(SingleHopToMultihop, LossInstanceSplitsAndCapacities) {
  SingleHopInstance inst = fixtures::fig8(0.1);
  AttackProblem p = singlehop_to_multihop(inst);
  SingleHopLayout layout = layout_of(inst);
  const Network& net = p.network;
  EXPECT_DOUBLE_EQ(p.default_routing.ratio(net.link_id(1, layout.ingress(0))), 0.5);
  EXPECT_DOUBLE_EQ(p.default_routing.ratio(net.link_id(1, layout.ingress(1))), 0.5);
  EXPECT_DOUBLE_EQ(net.capacity(net.link_id(layout.egress(0), layout.meta_destination)), 2.0);
  EXPECT_DOUBLE_EQ(net.capacity(net.link_id(layout.egress(1), layout.meta_destination)), 0.9);
  double into_sink = 0;
  for (LinkId id : net.in_links(layout.meta_destination)) into_sink += net.capacity(id);
  EXPECT_DOUBLE_EQ(into_sink, 2.9);
}

TEST(Propagate, MaxLossAttackOnFig2) {
  AttackProblem p = fixtures::fig2();
  RoutingMatrix attack(p.network);
  attack.set_single(p.network, 3, p.network.link_id(3, 4));
  FlowAssignment f = propagate(p, merge_routing(p, attack), 10.0);
  EXPECT_DOUBLE_EQ(f.loss, 7.0);
  EXPECT_DOUBLE_EQ(f.delivered, 3.0);
}

TEST(Propagate, ZeroArrival) {
  AttackProblem p = fixtures::fig2();
  FlowAssignment f = propagate(p, merge_routing(p, RoutingMatrix(p.network)), 0.0);
  EXPECT_EQ(f.loss, 0.0);
  for (double x : f.flow) EXPECT_EQ(x, 0.0);
}

TEST(Propagate, DiamondDropsAtEachBranch) {
  AttackProblem p = diamond_problem(1, 1);
  FlowAssignment f = propagate(p.network, p.default_routing, 4.0);
  EXPECT_DOUBLE_EQ(f.flow[p.network.link_id(1, 2)], 1.0);
  EXPECT_DOUBLE_EQ(f.flow[p.network.link_id(1, 3)], 1.0);
  EXPECT_DOUBLE_EQ(f.loss, 2.0);
}

TEST(Propagate, CyclicNetworkConverges) {
  // 1 -> 2 -> 3 (dest), 2 -> 4 -> 2 loop with half the traffic returning.
  Network net(4, {{1, 2, kInfinity}, {2, 3, 1.5}, {2, 4, kInfinity}, {4, 2, kInfinity}}, 1, 3);
  RoutingMatrix r = rows(net, {{1, 2, 1}, {2, 3, 0.5}, {2, 4, 0.5}, {4, 2, 1}});
  EXPECT_FALSE(is_acyclic(net));
  // Unit flows: in2 = 1 + 0.5 in2 -> 2, so f23 = 1 and lambda* = 1.5.
  EXPECT_NEAR(no_loss_throughput(net, r).lambda_star, 1.5, 1e-9);
  FlowAssignment f = propagate(net, r, 1.0);
  EXPECT_NEAR(f.delivered, 1.0, 1e-8);
  EXPECT_NEAR(f.loss, 0.0, 1e-8);
  FlowAssignment g = propagate(net, r, 3.0);
  EXPECT_NEAR(g.delivered, 1.5, 1e-8);
}

TEST(NoLossThroughput, Bottleneck) {
  Network net(4, {{1, 2, 5}, {2, 3, 2}, {3, 4, 7}}, 1, 4);
  RoutingMatrix r = rows(net, {{1, 2, 1}, {2, 3, 1}, {3, 4, 1}});
  ThroughputReport t = no_loss_throughput(net, r);
  EXPECT_DOUBLE_EQ(t.lambda_star, 2.0);
  EXPECT_EQ(*t.saturated_link, net.link_id(2, 3));
}

TEST(NoLossThroughput, Fig2OptimalAttack) {
  AttackProblem p = fixtures::fig2();
  RoutingMatrix attack(p.network);
  attack.set_single(p.network, 3, p.network.link_id(3, 5));
  ThroughputReport t = no_loss_throughput(p, merge_routing(p, attack));
  EXPECT_DOUBLE_EQ(t.lambda_star, 2.0);
  EXPECT_EQ(*t.saturated_link, p.network.link_id(5, 6));
}

TEST(NoLossThroughput, UnevenDiamond) {
  AttackProblem p = diamond_problem(1, 3);
  EXPECT_DOUBLE_EQ(no_loss_throughput(p.network, p.default_routing).lambda_star, 2.0);
}

TEST(NoLossThroughput, AllInfiniteIsInfinite) {
  AttackProblem p = diamond_problem(kInfinity, kInfinity);
  EXPECT_TRUE(is_infinite(no_loss_throughput(p.network, p.default_routing).lambda_star));
}

TEST(Reachability, Fig2Sets) {
  AttackProblem p = fixtures::fig2();
  EXPECT_EQ(upstream_set(p, 5), (std::vector<NodeId>{1, 3}));
  EXPECT_EQ(downstream_set(p.network, 2), (std::vector<NodeId>{4, 6}));
  EXPECT_TRUE(downstream_set(p.network, 6).empty());
  Network chain(3, {{1, 2, 1}, {2, 3, 1}}, 1, 3);
  EXPECT_EQ(downstream_set(chain, 1), (std::vector<NodeId>{2, 3}));
}

TEST(NodeCut, DetectsCut) {
  AttackProblem p = fixtures::fig2();
  std::vector<char> removed(7, 0);
  removed[2] = removed[3] = 1;
  EXPECT_TRUE(is_node_cut(p.network, removed));
  removed[2] = 0;
  EXPECT_FALSE(is_node_cut(p.network, removed));
}

TEST(MergeRouting, AttackRowsOverrideDefaults) {
  AttackProblem p = fixtures::fig2();
  RoutingMatrix attack(p.network);
  attack.set_single(p.network, 3, p.network.link_id(3, 4));
  RoutingMatrix m = merge_routing(p, attack);
  EXPECT_EQ(m.ratio(p.network.link_id(3, 4)), 1.0);
  EXPECT_EQ(m.ratio(p.network.link_id(1, 2)), 0.5);
}

TEST(ErrorFormat, MachineParsable) {
  Error e("row-sum", "bad row", 4);
  EXPECT_EQ(e.format(), "ERROR row-sum: bad row [node=4]");
  Error l("unknown-link", "missing", std::nullopt, std::pair{1, 2});
  EXPECT_EQ(l.format(), "ERROR unknown-link: missing [link=1,2]");
}
