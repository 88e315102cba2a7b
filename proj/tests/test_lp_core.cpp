#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "fixtures.hpp"

using namespace rattack;
using fixtures::rows;

namespace {

// Hijacked {2, 4}; (1,2) and (1,3) unlimited.
AttackProblem mf_example(double x12, double x34) {
  Network net(6,
              {{1, 2, kInfinity}, {1, 3, kInfinity}, {2, 3, 4}, {2, 4, 3}, {3, 4, 2}, {3, 5, 5},
               {4, 5, 1}, {4, 6, 2}, {5, 6, 6}},
              1, 6);
  RoutingMatrix r = rows(net, {{1, 2, x12}, {1, 3, 1 - x12}, {2, 3, 0.5}, {2, 4, 0.5}, {3, 4, x34},
                               {3, 5, 1 - x34}, {4, 5, 0.5}, {4, 6, 0.5}, {5, 6, 1}});
  return AttackProblem(std::move(net), std::move(r), {2, 4});
}

}  // namespace

TEST(Simplex, SingleUpperBound) {
  LinearProgram lp(1);
  lp.set_objective(0, 1);
  lp.add_constraint({{0, 1}}, Sense::LessEqual, 3);
  LPSolution s = solve(lp);
  ASSERT_EQ(s.status, LPStatus::Optimal);
  EXPECT_NEAR(s.objective, 3, 1e-12);
}

TEST(Simplex, EqualityRow) {
  LinearProgram lp(2);
  lp.set_objective(0, 1);
  lp.set_objective(1, 1);
  lp.add_constraint({{0, 1}, {1, 1}}, Sense::Equal, 1);
  LPSolution s = solve(lp);
  ASSERT_EQ(s.status, LPStatus::Optimal);
  EXPECT_NEAR(s.objective, 1, 1e-12);
  EXPECT_LT(lp.residual(s.x), 1e-9);
}

TEST(Simplex, DetectsInfeasible) {
  LinearProgram lp(1);
  lp.add_constraint({{0, 1}}, Sense::GreaterEqual, 2);
  lp.add_constraint({{0, 1}}, Sense::LessEqual, 1);
  EXPECT_EQ(solve(lp).status, LPStatus::Infeasible);
}

TEST(Simplex, DetectsUnbounded) {
  LinearProgram lp(2);
  lp.set_objective(0, 1);
  lp.add_constraint({{0, 1}, {1, -1}}, Sense::LessEqual, 1);
  EXPECT_EQ(solve(lp).status, LPStatus::Unbounded);
}

TEST(Simplex, VariableUpperBoundsAndNegativeRhs) {
  LinearProgram lp(2);
  lp.set_objective(0, 2);
  lp.set_objective(1, 1);
  lp.set_upper_bound(0, 1.5);
  lp.add_constraint({{0, -1}, {1, -1}}, Sense::GreaterEqual, -4);
  LPSolution s = solve(lp);
  ASSERT_EQ(s.status, LPStatus::Optimal);
  EXPECT_NEAR(s.objective, 5.5, 1e-9);
}

TEST(Simplex, DegenerateProblemTerminates) {
  // Classic cycling example for the largest-coefficient rule.
  LinearProgram lp(4);
  lp.set_objective(0, 10);
  lp.set_objective(1, -57);
  lp.set_objective(2, -9);
  lp.set_objective(3, -24);
  lp.add_constraint({{0, 0.5}, {1, -5.5}, {2, -2.5}, {3, 9}}, Sense::LessEqual, 0);
  lp.add_constraint({{0, 0.5}, {1, -1.5}, {2, -0.5}, {3, 1}}, Sense::LessEqual, 0);
  lp.add_constraint({{0, 1}}, Sense::LessEqual, 1);
  LPSolution s = solve(lp);
  ASSERT_EQ(s.status, LPStatus::Optimal);
  EXPECT_NEAR(s.objective, 1, 1e-9);
}

TEST(Simplex, MalformedRowsRejected) {
  LinearProgram lp(1);
  EXPECT_THROW(lp.add_constraint({{3, 1}}, Sense::Equal, 0), Error);
  EXPECT_THROW(lp.add_constraint({{0, 1}}, Sense::Equal, kInfinity), Error);
}

TEST(Simplex, RandomFeasibleProgramsSatisfyResidual) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> coef(-1, 1), pos(0.1, 2);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 2 + trial % 5;
    LinearProgram lp(n);
    std::vector<double> point(n);
    for (double& v : point) v = pos(rng);
    for (int v = 0; v < n; ++v) lp.set_objective(v, coef(rng));
    for (int r = 0; r < n + 2; ++r) {
      std::vector<std::pair<int, double>> terms;
      double lhs = 0;
      for (int v = 0; v < n; ++v) {
        double c = coef(rng);
        terms.push_back({v, c});
        lhs += c * point[v];
      }
      Sense sense = r % 3 == 0 ? Sense::Equal : (r % 3 == 1 ? Sense::LessEqual : Sense::GreaterEqual);
      double rhs = sense == Sense::Equal ? lhs : (sense == Sense::LessEqual ? lhs + 0.5 : lhs - 0.5);
      lp.add_constraint(terms, sense, rhs);
    }
    for (int v = 0; v < n; ++v) lp.set_upper_bound(v, 5);
    LPSolution s = solve(lp);
    ASSERT_EQ(s.status, LPStatus::Optimal) << trial;
    EXPECT_LT(lp.residual(s.x), 1e-7);
    double at_point = 0;
    for (int v = 0; v < n; ++v) at_point += lp.objective()[v] * point[v];
    EXPECT_GE(s.objective, at_point - 1e-7);
  }
}

TEST(Simplex, TraceWritesTableaux) {
  std::ostringstream out;
  lp_trace() = &out;
  LinearProgram lp(1);
  lp.set_objective(0, 1);
  lp.add_constraint({{0, 1}}, Sense::LessEqual, 3);
  solve(lp);
  lp_trace() = nullptr;
  EXPECT_FALSE(out.str().empty());
}

TEST(FlowLP, DiamondBranchUnderFixedRouting) {
  Network net(4, {{1, 2, 1}, {1, 3, 1}, {2, 4, 1}, {3, 4, 1}}, 1, 4);
  RoutingMatrix r = rows(net, {{1, 2, 0.5}, {1, 3, 0.5}, {2, 4, 1}, {3, 4, 1}});
  AttackProblem p(net, r, {});
  EXPECT_NEAR(max_flow_to_node(p, 2).value, 0.5, 1e-12);
}

TEST(FlowLP, MaxFlowToEachNode) {
  AttackProblem p = mf_example(0.5, 0.4);
  EXPECT_NEAR(max_flow_to_node(p, 2).value, 0.5, 1e-9);
  EXPECT_NEAR(max_flow_to_node(p, 3).value, 1.0, 1e-9);
  EXPECT_NEAR(max_flow_to_node(p, 4).value, 0.5 + 0.5 * 0.4, 1e-9);
  EXPECT_NEAR(max_flow_to_node(p, 5).value, 1.0, 1e-9);
  AttackProblem q = mf_example(0.3, 0.8);
  EXPECT_NEAR(max_flow_to_node(q, 4).value, 0.3 + 0.7 * 0.8, 1e-9);
  EXPECT_THROW(max_flow_to_node(p, 6), Error);
}

TEST(FlowLP, SupportingFlowConserves) {
  AttackProblem p = mf_example(0.5, 0.4);
  MaxFlowResult r = max_flow_to_node(p, 4);
  for (NodeId node = 2; node <= 5; ++node) {
    double in = 0, out = 0;
    for (LinkId id : p.network.in_links(node)) in += r.link_flow[id];
    for (LinkId id : p.network.out_links(node)) out += r.link_flow[id];
    EXPECT_NEAR(in, out, 1e-9) << node;
    EXPECT_NEAR(in, r.inflow[node], 1e-9) << node;
  }
}

TEST(FlowLP, NoAdversariesMatchesLinearSolve) {
  for (std::uint64_t seed = 1; seed <= 200; ++seed) {
    AttackProblem p = fixtures::random_dag(5 + seed % 11, 0.5, 0, RoutingPolicy::Uniform, seed);
    std::vector<double> unit = unit_flows(p.network, p.default_routing);
    for (NodeId node = 2; node < p.network.node_count(); ++node) {
      double in = 0;
      for (LinkId id : p.network.in_links(node)) in += unit[id];
      ASSERT_NEAR(max_flow_to_node(p, node).value, in, 1e-7) << "seed " << seed << " node " << node;
    }
  }
}

TEST(FlowLP, CapacitatedMaxFlowMatchesEdmondsKarp) {
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    AttackProblem p = fixtures::random_dag(10, 0.4, 0, RoutingPolicy::Uniform, seed);
    EXPECT_NEAR(max_throughput_flow(p.network).value, fixtures::edmonds_karp(p.network), 1e-7) << seed;
  }
}

TEST(FlowLP, AcyclicPassAgreesWithLp) {
  for (std::uint64_t seed = 1; seed <= 60; ++seed) {
    AttackProblem p = fixtures::random_dag(6 + seed % 7, seed % 2 ? 0.4 : 0.7, 1 + seed % 4, RoutingPolicy::Uniform, seed);
    if (seed % 3 == 0) {
      DispatchBounds b(p.network);
      for (NodeId adv : p.adversaries()) {
        auto out = p.network.out_links(adv);
        for (LinkId id : out) {
          b.lower[id] = 0.3 / out.size();
          b.upper[id] = out.size() > 1 ? 0.7 : 1.0;
        }
      }
      p.bounds = b;
    }
    detail::UnitFlowProgram pass(p), lp(p, true);
    for (NodeId node = 2; node < p.network.node_count(); ++node) {
      MaxFlowResult a = pass.maximize_inflow(node), b = lp.maximize_inflow(node);
      EXPECT_NEAR(a.inflow[node], b.inflow[node], 1e-7) << seed << " node " << node;
    }
    for (NodeId adv : p.adversaries()) {
      for (LinkId id : p.network.out_links(adv)) {
        EXPECT_NEAR(pass.maximize_link(id).value, lp.maximize_link(id).value, 1e-7) << seed << " link " << id;
      }
    }
  }
}

TEST(Simplex, DegenerateFlowSystemStaysFeasible) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    AttackProblem p = fixtures::random_dag(24, 0.6, 6, RoutingPolicy::Proportional, seed);
    detail::UnitFlowProgram pass(p), lp(p, true);
    const NodeId last = p.network.node_count() - 1;
    double expected = pass.maximize_inflow(last).inflow[last];
    EXPECT_NEAR(lp.maximize_inflow(last).inflow[last], expected, 1e-6) << seed;
  }
}
