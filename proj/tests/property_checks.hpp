#pragma once

#include <random>
#include <sstream>
#include <string>

#include "fixtures.hpp"

// Invariant checks over seeded random instances. Each returns an empty
// string on success, otherwise a description of the first violation.
namespace checks {

using namespace rattack;

inline AttackProblem instance(std::uint64_t seed) {
  static const RoutingPolicy policies[] = {RoutingPolicy::Uniform, RoutingPolicy::Proportional,
                                           RoutingPolicy::Ecmp, RoutingPolicy::MaxFlow};
  return fixtures::random_dag(6 + seed % 5, seed % 2 ? 0.4 : 0.7, 1 + seed % 3, policies[seed % 4], seed);
}

inline RoutingMatrix random_attack(const AttackProblem& p, std::mt19937_64& rng) {
  RoutingMatrix attack(p.network);
  std::exponential_distribution<double> e(1.0);
  for (NodeId adv : p.adversaries()) {
    auto out = p.network.out_links(adv);
    std::vector<double> w(out.size());
    double sum = 0;
    for (double& x : w) sum += (x = e(rng));
    for (std::size_t k = 0; k < out.size(); ++k) attack.set_ratio(p.network, out[k], w[k] / sum);
  }
  return merge_routing(p, attack);
}

inline void all_paths(const Network& net, NodeId node, std::vector<NodeId>& stack,
                      std::vector<std::vector<NodeId>>& out) {
  stack.push_back(node);
  if (node == net.destination()) {
    out.push_back(stack);
  } else {
    for (LinkId id : net.out_links(node)) all_paths(net, net.link(id).head, stack, out);
  }
  stack.pop_back();
}

inline std::string fail(std::uint64_t seed, const std::string& what) {
  std::ostringstream os;
  os << "seed " << seed << ": " << what;
  return os.str();
}

inline bool near(double a, double b, double tol) { return std::fabs(a - b) <= tol; }

inline std::string flow_conservation(std::uint64_t seed, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> rate(0.1, 40);
  AttackProblem p = instance(seed);
  const Network& net = p.network;
  RoutingMatrix routing = random_attack(p, rng);
  const double arrival = rate(rng);
  const double tol = 1e-9 * arrival;
  FlowAssignment f = propagate(net, routing, arrival);
  double dropped = 0;
  for (NodeId node = 1; node <= net.node_count(); ++node) {
    double in = node == net.source() ? arrival : 0.0;
    for (LinkId id : net.in_links(node)) in += f.flow[id];
    if (!near(in, f.inflow[node], tol)) return fail(seed, "inflow mismatch at node " + std::to_string(node));
    if (node == net.destination()) continue;
    double out = 0;
    for (LinkId id : net.out_links(node)) {
      if (f.flow[id] > net.capacity(id) * (1 + 1e-12)) return fail(seed, "flow above capacity");
      if (f.flow[id] > in * routing.ratio(id) + 1e-9) return fail(seed, "flow above dispatched share");
      out += f.flow[id];
    }
    if (out > in + tol) return fail(seed, "node emits more than it receives");
    dropped += in - out;
  }
  if (!near(arrival, f.delivered + dropped, tol)) return fail(seed, "arrival != delivered + dropped");
  if (!near(f.loss, dropped, tol)) return fail(seed, "loss != dropped");
  return {};
}

inline std::string loss_monotone(std::uint64_t seed, std::mt19937_64& rng) {
  AttackProblem p = instance(seed);
  RoutingMatrix routing = random_attack(p, rng);
  const double lambda_star = no_loss_throughput(p.network, routing).lambda_star;
  double prev = 0;
  for (double arrival = 0; arrival <= 60; arrival += 1.5) {
    double loss = propagate(p.network, routing, arrival).loss;
    if (loss < prev - 1e-9) return fail(seed, "loss fell as arrival grew");
    if (arrival <= lambda_star * (1 - 1e-9) && loss > 1e-9 * std::max(1.0, arrival)) {
      return fail(seed, "loss below the no-loss throughput");
    }
    prev = loss;
  }
  return {};
}

inline std::string path_round_trip(std::uint64_t seed, std::mt19937_64& rng) {
  AttackProblem p = instance(seed);
  const Network& net = p.network;
  RoutingMatrix routing = random_attack(p, rng);
  std::vector<std::vector<NodeId>> paths;
  std::vector<NodeId> stack;
  all_paths(net, net.source(), stack, paths);
  PathDecomposition decomposition;
  double total = 0;
  for (auto& path : paths) {
    double fraction = path_fraction(net, routing, path);
    total += fraction;
    if (fraction > 0) decomposition.push_back({path, fraction});
  }
  if (!near(total, 1.0, 1e-9)) return fail(seed, "path fractions do not sum to 1");
  RoutingMatrix rebuilt = routing_from_paths(net, decomposition);
  FlowAssignment carried = propagate(net, routing, 1.0);
  for (NodeId node = 1; node < net.node_count(); ++node) {
    if (node == net.destination() || carried.inflow[node] <= 1e-12) continue;
    for (LinkId id : net.out_links(node)) {
      if (!near(rebuilt.ratio(id), routing.ratio(id), 1e-9)) return fail(seed, "rebuilt row differs");
    }
  }
  return {};
}

inline std::string reach_monotone(std::uint64_t seed) {
  AttackProblem p = instance(seed);
  std::vector<NodeId> smaller = p.adversaries();
  smaller.pop_back();
  AttackProblem less = p.with_adversaries(smaller);
  for (NodeId node = 2; node < p.network.node_count(); ++node) {
    if (max_flow_to_node(less, node).value > max_flow_to_node(p, node).value + 1e-9) {
      return fail(seed, "dropping an adversary raised reachable flow at node " + std::to_string(node));
    }
  }
  return {};
}

}  // namespace checks
