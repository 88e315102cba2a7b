#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <queue>
#include <vector>

#include "rattack/rattack.hpp"

namespace fixtures {

using namespace rattack;

inline RoutingMatrix rows(const Network& net, std::initializer_list<std::tuple<NodeId, NodeId, double>> entries) {
  RoutingMatrix r(net);
  for (auto [i, j, x] : entries) r.set_ratio(net, net.link_id(i, j), x);
  return r;
}

// Six nodes, hijacked node 3, destination 6. Only c46 = 3, the optimum 2 and
// the saturated link (5,6) are fixed by the figure; other capacities are
// chosen to be consistent with them.
inline AttackProblem fig2() {
  Network net(6,
              {{1, 2, 6}, {1, 3, 6}, {2, 4, 5}, {3, 4, 5}, {3, 5, 4}, {4, 6, 3}, {5, 6, 1}},
              1, 6);
  RoutingMatrix r = rows(net, {{1, 2, 0.5}, {1, 3, 0.5}, {2, 4, 1}, {3, 4, 0.5}, {3, 5, 0.5},
                               {4, 6, 1}, {5, 6, 1}});
  return AttackProblem(std::move(net), std::move(r), {3});
}

// Measurement example: all capacities 10, arrival 7, hijacked {2, 4}.
inline AttackProblem fig45() {
  Network net(6,
              {{1, 2, 10}, {1, 3, 10}, {2, 3, 10}, {2, 4, 10}, {3, 4, 10}, {3, 5, 10}, {4, 6, 10}, {5, 6, 10}},
              1, 6);
  RoutingMatrix r = rows(net, {{1, 2, 3.0 / 7}, {1, 3, 4.0 / 7}, {2, 3, 2.0 / 3}, {2, 4, 1.0 / 3},
                               {3, 4, 2.0 / 3}, {3, 5, 1.0 / 3}, {4, 6, 1}, {5, 6, 1}});
  return AttackProblem(std::move(net), std::move(r), {2, 4});
}

// Ladder where greedy local choices compound: each hijacked node's direct
// link to 8 looks worst locally but the inward links are jointly worse.
inline AttackProblem fig6(double eps) {
  const double inf = kInfinity;
  Network net(8,
              {{1, 2, inf}, {1, 3, inf}, {2, 3, inf}, {2, 8, 4 - 4 * eps}, {3, 4, inf}, {3, 5, inf},
               {4, 5, inf}, {4, 8, 2 - 2 * eps}, {5, 6, inf}, {5, 7, inf}, {6, 7, inf}, {6, 8, 1 - eps},
               {7, 8, 1}},
              1, 8);
  RoutingMatrix r = rows(net, {{1, 2, 0.5}, {1, 3, 0.5}, {2, 3, 0.5}, {2, 8, 0.5}, {3, 4, 0.5},
                               {3, 5, 0.5}, {4, 5, 0.5}, {4, 8, 0.5}, {5, 6, 0.5}, {5, 7, 0.5},
                               {6, 7, 0.5}, {6, 8, 0.5}, {7, 8, 1}});
  return AttackProblem(std::move(net), std::move(r), {2, 4, 6});
}

// s1 -> d1 normal, s2 -> {d1, d2} hijacked.
inline SingleHopInstance fig8(double eps = 0.1) {
  SingleHopInstance inst;
  inst.lambda = {2, 2};
  inst.mu = {2, 1 - eps};
  inst.edges = {{0}, {0, 1}};
  inst.adversarial = {0, 1};
  inst.routing = {{1.0}, {0.5, 0.5}};
  normalize(inst);
  return inst;
}

inline SingleHopInstance two_by_two_example() {
  SingleHopInstance inst;
  inst.lambda = {1, 1};
  inst.mu = {1.5, 0.4};
  inst.edges = {{0}, {0, 1}};
  inst.adversarial = {1, 1};
  inst.routing = {{1.0}, {0.5, 0.5}};
  normalize(inst);
  return inst;
}

inline AttackProblem random_dag(int nodes, double density, int adversaries, RoutingPolicy policy,
                                std::uint64_t seed) {
  GenConfig config;
  config.nodes = nodes;
  config.density = density;
  config.adversaries = adversaries;
  config.routing = policy;
  config.seed = seed;
  return gen_multihop(config, instance_seeds(config, 0));
}

inline SingleHopInstance random_singlehop(int ns, int nd, double density, double ratio, bool homo,
                                          std::uint64_t seed) {
  GenConfig config;
  config.mode = "singlehop";
  config.ingress = ns;
  config.egress = nd;
  config.density = density;
  config.ratio = ratio;
  config.uniformity = homo ? "homo" : "hetero";
  config.adversaries = 0;
  config.seed = seed;
  return gen_singlehop(config, instance_seeds(config, 0));
}

// ---- independent oracles ----

/// Edmonds-Karp on the capacity graph (infinite capacities as +inf).
inline double edmonds_karp(const Network& net) {
  const int n = net.node_count();
  std::vector<std::vector<double>> cap(n + 1, std::vector<double>(n + 1, 0.0));
  for (const Link& l : net.links()) {
    if (l.tail == net.destination() || l.head == net.source()) continue;
    cap[l.tail][l.head] += l.capacity;
  }
  double total = 0.0;
  for (;;) {
    std::vector<int> parent(n + 1, 0);
    parent[net.source()] = net.source();
    std::queue<int> q;
    q.push(net.source());
    while (!q.empty() && !parent[net.destination()]) {
      int u = q.front();
      q.pop();
      for (int v = 1; v <= n; ++v) {
        if (!parent[v] && cap[u][v] > 1e-12) {
          parent[v] = u;
          q.push(v);
        }
      }
    }
    if (!parent[net.destination()]) return total;
    double push = std::numeric_limits<double>::infinity();
    for (int v = net.destination(); v != net.source(); v = parent[v]) push = std::min(push, cap[parent[v]][v]);
    if (std::isinf(push)) return push;
    for (int v = net.destination(); v != net.source(); v = parent[v]) {
      cap[parent[v]][v] -= push;
      cap[v][parent[v]] += push;
    }
    total += push;
  }
}

/// Smallest number of sets covering every element, by exhaustive search.
inline int min_set_cover(int elements, const SetFamily& sets) {
  const int n = static_cast<int>(sets.size());
  int best = std::numeric_limits<int>::max();
  for (unsigned mask = 1; mask < (1u << n); ++mask) {
    std::vector<char> covered(elements, 0);
    for (int j = 0; j < n; ++j) {
      if (mask & (1u << j)) {
        for (int e : sets[j]) covered[e] = 1;
      }
    }
    if (std::all_of(covered.begin(), covered.end(), [](char c) { return c; })) {
      best = std::min(best, __builtin_popcount(mask));
    }
  }
  return best;
}

/// Loss of a single-hop routing computed from scratch.
inline double singlehop_loss(const SingleHopInstance& inst, const SingleHopRouting& r) {
  std::vector<double> load(inst.egress_count(), 0.0);
  for (int i = 0; i < inst.ingress_count(); ++i) {
    for (std::size_t k = 0; k < inst.edges[i].size(); ++k) load[inst.edges[i][k]] += inst.lambda[i] * r[i][k];
  }
  double loss = 0.0;
  for (int j = 0; j < inst.egress_count(); ++j) loss += std::max(0.0, load[j] - inst.mu[j]);
  return loss;
}

/// Best single-egress assignment over all adversarial ingresses.
inline double enumerate_singlehop_loss(const SingleHopInstance& inst) {
  SingleHopRouting r = inst.routing;
  std::vector<int> adv;
  for (int i = 0; i < inst.ingress_count(); ++i) {
    if (inst.adversarial[i] && !inst.edges[i].empty()) adv.push_back(i);
  }
  double best = 0.0;
  std::function<void(std::size_t)> rec = [&](std::size_t a) {
    if (a == adv.size()) {
      best = std::max(best, singlehop_loss(inst, r));
      return;
    }
    int i = adv[a];
    for (std::size_t k = 0; k < inst.edges[i].size(); ++k) {
      r[i].assign(inst.edges[i].size(), 0.0);
      r[i][k] = 1.0;
      rec(a + 1);
    }
  };
  rec(0);
  return best;
}

/// lambda* of a full routing from an independent topological flow pass.
inline double dag_lambda_star(const Network& net, const RoutingMatrix& routing) {
  std::vector<double> in(net.node_count() + 1, 0.0);
  in[net.source()] = 1.0;
  auto order = topological_order(net);
  double worst = 0.0;
  for (NodeId u : *order) {
    if (u == net.destination()) continue;
    for (LinkId id : net.out_links(u)) {
      double f = in[u] * routing.ratio(id);
      in[net.link(id).head] += f;
      if (!is_infinite(net.capacity(id)) && f > 0) worst = std::max(worst, f / net.capacity(id));
    }
  }
  return worst > 0 ? 1.0 / worst : kInfinity;
}

}  // namespace fixtures
