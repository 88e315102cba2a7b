#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "rattack/core.hpp"
#include "rattack/flow.hpp"
#include "rattack/min_lambda.hpp"
#include "rattack/network.hpp"
#include "rattack/single_hop.hpp"

namespace rattack {

/// Loss attack on a multi-hop problem at a fixed arrival rate.
struct NetworkLossResult {
  RoutingMatrix attack;
  double loss = 0.0;
  double arrival = 0.0;
  std::string algo;
};

inline NetworkLossResult evaluate_loss_attack(const AttackProblem& problem, RoutingMatrix attack,
                                              double arrival, std::string algo) {
  const Network& net = problem.network;
  RoutingMatrix merged = merge_routing(problem, attack);
  for (NodeId node : detail::acting_adversaries(problem)) {
    if (!attack.has_row(node)) attack.copy_row(net, node, merged);
  }
  FlowAssignment flows = propagate(net, merged, arrival);
  return {std::move(attack), flows.loss, arrival, std::move(algo)};
}

namespace detail {

/// Lower bounds first, then the remaining mass in `preference` order up to
/// each edge's upper bound.
inline std::vector<double> fill_singlehop_row(const SingleHopInstance& inst, int i,
                                              const std::vector<std::size_t>& preference) {
  std::vector<double> row(inst.edges[i].size(), 0.0);
  double remaining = 1.0;
  for (std::size_t k = 0; k < row.size(); ++k) {
    row[k] = inst.lower(i, k);
    remaining -= row[k];
  }
  for (std::size_t k : preference) {
    if (remaining <= 0.0) break;
    double add = std::min(remaining, inst.upper(i, k) - row[k]);
    if (add <= 0.0) continue;
    row[k] += add;
    remaining -= add;
  }
  return row;
}

inline std::vector<double> fallback_singlehop_row(const SingleHopInstance& inst, int i) {
  const std::size_t deg = inst.edges[i].size();
  if (!inst.bounds) return std::vector<double>(deg, deg ? 1.0 / static_cast<double>(deg) : 0.0);
  std::vector<std::size_t> order(deg);
  std::iota(order.begin(), order.end(), 0);
  return fill_singlehop_row(inst, i, order);
}

enum class GreedyRule { Overload, PerIngressOverload };

/// Greedy egress targeting on an all-adversarial instance. Each round picks
/// the egress with the best score against its residual service rate and
/// commits the chosen ingress traffic to it.
inline SingleHopRouting greedy_rows(const SingleHopInstance& inst, GreedyRule rule) {
  const int ns = inst.ingress_count();
  const int nd = inst.egress_count();
  SingleHopRouting rows(ns);
  std::vector<double> remaining(ns, 1.0);
  std::vector<double> load(nd, 0.0);
  std::vector<char> undecided(ns, 0);
  for (int i = 0; i < ns; ++i) {
    rows[i].assign(inst.edges[i].size(), 0.0);
    for (std::size_t k = 0; k < rows[i].size(); ++k) {
      rows[i][k] = inst.lower(i, k);
      remaining[i] -= rows[i][k];
      load[inst.edges[i][k]] += inst.lambda[i] * rows[i][k];
    }
    undecided[i] = remaining[i] > 1e-12 && inst.lambda[i] > 0.0 && !inst.edges[i].empty();
  }

  struct Pick {
    int ingress;
    int edge;
    double fraction;
  };
  std::vector<std::vector<Pick>> by_egress(nd);
  for (;;) {
    for (auto& v : by_egress) v.clear();
    for (int i = 0; i < ns; ++i) {
      if (!undecided[i]) continue;
      for (std::size_t k = 0; k < inst.edges[i].size(); ++k) {
        double fraction = std::min(remaining[i], inst.upper(i, k) - rows[i][k]);
        if (fraction > 1e-12) by_egress[inst.edges[i][k]].push_back({i, static_cast<int>(k), fraction});
      }
    }
    double best_score = 0.0;
    int best_j = -1;
    std::size_t best_size = 0;
    for (int j = 0; j < nd; ++j) {
      auto& cand = by_egress[j];
      if (cand.empty()) continue;
      const double residual = std::max(inst.mu[j] - load[j], 0.0);
      double score;
      std::size_t size;
      if (rule == GreedyRule::Overload) {
        double sum = 0.0;
        for (const Pick& p : cand) sum += inst.lambda[p.ingress] * p.fraction;
        score = sum - residual;
        size = cand.size();
      } else {
        std::stable_sort(cand.begin(), cand.end(), [&](const Pick& a, const Pick& b) {
          return inst.lambda[a.ingress] * a.fraction > inst.lambda[b.ingress] * b.fraction;
        });
        double sum = 0.0, share = 0.0;
        score = 0.0;
        size = 0;
        for (std::size_t p = 0; p < cand.size(); ++p) {
          sum += inst.lambda[cand[p].ingress] * cand[p].fraction;
          share += remaining[cand[p].ingress];
          double s = (sum - residual) / share;
          if (size == 0 || strictly_greater(s, score)) {
            score = s;
            size = p + 1;
          }
        }
      }
      if (score > 0.0 && strictly_greater(score, best_score)) {
        best_score = score;
        best_j = j;
        best_size = size;
      }
    }
    if (best_j < 0) break;
    for (std::size_t p = 0; p < best_size; ++p) {
      const Pick& pick = by_egress[best_j][p];
      rows[pick.ingress][pick.edge] += pick.fraction;
      remaining[pick.ingress] -= pick.fraction;
      load[best_j] += inst.lambda[pick.ingress] * pick.fraction;
      if (remaining[pick.ingress] <= 1e-12) undecided[pick.ingress] = 0;
    }
  }

  // Leftover traffic causes no scored overload; spread it harmlessly.
  for (int i = 0; i < ns; ++i) {
    if (inst.edges[i].empty() || remaining[i] <= 1e-12) continue;
    if (!inst.bounds && remaining[i] >= 1.0 - 1e-12) {
      rows[i] = fallback_singlehop_row(inst, i);
      continue;
    }
    for (std::size_t k = 0; k < rows[i].size() && remaining[i] > 1e-12; ++k) {
      double add = std::min(remaining[i], inst.upper(i, k) - rows[i][k]);
      if (add <= 0.0) continue;
      rows[i][k] += add;
      remaining[i] -= add;
    }
  }
  return rows;
}

inline LossResult greedy_attack(const SingleHopInstance& inst, GreedyRule rule, std::string algo) {
  ReducedInstance reduced = reduce_normal_ingress(inst);
  SingleHopRouting rows = greedy_rows(reduced.instance, rule);
  return make_loss_result(inst, expand_rows(inst, reduced, rows), std::move(algo));
}

}  // namespace detail

/// Exhaustive single-egress assignment of every adversarial ingress.
inline LossResult brute_force_max_loss(const SingleHopInstance& inst, double combination_cap = 5e7) {
  if (inst.bounds) {
    throw Error("bounds-unsupported", "brute force enumerates single-egress rows and cannot honor bounds");
  }
  const int nd = inst.egress_count();
  SingleHopRouting rows = inst.routing;
  std::vector<int> free_ingress;
  std::vector<double> base(nd, 0.0);
  for (int i = 0; i < inst.ingress_count(); ++i) {
    if (!inst.adversarial[i]) {
      for (std::size_t k = 0; k < inst.edges[i].size(); ++k) {
        base[inst.edges[i][k]] += inst.lambda[i] * inst.routing[i][k];
      }
    } else if (inst.lambda[i] > 0.0 && !inst.edges[i].empty()) {
      free_ingress.push_back(i);
    } else {
      rows[i] = detail::fallback_singlehop_row(inst, i);
    }
  }
  double combos = 1.0;
  for (int i : free_ingress) combos *= static_cast<double>(inst.edges[i].size());
  if (combos > combination_cap) {
    throw Error("combination-cap", "brute force would enumerate " + std::to_string(combos) +
                                       " routings; use mul or add instead");
  }

  std::vector<std::size_t> choice(free_ingress.size(), 0), best_choice;
  double best = -1.0;
  std::vector<double> load = base;
  // Depth-first with incremental egress loads.
  auto recurse = [&](auto&& self, std::size_t depth) -> void {
    if (depth == free_ingress.size()) {
      double loss = 0.0;
      for (int j = 0; j < nd; ++j) loss += std::max(load[j] - inst.mu[j], 0.0);
      if (best < 0.0 || strictly_greater(loss, best)) {
        best = loss;
        best_choice = choice;
      }
      return;
    }
    int i = free_ingress[depth];
    for (std::size_t k = 0; k < inst.edges[i].size(); ++k) {
      choice[depth] = k;
      load[inst.edges[i][k]] += inst.lambda[i];
      self(self, depth + 1);
      load[inst.edges[i][k]] -= inst.lambda[i];
    }
  };
  recurse(recurse, 0);
  for (std::size_t d = 0; d < free_ingress.size(); ++d) {
    int i = free_ingress[d];
    rows[i].assign(inst.edges[i].size(), 0.0);
    rows[i][best_choice[d]] = 1.0;
  }
  return make_loss_result(inst, std::move(rows), "brute");
}

/// Exhaustive single-link rows on a multi-hop problem, scored by lossy
/// propagation at `arrival`.
inline NetworkLossResult brute_force_max_loss(const AttackProblem& problem, double arrival,
                                              double combination_cap = 1e6) {
  const Network& net = problem.network;
  if (problem.bounds) {
    throw Error("bounds-unsupported", "brute force enumerates single-link rows and cannot honor bounds");
  }
  const auto carrying = flow_carrying_nodes(problem);
  std::vector<NodeId> free_nodes;
  RoutingMatrix attack(net);
  for (NodeId node : detail::acting_adversaries(problem)) {
    if (carrying[node]) free_nodes.push_back(node);
    else attack.set_single(net, node, net.out_links(node).front());
  }
  double combos = 1.0;
  for (NodeId node : free_nodes) combos *= static_cast<double>(net.out_links(node).size());
  if (combos > combination_cap) {
    throw Error("combination-cap", "brute force would enumerate " + std::to_string(combos) +
                                       " routings; use add instead");
  }
  std::vector<std::size_t> choice(free_nodes.size(), 0);
  std::optional<RoutingMatrix> best_attack;
  double best = -1.0;
  for (;;) {
    for (std::size_t k = 0; k < free_nodes.size(); ++k) {
      attack.set_single(net, free_nodes[k], net.out_links(free_nodes[k])[choice[k]]);
    }
    double loss = propagate(net, merge_routing(problem, attack), arrival).loss;
    if (!best_attack || strictly_greater(loss, best)) {
      best = loss;
      best_attack = attack;
    }
    std::size_t k = 0;
    for (; k < free_nodes.size(); ++k) {
      if (++choice[k] < net.out_links(free_nodes[k]).size()) break;
      choice[k] = 0;
    }
    if (k == free_nodes.size()) break;
  }
  return evaluate_loss_attack(problem, std::move(*best_attack), arrival, "brute");
}

/// Greedy by raw overload: target the egress whose undecided connected
/// traffic most exceeds its residual service rate, send all of it there.
inline LossResult maxloss_approach1(const SingleHopInstance& inst) {
  return detail::greedy_attack(inst, detail::GreedyRule::Overload, "approach1");
}

/// Greedy by per-ingress overload: for each egress the best prefix of its
/// undecided ingresses (largest traffic first) normalized by prefix size.
inline LossResult maxloss_approach2(const SingleHopInstance& inst) {
  return detail::greedy_attack(inst, detail::GreedyRule::PerIngressOverload, "approach2");
}

/// Better of the two greedy approaches.
inline LossResult maxloss_multiplicative(const SingleHopInstance& inst) {
  LossResult a1 = maxloss_approach1(inst);
  LossResult a2 = maxloss_approach2(inst);
  LossResult& pick = strictly_greater(a1.loss, a2.loss) ? a1 : a2;
  pick.algo = "mul";
  return std::move(pick);
}

/// Repeatedly saturates the next egress at the least arrival rate, committing
/// the ingresses that feed it, until the next saturation needs more than the
/// actual arrival.
inline LossResult maxloss_additive(const SingleHopInstance& inst) {
  const double arrival = inst.total_arrival();
  SingleHopRouting rows = inst.routing;
  if (!(arrival > 0.0)) return make_loss_result(inst, std::move(rows), "add");
  AttackProblem problem = singlehop_to_multihop(inst);
  const Network& net = problem.network;
  const SingleHopLayout layout = layout_of(inst);

  std::vector<char> undecided(inst.ingress_count(), 0);
  int open = 0;
  for (int i = 0; i < inst.ingress_count(); ++i) {
    if (!inst.adversarial[i]) continue;
    if (inst.lambda[i] > 0.0 && !inst.edges[i].empty()) {
      undecided[i] = 1;
      ++open;
    } else {
      rows[i] = detail::fallback_singlehop_row(inst, i);
    }
  }

  std::optional<RoutingMatrix> last;
  while (open > 0) {
    AttackResult res = exact_min_lambda(problem);
    last = res.attack;
    if (!strictly_greater(arrival, res.lambda_star) || !res.saturated_link) break;
    const Link& link = net.link(*res.saturated_link);
    const int j = link.tail - layout.first_egress;
    if (j < 0 || j >= inst.egress_count()) break;
    for (int i = 0; i < inst.ingress_count(); ++i) {
      if (!undecided[i]) continue;
      int k = inst.edge_index(i, j);
      if (k < 0) continue;
      NodeId node = layout.ingress(i);
      if (inst.bounds) {
        rows[i] = rows_from_multihop(inst, net, res.attack)[i];
      } else {
        rows[i].assign(inst.edges[i].size(), 0.0);
        rows[i][k] = 1.0;
      }
      for (std::size_t e = 0; e < inst.edges[i].size(); ++e) {
        LinkId id = net.link_id(node, layout.egress(inst.edges[i][e]));
        problem.default_routing.set_ratio(net, id, rows[i][e]);
      }
      problem.adversarial[node] = 0;
      undecided[i] = 0;
      --open;
    }
    problem.network.set_capacity(*res.saturated_link, kInfinity);
  }
  if (open > 0 && last) {
    SingleHopRouting tail = rows_from_multihop(inst, net, *last);
    for (int i = 0; i < inst.ingress_count(); ++i) {
      if (undecided[i]) rows[i] = tail[i];
    }
  }
  return make_loss_result(inst, std::move(rows), "add");
}

/// Multi-hop form: saturate the next link at the least arrival rate, fix the
/// rows of the undecided adversaries that feed it, lift its capacity, repeat.
inline NetworkLossResult maxloss_additive(const AttackProblem& original, double arrival) {
  AttackProblem problem = original;
  const Network& net = problem.network;
  RoutingMatrix attack(net);
  std::vector<NodeId> open = detail::acting_adversaries(original);
  std::optional<RoutingMatrix> last;
  while (!open.empty()) {
    AttackResult res = exact_min_lambda(problem);
    last = res.attack;
    if (!strictly_greater(arrival, res.lambda_star) || !res.saturated_link) break;
    NodeId tail = net.link(*res.saturated_link).tail;
    std::vector<char> feeds(net.node_count() + 1, 0);
    feeds[tail] = 1;
    for (NodeId u : upstream_set(problem, tail)) feeds[u] = 1;
    RoutingMatrix merged = merge_routing(problem, res.attack);
    auto inflow = detail::node_inflows(net, unit_flows(net, merged));
    std::vector<NodeId> still_open;
    for (NodeId node : open) {
      if (feeds[node] && inflow[node] > 1e-12) {
        attack.copy_row(net, node, res.attack);
        problem.default_routing.copy_row(net, node, res.attack);
        problem.adversarial[node] = 0;
      } else {
        still_open.push_back(node);
      }
    }
    open = std::move(still_open);
    problem.network.set_capacity(*res.saturated_link, kInfinity);
  }
  if (last) {
    for (NodeId node : open) attack.copy_row(net, node, *last);
  }
  return evaluate_loss_attack(original, std::move(attack), arrival, "add");
}

/// Every adversarial ingress sends everything to its connected egress of
/// least service rate (lowest position on ties).
inline LossResult minmu_baseline(const SingleHopInstance& inst) {
  SingleHopRouting rows = inst.routing;
  for (int i = 0; i < inst.ingress_count(); ++i) {
    if (!inst.adversarial[i] || inst.edges[i].empty()) continue;
    std::vector<std::size_t> order(inst.edges[i].size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return inst.mu[inst.edges[i][a]] < inst.mu[inst.edges[i][b]];
    });
    rows[i] = detail::fill_singlehop_row(inst, i, order);
  }
  return make_loss_result(inst, std::move(rows), "minmu");
}

/// Every adversarial ingress sends everything to one uniformly drawn egress.
inline LossResult rand_baseline(const SingleHopInstance& inst, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  SingleHopRouting rows = inst.routing;
  for (int i = 0; i < inst.ingress_count(); ++i) {
    if (!inst.adversarial[i] || inst.edges[i].empty()) continue;
    std::vector<std::size_t> order(inst.edges[i].size());
    std::iota(order.begin(), order.end(), 0);
    std::uniform_int_distribution<std::size_t> pick(0, order.size() - 1);
    std::swap(order[0], order[pick(rng)]);
    rows[i] = detail::fill_singlehop_row(inst, i, order);
  }
  return make_loss_result(inst, std::move(rows), "rand");
}

}  // namespace rattack
