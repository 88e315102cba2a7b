#pragma once

#include <algorithm>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "rattack/core.hpp"
#include "rattack/flow.hpp"
#include "rattack/flow_lp.hpp"
#include "rattack/network.hpp"

namespace rattack {

struct AttackResult {
  RoutingMatrix attack;  // rows for every adversary with outgoing links
  double lambda_star = kInfinity;
  std::optional<LinkId> saturated_link;
  std::string algo;
};

/// Row used when the attack does not care about a node: uniform, or the
/// link-order bounded fill when bounds are present.
inline void set_fallback_row(const AttackProblem& problem, NodeId node, RoutingMatrix& attack) {
  const Network& net = problem.network;
  if (!problem.bounds) {
    attack.set_uniform(net, node);
    return;
  }
  auto out = net.out_links(node);
  fill_bounded_row(problem, node, std::vector<LinkId>(out.begin(), out.end()), attack);
}

/// Outgoing link of minimum capacity; lowest link id on ties.
inline std::optional<LinkId> min_capacity_link(const Network& net, NodeId node) {
  std::optional<LinkId> best;
  for (LinkId id : net.out_links(node)) {
    if (!best || net.capacity(id) < net.capacity(*best)) best = id;
  }
  return best;
}

/// Completes `attack` with merged rows for adversaries it leaves undefined,
/// then scores it on the full problem.
inline AttackResult evaluate_attack(const AttackProblem& problem, RoutingMatrix attack,
                                    std::string algo) {
  const Network& net = problem.network;
  if (attack.ratios().size() != net.link_count()) attack = RoutingMatrix(net);
  RoutingMatrix merged = merge_routing(problem, attack);
  for (NodeId node : problem.adversaries()) {
    if (node != net.destination() && !net.out_links(node).empty() && !attack.has_row(node)) {
      attack.copy_row(net, node, merged);
    }
  }
  ThroughputReport report = no_loss_throughput(net, merged);
  return {std::move(attack), report.lambda_star, report.saturated_link, std::move(algo)};
}

namespace detail {

inline std::vector<NodeId> acting_adversaries(const AttackProblem& problem) {
  std::vector<NodeId> out;
  for (NodeId node : problem.adversaries()) {
    if (node != problem.network.destination() && !problem.network.out_links(node).empty()) {
      out.push_back(node);
    }
  }
  return out;
}

/// Nodes whose inflow depends on some adversary's routing.
inline std::vector<char> influenced_nodes(const AttackProblem& problem) {
  const Network& net = problem.network;
  std::vector<char> mark(net.node_count() + 1, 0);
  std::vector<NodeId> stack;
  for (NodeId adv : acting_adversaries(problem)) {
    for (LinkId id : net.out_links(adv)) {
      NodeId head = net.link(id).head;
      if (!mark[head]) {
        mark[head] = 1;
        stack.push_back(head);
      }
    }
  }
  while (!stack.empty()) {
    NodeId node = stack.back();
    stack.pop_back();
    for (LinkId id : net.out_links(node)) {
      if (!usable(problem, id)) continue;
      NodeId head = net.link(id).head;
      if (!mark[head]) {
        mark[head] = 1;
        stack.push_back(head);
      }
    }
  }
  return mark;
}

inline std::vector<double> node_inflows(const Network& net, const std::vector<double>& link_flow) {
  std::vector<double> inflow(net.node_count() + 1, 0.0);
  inflow[net.source()] = 1.0;
  for (LinkId id = 0; id < net.link_count(); ++id) inflow[net.link(id).head] += link_flow[id];
  return inflow;
}

}  // namespace detail

/// Enumerates every single-link row per adversary and keeps the routing of
/// least no-loss throughput (first combination wins ties).
inline AttackResult brute_force_min_lambda(const AttackProblem& problem,
                                           double combination_cap = 1e6) {
  const Network& net = problem.network;
  if (problem.bounds) {
    throw Error("bounds-unsupported",
                "brute force enumerates single-link rows and cannot honor dispatch bounds; use exact");
  }
  const auto carrying = flow_carrying_nodes(problem);
  std::vector<NodeId> free_nodes;
  RoutingMatrix attack(net);
  for (NodeId node : detail::acting_adversaries(problem)) {
    if (carrying[node]) {
      free_nodes.push_back(node);
    } else {
      attack.set_single(net, node, net.out_links(node).front());
    }
  }
  double combos = 1.0;
  for (NodeId node : free_nodes) combos *= static_cast<double>(net.out_links(node).size());
  if (combos > combination_cap) {
    throw Error("combination-cap", "brute force would enumerate " + std::to_string(combos) +
                                       " routings; use the exact algorithm instead");
  }

  std::vector<std::size_t> choice(free_nodes.size(), 0);
  std::optional<RoutingMatrix> best_attack;
  double best_lambda = kInfinity;
  for (;;) {
    for (std::size_t k = 0; k < free_nodes.size(); ++k) {
      attack.set_single(net, free_nodes[k], net.out_links(free_nodes[k])[choice[k]]);
    }
    try {
      double lambda = no_loss_throughput(net, merge_routing(problem, attack)).lambda_star;
      if (!best_attack || strictly_greater(best_lambda, lambda)) {
        best_lambda = lambda;
        best_attack = attack;
      }
    } catch (const Error& e) {
      if (e.code() != "singular-flow") throw;
    }
    std::size_t k = 0;
    for (; k < free_nodes.size(); ++k) {
      if (++choice[k] < net.out_links(free_nodes[k]).size()) break;
      choice[k] = 0;
    }
    if (k == free_nodes.size()) break;
  }
  if (!best_attack) throw Error("singular-flow", "every enumerated routing is degenerate");
  return evaluate_attack(problem, std::move(*best_attack), "brute");
}

/// Max-flow based exact attack. For each node, the largest inflow the
/// adversaries can steer there times the node's worst outgoing utilization
/// gives the earliest saturation it can cause; the global maximum wins.
inline AttackResult exact_min_lambda(const AttackProblem& problem) {
  const Network& net = problem.network;
  const NodeId dest = net.destination();
  const bool acyclic = is_acyclic(net);
  // With bounds, or when flow can cycle, an adversary's best link is found by
  // maximizing that link's rate directly.
  const bool per_link = problem.bounds.has_value() || !acyclic;

  RoutingMatrix fallback(net);
  for (NodeId node : detail::acting_adversaries(problem)) set_fallback_row(problem, node, fallback);

  auto influenced = detail::influenced_nodes(problem);
  std::optional<std::vector<double>> base_inflow;
  try {
    base_inflow = detail::node_inflows(net, unit_flows(net, merge_routing(problem, fallback)));
  } catch (const Error& e) {
    if (e.code() != "singular-flow") throw;
  }

  struct Candidate {
    NodeId node;
    LinkId link;
    double factor;
  };
  std::vector<Candidate> lp_nodes;

  double best_value = 0.0;
  NodeId best_node = 0;
  std::optional<LinkId> best_link;
  std::optional<MaxFlowResult> best_flows;
  auto consider = [&](NodeId node, double value, LinkId link, std::optional<MaxFlowResult> flows) {
    if (value <= 0.0) return;
    bool better = strictly_greater(value, best_value) ||
                  (best_node != 0 && nearly_equal(value, best_value) && node < best_node);
    if (!better) return;
    best_value = value;
    best_node = node;
    best_link = link;
    best_flows = std::move(flows);
  };

  for (NodeId node = 1; node <= net.node_count(); ++node) {
    if (node == dest || net.out_links(node).empty()) continue;
    LinkId link;
    double factor;
    if (problem.is_adversary(node)) {
      link = *min_capacity_link(net, node);
      factor = is_infinite(net.capacity(link)) ? 0.0 : 1.0 / net.capacity(link);
    } else {
      if (!problem.default_routing.has_row(node)) continue;
      link = net.out_links(node).front();
      factor = -1.0;
      for (LinkId id : net.out_links(node)) {
        double u = utilization(problem.default_routing.ratio(id), net.capacity(id));
        if (factor < 0.0 || strictly_greater(u, factor)) {
          factor = u;
          link = id;
        }
      }
    }
    if (factor <= 0.0) continue;
    bool needs_lp = influenced[node] || !base_inflow || (per_link && problem.is_adversary(node));
    if (!needs_lp) {
      consider(node, (*base_inflow)[node] * factor, link, std::nullopt);
    } else {
      lp_nodes.push_back({node, link, factor});
    }
  }

  std::stable_sort(lp_nodes.begin(), lp_nodes.end(),
                   [](const Candidate& a, const Candidate& b) { return a.factor > b.factor; });
  std::optional<detail::UnitFlowProgram> program;
  for (const Candidate& c : lp_nodes) {
    // Unit arrival on a DAG never puts more than 1 into a node.
    if (acyclic && strictly_greater(best_value, c.factor)) break;
    if (!program) program.emplace(problem);
    if (per_link && problem.is_adversary(c.node)) {
      for (LinkId id : net.out_links(c.node)) {
        if (is_infinite(net.capacity(id))) continue;
        if (acyclic && strictly_greater(best_value, 1.0 / net.capacity(id))) continue;
        MaxFlowResult flows = program->maximize_link(id);
        double value = flows.value / net.capacity(id);
        consider(c.node, value, id, std::move(flows));
      }
    } else {
      MaxFlowResult flows = program->maximize_inflow(c.node);
      double value = flows.inflow[c.node] * c.factor;
      consider(c.node, value, c.link, std::move(flows));
    }
  }

  RoutingMatrix attack = fallback;
  if (best_flows) {
    for (NodeId node : detail::acting_adversaries(problem)) {
      double out = 0.0;
      for (LinkId id : net.out_links(node)) out += best_flows->link_flow[id];
      if (out <= 1e-12) continue;
      for (LinkId id : net.out_links(node)) {
        attack.set_ratio(net, id, best_flows->link_flow[id] / out);
      }
    }
  }
  if (best_node != 0 && problem.is_adversary(best_node) && !per_link) {
    attack.set_single(net, best_node, *best_link);
  }
  return evaluate_attack(problem, std::move(attack), "exact");
}

/// Every adversary sends everything onto its minimum-capacity link (or as
/// much as its upper bound allows, spilling to the next smallest).
inline AttackResult local_min_capacity_attack(const AttackProblem& problem) {
  const Network& net = problem.network;
  RoutingMatrix attack(net);
  for (NodeId node : detail::acting_adversaries(problem)) {
    auto out = net.out_links(node);
    std::vector<LinkId> order(out.begin(), out.end());
    std::stable_sort(order.begin(), order.end(), [&](LinkId a, LinkId b) {
      return net.capacity(a) < net.capacity(b);
    });
    fill_bounded_row(problem, node, order, attack);
  }
  return evaluate_attack(problem, std::move(attack), "local");
}

namespace detail {

/// A problem on a node subset, relabeled in ascending original-id order so
/// link-id tie-breaking is unchanged. Local id 1 may be an added meta-source.
struct Induced {
  AttackProblem problem;
  std::vector<NodeId> original;  // local id -> original id, 0 for the meta-source
  std::vector<NodeId> local;     // original id -> local id, 0 if dropped
};

inline Induced induce(const AttackProblem& base, const std::vector<char>& keep, NodeId source,
                      const RoutingMatrix& rows, const std::vector<char>& adversarial,
                      const std::vector<std::pair<NodeId, double>>* meta_rows) {
  const Network& net = base.network;
  Induced out;
  out.local.assign(net.node_count() + 1, 0);
  out.original.push_back(0);
  if (meta_rows) out.original.push_back(0);
  for (NodeId node = 1; node <= net.node_count(); ++node) {
    if (!keep[node]) continue;
    out.local[node] = static_cast<NodeId>(out.original.size());
    out.original.push_back(node);
  }
  const int count = static_cast<int>(out.original.size()) - 1;
  if (!out.local[net.destination()]) {
    throw Error("no-destination", "destination lies outside the induced subgraph");
  }

  std::vector<Link> links;
  std::vector<std::pair<double, double>> link_bounds;
  if (meta_rows) {
    for (const auto& [node, ratio] : *meta_rows) {
      links.push_back({1, out.local[node], kInfinity});
    }
  }
  std::vector<LinkId> kept;
  for (LinkId id = 0; id < net.link_count(); ++id) {
    const Link& link = net.link(id);
    if (keep[link.tail] && keep[link.head]) {
      links.push_back({out.local[link.tail], out.local[link.head], link.capacity});
      kept.push_back(id);
    }
  }
  NodeId local_source = meta_rows ? 1 : out.local[source];
  Network sub(count, std::move(links), local_source, out.local[net.destination()]);

  RoutingMatrix routing(sub);
  std::vector<NodeId> sub_adv;
  if (meta_rows) {
    for (const auto& [node, ratio] : *meta_rows) {
      routing.set_ratio(sub, sub.link_id(1, out.local[node]), ratio);
    }
  }
  std::optional<DispatchBounds> bounds;
  if (base.bounds) bounds = DispatchBounds(sub);
  for (LinkId id : kept) {
    const Link& link = net.link(id);
    LinkId sid = sub.link_id(out.local[link.tail], out.local[link.head]);
    if (bounds) {
      bounds->lower[sid] = base.bounds->lower[id];
      bounds->upper[sid] = base.bounds->upper[id];
    }
    if (!adversarial[link.tail] && rows.has_row(link.tail)) {
      routing.set_ratio(sub, sid, rows.ratio(id));
    }
  }
  for (NodeId node = 1; node <= net.node_count(); ++node) {
    if (keep[node] && adversarial[node]) sub_adv.push_back(out.local[node]);
  }
  out.problem = AttackProblem(std::move(sub), std::move(routing), sub_adv, std::move(bounds));
  return out;
}

/// Copies the local row of original node `node` back onto `attack`.
inline void lift_row(const Induced& induced, const AttackProblem& base, NodeId node,
                     const RoutingMatrix& local_rows, RoutingMatrix& attack) {
  const Network& net = base.network;
  const Network& sub = induced.problem.network;
  for (LinkId id : net.out_links(node)) {
    NodeId head = net.link(id).head;
    double ratio = 0.0;
    if (induced.local[head]) {
      ratio = local_rows.ratio(sub.link_id(induced.local[node], induced.local[head]));
    }
    attack.set_ratio(net, id, ratio);
  }
}

}  // namespace detail

/// What an attacker sees downstream of its nodes before attacking: the
/// closed subgraph reachable from the adversaries and the loss-free rates
/// measured on it under pre-attack routing.
struct DownstreamView {
  std::vector<char> nodes;         // membership mask of the downstream node set
  RoutingMatrix measured_routing;  // pre-attack rows, adversaries included
  std::vector<double> link_flow;   // measured rate per link (zero outside the view)
  std::vector<double> node_inflow; // measured total arrival per node
  double total = 0.0;              // measured throughput at the destination
};

inline DownstreamView measure_downstream(const AttackProblem& problem,
                                         std::optional<double> arrival = std::nullopt) {
  const Network& net = problem.network;
  DownstreamView view;
  view.nodes.assign(net.node_count() + 1, 0);
  for (NodeId adv : detail::acting_adversaries(problem)) {
    view.nodes[adv] = 1;
    for (NodeId node : downstream_set(problem, adv)) view.nodes[node] = 1;
  }
  for (NodeId adv : problem.adversaries()) view.nodes[adv] = 1;
  view.measured_routing = merge_routing(problem, RoutingMatrix(net));
  double rate = 1.0;
  if (arrival) {
    rate = *arrival;
  } else {
    double lambda = no_loss_throughput(net, view.measured_routing).lambda_star;
    if (!is_infinite(lambda)) rate = std::min(1.0, lambda / 2.0);
  }
  FlowAssignment flows = propagate(net, view.measured_routing, rate);
  if (flows.loss > 1e-9 * std::max(1.0, rate)) {
    throw Error("lossy-measurement", "pre-attack measurement saturates a link");
  }
  view.link_flow.assign(net.link_count(), 0.0);
  for (LinkId id = 0; id < net.link_count(); ++id) {
    const Link& link = net.link(id);
    if (view.nodes[link.tail] && view.nodes[link.head]) view.link_flow[id] = flows.flow[id];
  }
  view.node_inflow = flows.inflow;
  view.total = flows.delivered;
  return view;
}

/// Share of source traffic reaching each adversary without first passing
/// another adversary, from downstream measurements only. Indexed by node id;
/// non-adversaries hold 0.
inline std::vector<double> compute_R(const AttackProblem& problem, const DownstreamView& view) {
  const Network& net = problem.network;
  auto in_view = [&](LinkId id) {
    const Link& link = net.link(id);
    return view.nodes[link.tail] && view.nodes[link.head] && link.tail != net.destination();
  };
  auto order = topological_order(net, in_view);
  if (!order) throw Error("cyclic-downstream", "downstream subgraph of the adversaries has a cycle");

  std::vector<double> ratio(net.link_count(), 0.0);
  for (NodeId node = 1; node <= net.node_count(); ++node) {
    if (!view.nodes[node] || node == net.destination()) continue;
    if (problem.is_adversary(node)) {
      double out = 0.0;
      for (LinkId id : net.out_links(node)) out += view.link_flow[id];
      if (out <= 0.0) continue;
      for (LinkId id : net.out_links(node)) ratio[id] = view.link_flow[id] / out;
    } else if (view.measured_routing.has_row(node)) {
      for (LinkId id : net.out_links(node)) ratio[id] = view.measured_routing.ratio(id);
    }
  }

  std::vector<double> F(net.node_count() + 1, 0.0);
  for (NodeId node = 1; node <= net.node_count(); ++node) {
    if (view.nodes[node]) F[node] = view.node_inflow[node];
  }
  std::vector<char> removed(net.node_count() + 1, 0);
  std::vector<double> R(net.node_count() + 1, 0.0);
  std::vector<double> reach(net.node_count() + 1, 0.0);
  for (std::size_t pos = 0; pos < order->size(); ++pos) {
    NodeId node = (*order)[pos];
    if (!view.nodes[node] || !problem.is_adversary(node)) continue;
    R[node] = view.total > 0.0 ? std::clamp(F[node] / view.total, 0.0, 1.0) : 0.0;
    // Push the node's remaining share forward through what is left of the
    // subgraph and strip it from every node it reaches.
    std::fill(reach.begin(), reach.end(), 0.0);
    reach[node] = F[node];
    for (std::size_t next = pos; next < order->size(); ++next) {
      NodeId u = (*order)[next];
      if (reach[u] == 0.0 || !view.nodes[u] || removed[u] || u == net.destination()) continue;
      for (LinkId id : net.out_links(u)) {
        if (!in_view(id)) continue;
        reach[net.link(id).head] += reach[u] * ratio[id];
      }
    }
    for (NodeId v = 1; v <= net.node_count(); ++v) {
      if (v != node && reach[v] != 0.0) F[v] = std::max(0.0, F[v] - reach[v]);
    }
    removed[node] = 1;
  }
  return R;
}

/// Partial-information attack: feed each adversary its share R of the
/// traffic inside the downstream subgraph and attack that subgraph exactly.
inline AttackResult approx2_min_lambda(const AttackProblem& problem, const DownstreamView& view) {
  const Network& net = problem.network;
  auto R = compute_R(problem, view);
  double total = 0.0;
  std::vector<std::pair<NodeId, double>> meta_rows;
  for (NodeId node : detail::acting_adversaries(problem)) total += R[node];
  RoutingMatrix attack(net);
  if (total <= 0.0) return evaluate_attack(problem, std::move(attack), "approx2");
  for (NodeId node : detail::acting_adversaries(problem)) {
    if (R[node] > 0.0) meta_rows.push_back({node, R[node] / total});
  }
  auto induced = detail::induce(problem, view.nodes, net.source(), view.measured_routing,
                                problem.adversarial, &meta_rows);
  AttackResult local = exact_min_lambda(induced.problem);
  for (NodeId node : detail::acting_adversaries(problem)) {
    if (induced.local[node]) detail::lift_row(induced, problem, node, local.attack, attack);
  }
  return evaluate_attack(problem, std::move(attack), "approx2");
}

inline AttackResult approx2_min_lambda(const AttackProblem& problem) {
  return approx2_min_lambda(problem, measure_downstream(problem));
}

/// Each adversary, from the sink side back, attacks the subgraph it can see
/// below itself on its own, treating already-decided adversaries as fixed.
inline AttackResult distributed_heuristic(const AttackProblem& problem) {
  const Network& net = problem.network;
  auto order = topological_order(net);
  if (!order) throw Error("cyclic-network", "distributed heuristic requires an acyclic network");

  RoutingMatrix attack(net);
  RoutingMatrix rows = problem.default_routing;
  std::vector<char> fixed_as_normal(net.node_count() + 1, 0);
  for (auto it = order->rbegin(); it != order->rend(); ++it) {
    NodeId node = *it;
    if (!problem.is_adversary(node) || node == net.destination() || net.out_links(node).empty()) {
      continue;
    }
    std::vector<char> keep(net.node_count() + 1, 0);
    keep[node] = 1;
    for (NodeId d : downstream_set(problem, node)) keep[d] = 1;
    if (!keep[net.destination()]) {
      set_fallback_row(problem, node, attack);
      rows.copy_row(net, node, attack);
      continue;
    }
    std::vector<char> adversarial(net.node_count() + 1, 0);
    adversarial[node] = 1;
    auto induced = detail::induce(problem, keep, node, rows, adversarial, nullptr);
    AttackResult local = exact_min_lambda(induced.problem);
    detail::lift_row(induced, problem, node, local.attack, attack);
    rows.copy_row(net, node, attack);
  }
  return evaluate_attack(problem, std::move(attack), "distributed");
}

}  // namespace rattack
