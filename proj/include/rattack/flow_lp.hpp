#pragma once

#include <optional>
#include <vector>

#include "rattack/core.hpp"
#include "rattack/flow.hpp"
#include "rattack/network.hpp"
#include "rattack/simplex.hpp"

namespace rattack {

struct MaxFlowResult {
  double value = 0.0;
  std::vector<double> link_flow;  // per link
  std::vector<double> inflow;     // per node
};

/// Writes a row that respects the dispatch bounds: lower bounds first, then
/// the remaining mass poured into links in `preference` order.
inline void fill_bounded_row(const AttackProblem& problem, NodeId node,
                             const std::vector<LinkId>& preference, RoutingMatrix& attack) {
  const Network& net = problem.network;
  double remaining = 1.0;
  for (LinkId id : net.out_links(node)) {
    attack.set_ratio(net, id, problem.lower_bound(id));
    remaining -= problem.lower_bound(id);
  }
  for (LinkId id : preference) {
    if (remaining <= 0.0) break;
    double add = std::min(remaining, problem.upper_bound(id) - problem.lower_bound(id));
    if (add <= 0.0) continue;
    attack.set_ratio(net, id, attack.ratio(id) + add);
    remaining -= add;
  }
}

namespace detail {

/// Largest unit-arrival flow the adversaries can steer into a node or onto
/// one of their links, capacities ignored. On a DAG this is the best chance
/// of reaching the node, found by a backward pass where each adversary picks
/// its best feasible row; with cycles it falls back to a flow LP whose
/// variables are one inflow per node plus one flow per adversarial out-link.
class UnitFlowProgram {
 public:
  explicit UnitFlowProgram(const AttackProblem& problem, bool force_lp = false) : problem_(problem) {
    if (force_lp) return;
    if (auto order = topological_order(problem.network)) order_ = std::move(*order);
  }

  MaxFlowResult maximize_inflow(NodeId target) {
    if (order_.empty()) return run_lp(target - 1);
    MaxFlowResult out = forward(best_rows(target), std::nullopt);
    out.value = out.inflow[target];
    return out;
  }

  MaxFlowResult maximize_link(LinkId id) {
    const Network& net = problem_.network;
    const NodeId tail = net.link(id).tail;
    if (tail == net.destination() || !problem_.is_adversary(tail)) {
      throw Error("lp-malformed", "link is not adversarial");
    }
    if (order_.empty()) {
      build_lp();
      return run_lp(adv_var_[id]);
    }
    RoutingMatrix rows = best_rows(tail);
    // Everything the bounds allow onto `id`, the rest in link order.
    std::vector<LinkId> pref{id};
    for (LinkId other : net.out_links(tail)) {
      if (other != id) pref.push_back(other);
    }
    fill_bounded_row(problem_, tail, pref, rows);
    return forward(rows, id);
  }

 private:
  /// Adversary rows maximizing the chance of reaching `target`.
  RoutingMatrix best_rows(NodeId target) const {
    const Network& net = problem_.network;
    std::vector<double> reach(net.node_count() + 1, 0.0);
    RoutingMatrix rows(net);
    for (auto it = order_.rbegin(); it != order_.rend(); ++it) {
      const NodeId u = *it;
      if (u == net.destination() || net.out_links(u).empty()) {
        if (u == target) reach[u] = 1.0;
        continue;
      }
      if (problem_.is_adversary(u)) {
        std::vector<LinkId> pref(net.out_links(u).begin(), net.out_links(u).end());
        std::stable_sort(pref.begin(), pref.end(),
                         [&](LinkId a, LinkId b) { return reach[net.link(a).head] > reach[net.link(b).head]; });
        fill_bounded_row(problem_, u, pref, rows);
      }
      if (u == target) {
        reach[u] = 1.0;
      } else if (problem_.is_adversary(u)) {
        for (LinkId id : net.out_links(u)) reach[u] += rows.ratio(id) * reach[net.link(id).head];
      } else if (problem_.default_routing.has_row(u)) {
        for (LinkId id : net.out_links(u)) reach[u] += problem_.default_routing.ratio(id) * reach[net.link(id).head];
      }
    }
    return rows;
  }

  /// Unit flow from the source under the default rows and `rows` at the
  /// adversaries.
  MaxFlowResult forward(const RoutingMatrix& rows, std::optional<LinkId> objective_link) const {
    const Network& net = problem_.network;
    MaxFlowResult out;
    out.link_flow.assign(net.link_count(), 0.0);
    out.inflow.assign(net.node_count() + 1, 0.0);
    out.inflow[net.source()] = 1.0;
    for (NodeId u : order_) {
      if (u == net.destination() || out.inflow[u] == 0.0) continue;
      const bool adv = problem_.is_adversary(u);
      if (!adv && !problem_.default_routing.has_row(u)) continue;
      for (LinkId id : net.out_links(u)) {
        double x = adv ? rows.ratio(id) : problem_.default_routing.ratio(id);
        out.link_flow[id] = out.inflow[u] * x;
        out.inflow[net.link(id).head] += out.link_flow[id];
      }
    }
    out.value = objective_link ? out.link_flow[*objective_link] : 0.0;
    return out;
  }

  void build_lp() {
    if (lp_built_) return;
    lp_built_ = true;
    const AttackProblem& problem = problem_;
    const Network& net = problem.network;
    const NodeId dest = net.destination();
    lp_ = LinearProgram(net.node_count());
    adv_var_.assign(net.link_count(), -1);
    for (LinkId id = 0; id < net.link_count(); ++id) {
      NodeId tail = net.link(id).tail;
      if (tail != dest && problem.is_adversary(tail)) adv_var_[id] = lp_.add_variable();
    }
    for (NodeId node = 1; node <= net.node_count(); ++node) {
      std::vector<std::pair<int, double>> terms{{node - 1, 1.0}};
      for (LinkId id : net.in_links(node)) {
        NodeId tail = net.link(id).tail;
        if (tail == dest) continue;
        if (adv_var_[id] >= 0) {
          terms.push_back({adv_var_[id], -1.0});
        } else if (problem.default_routing.has_row(tail) && problem.default_routing.ratio(id) != 0.0) {
          terms.push_back({tail - 1, -problem.default_routing.ratio(id)});
        }
      }
      lp_.add_constraint(std::move(terms), Sense::Equal, node == net.source() ? 1.0 : 0.0);
    }
    for (NodeId node = 1; node <= net.node_count(); ++node) {
      if (node == dest || !problem.is_adversary(node) || net.out_links(node).empty()) continue;
      std::vector<std::pair<int, double>> terms{{node - 1, -1.0}};
      for (LinkId id : net.out_links(node)) terms.push_back({adv_var_[id], 1.0});
      lp_.add_constraint(std::move(terms), Sense::Equal, 0.0);
      if (!problem.bounds) continue;
      for (LinkId id : net.out_links(node)) {
        double lo = problem.bounds->lower[id];
        double hi = problem.bounds->upper[id];
        if (hi < 1.0) lp_.add_constraint({{adv_var_[id], 1.0}, {node - 1, -hi}}, Sense::LessEqual, 0.0);
        if (lo > 0.0) lp_.add_constraint({{node - 1, lo}, {adv_var_[id], -1.0}}, Sense::LessEqual, 0.0);
      }
    }
  }

  MaxFlowResult run_lp(int objective_var) {
    build_lp();
    const Network& net = problem_.network;
    for (int v = 0; v < lp_.variable_count(); ++v) lp_.set_objective(v, v == objective_var ? 1.0 : 0.0);
    LPSolution sol = solve(lp_);
    if (sol.status == LPStatus::Unbounded) {
      throw Error("unbounded-flow",
                  "adversarial routing can circulate unbounded flow; flow LP has no optimum");
    }
    if (sol.status == LPStatus::Infeasible) {
      throw Error("infeasible-flow", "flow system admits no conserving solution");
    }
    MaxFlowResult out;
    out.link_flow.assign(net.link_count(), 0.0);
    out.inflow.assign(net.node_count() + 1, 0.0);
    for (NodeId node = 1; node <= net.node_count(); ++node) out.inflow[node] = sol.x[node - 1];
    for (LinkId id = 0; id < net.link_count(); ++id) {
      NodeId tail = net.link(id).tail;
      if (tail == net.destination()) continue;
      if (adv_var_[id] >= 0) {
        out.link_flow[id] = sol.x[adv_var_[id]];
      } else if (problem_.default_routing.has_row(tail)) {
        out.link_flow[id] = out.inflow[tail] * problem_.default_routing.ratio(id);
      }
    }
    out.value = sol.objective;
    return out;
  }

  const AttackProblem& problem_;
  std::vector<NodeId> order_;  // empty means LP
  bool lp_built_ = false;
  LinearProgram lp_;
  std::vector<int> adv_var_;
};

}  // namespace detail

/// Largest inflow the adversaries can steer into `target` under unit
/// arrival at the source, capacities ignored.
inline MaxFlowResult max_flow_to_node(const AttackProblem& problem, NodeId target) {
  if (target == problem.network.destination()) {
    throw Error("bad-target", "max flow target must not be the destination", target);
  }
  detail::UnitFlowProgram program(problem);
  MaxFlowResult result = program.maximize_inflow(target);
  result.value = result.inflow[target];
  return result;
}

/// Largest rate adversarial link `id` can carry under unit arrival.
inline MaxFlowResult max_flow_on_link(const AttackProblem& problem, LinkId id) {
  detail::UnitFlowProgram program(problem);
  return program.maximize_link(id);
}

/// Classic capacitated max flow from source to destination, as link rates.
inline MaxFlowResult max_throughput_flow(const Network& net) {
  LinearProgram lp(static_cast<int>(net.link_count()));
  for (LinkId id = 0; id < net.link_count(); ++id) {
    const Link& link = net.link(id);
    if (link.tail == net.destination()) lp.set_upper_bound(static_cast<int>(id), 0.0);
    else if (!is_infinite(link.capacity)) lp.set_upper_bound(static_cast<int>(id), link.capacity);
    if (link.head == net.destination()) lp.set_objective(static_cast<int>(id), 1.0);
  }
  for (NodeId node = 1; node <= net.node_count(); ++node) {
    if (node == net.source() || node == net.destination()) continue;
    std::vector<std::pair<int, double>> terms;
    for (LinkId id : net.in_links(node)) terms.push_back({static_cast<int>(id), 1.0});
    for (LinkId id : net.out_links(node)) terms.push_back({static_cast<int>(id), -1.0});
    if (!terms.empty()) lp.add_constraint(std::move(terms), Sense::Equal, 0.0);
  }
  // Nothing may flow back into the source.
  for (LinkId id : net.in_links(net.source())) lp.set_upper_bound(static_cast<int>(id), 0.0);
  LPSolution sol = solve(lp);
  if (sol.status == LPStatus::Unbounded) {
    throw Error("unbounded-flow", "source-destination path of infinite capacity");
  }
  if (sol.status != LPStatus::Optimal) throw Error("infeasible-flow", "max flow LP failed");
  MaxFlowResult out;
  out.link_flow = sol.x;
  out.inflow.assign(net.node_count() + 1, 0.0);
  for (LinkId id = 0; id < net.link_count(); ++id) out.inflow[net.link(id).head] += sol.x[id];
  out.inflow[net.source()] += sol.objective;
  out.value = sol.objective;
  return out;
}

}  // namespace rattack
