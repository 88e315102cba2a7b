#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "rattack/core.hpp"
#include "rattack/network.hpp"

namespace rattack {

struct FlowAssignment {
  std::vector<double> flow;    // per link
  std::vector<double> inflow;  // per node, source arrival included
  double arrival = 0.0;
  double delivered = 0.0;
  double loss = 0.0;
};

struct ThroughputReport {
  double lambda_star = kInfinity;
  std::optional<LinkId> saturated_link;
  std::vector<double> unit_flow;  // per link, unit arrival, no capacities
};

namespace detail {

inline bool active(const Network& net, const RoutingMatrix& routing, LinkId id) {
  NodeId tail = net.link(id).tail;
  return tail != net.destination() && routing.has_row(tail) && routing.ratio(id) > 0.0;
}

inline std::vector<char> active_reach(const Network& net, const RoutingMatrix& routing) {
  return reach_forward(net, net.source(), [&](LinkId id) { return active(net, routing, id); });
}

inline std::optional<std::vector<NodeId>> active_order(const Network& net,
                                                       const RoutingMatrix& routing,
                                                       const std::vector<char>& reach) {
  return topological_order(net, [&](LinkId id) {
    return reach[net.link(id).tail] && active(net, routing, id);
  });
}

/// Solves A y = b in place by Gaussian elimination with partial pivoting.
inline bool solve_dense(std::vector<std::vector<double>>& a, std::vector<double>& b) {
  const std::size_t n = b.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::fabs(a[r][col]) > std::fabs(a[pivot][col])) pivot = r;
    }
    if (std::fabs(a[pivot][col]) < 1e-12) return false;
    std::swap(a[pivot], a[col]);
    std::swap(b[pivot], b[col]);
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col || a[r][col] == 0.0) continue;
      double factor = a[r][col] / a[col][col];
      for (std::size_t c = col; c < n; ++c) a[r][c] -= factor * a[col][c];
      b[r] -= factor * b[col];
    }
  }
  for (std::size_t r = 0; r < n; ++r) b[r] /= a[r][r];
  return true;
}

}  // namespace detail

/// Per-link rates under unit arrival with capacities ignored. Forward pass
/// when the positive-ratio support is acyclic, linear solve otherwise.
inline std::vector<double> unit_flows(const Network& net, const RoutingMatrix& routing) {
  std::vector<double> flow(net.link_count(), 0.0);
  const auto reach = detail::active_reach(net, routing);

  if (auto order = detail::active_order(net, routing, reach)) {
    std::vector<double> inflow(net.node_count() + 1, 0.0);
    inflow[net.source()] = 1.0;
    for (NodeId node : *order) {
      if (!reach[node] || node == net.destination() || inflow[node] == 0.0) continue;
      for (LinkId id : net.out_links(node)) {
        if (!detail::active(net, routing, id)) continue;
        flow[id] = inflow[node] * routing.ratio(id);
        inflow[net.link(id).head] += flow[id];
      }
    }
    return flow;
  }

  // y = e_source + X^T y over the reachable nodes.
  std::vector<int> index(net.node_count() + 1, -1);
  std::vector<NodeId> nodes;
  for (NodeId node = 1; node <= net.node_count(); ++node) {
    if (reach[node]) {
      index[node] = static_cast<int>(nodes.size());
      nodes.push_back(node);
    }
  }
  const std::size_t n = nodes.size();
  std::vector<std::vector<double>> a(n, std::vector<double>(n, 0.0));
  std::vector<double> y(n, 0.0);
  for (std::size_t r = 0; r < n; ++r) a[r][r] = 1.0;
  y[index[net.source()]] = 1.0;
  for (LinkId id = 0; id < net.link_count(); ++id) {
    const Link& link = net.link(id);
    if (!reach[link.tail] || !detail::active(net, routing, id)) continue;
    a[index[link.head]][index[link.tail]] -= routing.ratio(id);
  }
  if (!detail::solve_dense(a, y)) {
    throw Error("singular-flow", "flow system is singular under this routing");
  }
  for (LinkId id = 0; id < net.link_count(); ++id) {
    const Link& link = net.link(id);
    if (!reach[link.tail] || !detail::active(net, routing, id)) continue;
    flow[id] = std::max(0.0, y[index[link.tail]]) * routing.ratio(id);
  }
  return flow;
}

/// Utilization of a link carrying `flow` per unit arrival.
inline double utilization(double flow, double capacity) {
  if (flow <= 0.0 || is_infinite(capacity)) return 0.0;
  return flow / capacity;
}

inline ThroughputReport no_loss_throughput(const Network& net, const RoutingMatrix& routing) {
  ThroughputReport report;
  report.unit_flow = unit_flows(net, routing);
  double best = 0.0;
  for (LinkId id = 0; id < net.link_count(); ++id) {
    double u = utilization(report.unit_flow[id], net.capacity(id));
    if (u > 0.0 && strictly_greater(u, best)) {
      best = u;
      report.saturated_link = id;
    }
  }
  report.lambda_star = best > 0.0 ? 1.0 / best : kInfinity;
  return report;
}

inline ThroughputReport no_loss_throughput(const AttackProblem& problem,
                                           const RoutingMatrix& full_routing) {
  return no_loss_throughput(problem.network, full_routing);
}

/// Lossy flow at arrival rate `arrival`: f_ij = min(inflow_i * x_ij, c_ij).
/// Cyclic supports are resolved by monotone iteration from zero flow.
inline FlowAssignment propagate(const Network& net, const RoutingMatrix& routing, double arrival) {
  FlowAssignment out;
  out.arrival = arrival;
  out.flow.assign(net.link_count(), 0.0);
  out.inflow.assign(net.node_count() + 1, 0.0);
  const auto reach = detail::active_reach(net, routing);

  if (auto order = detail::active_order(net, routing, reach)) {
    out.inflow[net.source()] = arrival;
    for (NodeId node : *order) {
      if (!reach[node] || node == net.destination() || out.inflow[node] == 0.0) continue;
      for (LinkId id : net.out_links(node)) {
        if (!detail::active(net, routing, id)) continue;
        out.flow[id] = std::min(out.inflow[node] * routing.ratio(id), net.capacity(id));
        out.inflow[net.link(id).head] += out.flow[id];
      }
    }
  } else {
    const double tol = 1e-10 * std::max(1.0, arrival);
    const int cap = 100000;
    double change = kInfinity;
    int iter = 0;
    for (; iter < cap && change >= tol; ++iter) {
      change = 0.0;
      for (NodeId node = 1; node <= net.node_count(); ++node) {
        if (!reach[node] || node == net.destination()) continue;
        double in = node == net.source() ? arrival : 0.0;
        for (LinkId id : net.in_links(node)) in += out.flow[id];
        for (LinkId id : net.out_links(node)) {
          if (!detail::active(net, routing, id)) continue;
          double next = std::min(in * routing.ratio(id), net.capacity(id));
          change = std::max(change, std::fabs(next - out.flow[id]));
          out.flow[id] = next;
        }
      }
    }
    if (change >= tol) {
      throw Error("no-convergence",
                  "flow iteration did not converge, residual " + std::to_string(change));
    }
    out.inflow[net.source()] = arrival;
    for (LinkId id = 0; id < net.link_count(); ++id) out.inflow[net.link(id).head] += out.flow[id];
  }

  for (LinkId id : net.in_links(net.destination())) out.delivered += out.flow[id];
  out.loss = arrival - out.delivered;
  if (out.loss < 0.0 && out.loss > -1e-9 * std::max(1.0, arrival)) out.loss = 0.0;
  return out;
}

inline FlowAssignment propagate(const AttackProblem& problem, const RoutingMatrix& full_routing,
                                double arrival) {
  return propagate(problem.network, full_routing, arrival);
}

namespace detail {

inline std::vector<NodeId> to_list(const std::vector<char>& mask, NodeId exclude) {
  std::vector<NodeId> out;
  for (NodeId node = 1; node < static_cast<NodeId>(mask.size()); ++node) {
    if (mask[node] && node != exclude) out.push_back(node);
  }
  return out;
}

}  // namespace detail

/// Nodes reachable from `node` along links traffic may use: any link out of
/// an adversarial node, positive-ratio links out of normal nodes.
inline std::vector<NodeId> downstream_set(const AttackProblem& problem, NodeId node) {
  auto seen = detail::reach_forward(problem.network, node,
                                    [&](LinkId id) { return detail::usable(problem, id); });
  return detail::to_list(seen, node);
}

/// Structural variant: every link counts.
inline std::vector<NodeId> downstream_set(const Network& network, NodeId node) {
  auto seen = detail::reach_forward(network, node, [&](LinkId id) {
    return network.link(id).tail != network.destination();
  });
  return detail::to_list(seen, node);
}

inline std::vector<NodeId> upstream_set(const AttackProblem& problem, NodeId node) {
  auto seen = detail::reach_backward(problem.network, node,
                                     [&](LinkId id) { return detail::usable(problem, id); });
  return detail::to_list(seen, node);
}

}  // namespace rattack
