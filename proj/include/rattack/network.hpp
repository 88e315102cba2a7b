#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <queue>
#include <span>
#include <string>
#include <vector>

#include "rattack/core.hpp"

namespace rattack {

struct Link {
  NodeId tail = 0;
  NodeId head = 0;
  double capacity = kInfinity;

  friend bool operator==(const Link&, const Link&) = default;
};

/// Directed single-commodity network. Links are stored sorted by
/// (tail, head); out/in adjacency lists hold link ids in that order.
class Network {
 public:
  Network() = default;

  Network(int node_count, std::vector<Link> links, NodeId source,
          NodeId destination)
      : node_count_(node_count),
        links_(std::move(links)),
        source_(source),
        destination_(destination) {
    if (node_count_ < 1) throw Error("bad-network", "node count must be positive");
    auto check = [&](NodeId id, const char* what) {
      if (id < 1 || id > node_count_) {
        throw Error("bad-network", std::string(what) + " id out of range", id);
      }
    };
    check(source_, "source");
    check(destination_, "destination");
    for (const Link& link : links_) {
      check(link.tail, "link tail");
      check(link.head, "link head");
    }
    std::stable_sort(links_.begin(), links_.end(), [](const Link& a, const Link& b) {
      return a.tail != b.tail ? a.tail < b.tail : a.head < b.head;
    });
    out_.assign(node_count_ + 1, {});
    in_.assign(node_count_ + 1, {});
    for (LinkId id = 0; id < links_.size(); ++id) {
      out_[links_[id].tail].push_back(id);
      in_[links_[id].head].push_back(id);
    }
  }

  int node_count() const { return node_count_; }
  std::size_t link_count() const { return links_.size(); }
  NodeId source() const { return source_; }
  NodeId destination() const { return destination_; }

  const std::vector<Link>& links() const { return links_; }
  const Link& link(LinkId id) const { return links_[id]; }
  double capacity(LinkId id) const { return links_[id].capacity; }

  std::span<const LinkId> out_links(NodeId node) const { return out_[node]; }
  std::span<const LinkId> in_links(NodeId node) const { return in_[node]; }

  std::optional<LinkId> find_link(NodeId tail, NodeId head) const {
    if (tail < 1 || tail > node_count_) return std::nullopt;
    for (LinkId id : out_[tail]) {
      if (links_[id].head == head) return id;
    }
    return std::nullopt;
  }

  LinkId link_id(NodeId tail, NodeId head) const {
    auto id = find_link(tail, head);
    if (!id) throw Error("unknown-link", "no such link", std::nullopt, std::pair{tail, head});
    return *id;
  }

  void set_capacity(LinkId id, double capacity) { links_[id].capacity = capacity; }

 private:
  int node_count_ = 0;
  std::vector<Link> links_;
  NodeId source_ = 1;
  NodeId destination_ = 1;
  std::vector<std::vector<LinkId>> out_;
  std::vector<std::vector<LinkId>> in_;
};

/// Dispatch ratios x_ij indexed by link id, plus a per-node flag telling
/// whether the node's row is defined at all.
class RoutingMatrix {
 public:
  RoutingMatrix() = default;
  explicit RoutingMatrix(const Network& network)
      : ratio_(network.link_count(), 0.0), has_row_(network.node_count() + 1, 0) {}

  bool has_row(NodeId node) const {
    return node >= 0 && static_cast<std::size_t>(node) < has_row_.size() && has_row_[node];
  }
  double ratio(LinkId id) const { return ratio_[id]; }
  const std::vector<double>& ratios() const { return ratio_; }

  void set_ratio(const Network& network, LinkId id, double value) {
    ratio_[id] = value;
    has_row_[network.link(id).tail] = 1;
  }

  /// `values` is aligned with network.out_links(node).
  void set_row(const Network& network, NodeId node, std::span<const double> values) {
    auto out = network.out_links(node);
    for (std::size_t k = 0; k < out.size(); ++k) ratio_[out[k]] = values[k];
    has_row_[node] = 1;
  }

  void set_single(const Network& network, NodeId node, LinkId chosen) {
    for (LinkId id : network.out_links(node)) ratio_[id] = id == chosen ? 1.0 : 0.0;
    has_row_[node] = 1;
  }

  void set_uniform(const Network& network, NodeId node) {
    auto out = network.out_links(node);
    for (LinkId id : out) ratio_[id] = 1.0 / static_cast<double>(out.size());
    has_row_[node] = 1;
  }

  void copy_row(const Network& network, NodeId node, const RoutingMatrix& other) {
    if (!other.has_row(node)) {
      clear_row(network, node);
      return;
    }
    for (LinkId id : network.out_links(node)) ratio_[id] = other.ratio_[id];
    has_row_[node] = 1;
  }

  void clear_row(const Network& network, NodeId node) {
    for (LinkId id : network.out_links(node)) ratio_[id] = 0.0;
    has_row_[node] = 0;
  }

  double row_sum(const Network& network, NodeId node) const {
    double sum = 0.0;
    for (LinkId id : network.out_links(node)) sum += ratio_[id];
    return sum;
  }

 private:
  std::vector<double> ratio_;
  std::vector<char> has_row_;
};

/// Per-link [lower, upper] limits on adversarial dispatch ratios.
struct DispatchBounds {
  std::vector<double> lower;
  std::vector<double> upper;

  DispatchBounds() = default;
  explicit DispatchBounds(const Network& network)
      : lower(network.link_count(), 0.0), upper(network.link_count(), 1.0) {}
};

struct AttackProblem {
  Network network;
  RoutingMatrix default_routing;
  std::vector<char> adversarial;  // indexed by node id
  std::optional<DispatchBounds> bounds;

  AttackProblem() = default;
  AttackProblem(Network net, RoutingMatrix routing, const std::vector<NodeId>& adversaries,
                std::optional<DispatchBounds> dispatch_bounds = std::nullopt)
      : network(std::move(net)),
        default_routing(std::move(routing)),
        adversarial(network.node_count() + 1, 0),
        bounds(std::move(dispatch_bounds)) {
    for (NodeId node : adversaries) {
      if (node < 1 || node > network.node_count()) {
        throw Error("bad-adversary", "adversary id out of range", node);
      }
      adversarial[node] = 1;
    }
  }

  bool is_adversary(NodeId node) const { return adversarial[node] != 0; }

  std::vector<NodeId> adversaries() const {
    std::vector<NodeId> out;
    for (NodeId node = 1; node <= network.node_count(); ++node) {
      if (adversarial[node]) out.push_back(node);
    }
    return out;
  }

  AttackProblem with_adversaries(const std::vector<NodeId>& nodes) const {
    return AttackProblem(network, default_routing, nodes, bounds);
  }

  double lower_bound(LinkId id) const { return bounds ? bounds->lower[id] : 0.0; }
  double upper_bound(LinkId id) const { return bounds ? bounds->upper[id] : 1.0; }
};

struct WeightedPath {
  std::vector<NodeId> nodes;
  double fraction = 0.0;
};

using PathDecomposition = std::vector<WeightedPath>;

struct Violation {
  std::string rule;
  std::string message;
  std::optional<NodeId> node;
  std::optional<std::pair<NodeId, NodeId>> link;

  std::string format() const {
    std::string out = rule + ": " + message;
    if (node) out += " [node=" + std::to_string(*node) + "]";
    if (link) {
      out += " [link=" + std::to_string(link->first) + "," + std::to_string(link->second) + "]";
    }
    return out;
  }
};

namespace detail {

/// Links a node may push traffic on: every out-link for adversarial nodes,
/// positive-ratio links for normal nodes, none at the destination.
inline bool usable(const AttackProblem& problem, LinkId id) {
  const Link& link = problem.network.link(id);
  if (link.tail == problem.network.destination()) return false;
  if (problem.is_adversary(link.tail)) return true;
  return problem.default_routing.has_row(link.tail) &&
         problem.default_routing.ratio(id) > kTolerance;
}

template <class UsableFn>
std::vector<char> reach_forward(const Network& network, NodeId start, UsableFn&& usable_link) {
  std::vector<char> seen(network.node_count() + 1, 0);
  std::vector<NodeId> stack{start};
  seen[start] = 1;
  while (!stack.empty()) {
    NodeId node = stack.back();
    stack.pop_back();
    for (LinkId id : network.out_links(node)) {
      if (!usable_link(id)) continue;
      NodeId head = network.link(id).head;
      if (!seen[head]) {
        seen[head] = 1;
        stack.push_back(head);
      }
    }
  }
  return seen;
}

template <class UsableFn>
std::vector<char> reach_backward(const Network& network, NodeId start, UsableFn&& usable_link) {
  std::vector<char> seen(network.node_count() + 1, 0);
  std::vector<NodeId> stack{start};
  seen[start] = 1;
  while (!stack.empty()) {
    NodeId node = stack.back();
    stack.pop_back();
    for (LinkId id : network.in_links(node)) {
      if (!usable_link(id)) continue;
      NodeId tail = network.link(id).tail;
      if (!seen[tail]) {
        seen[tail] = 1;
        stack.push_back(tail);
      }
    }
  }
  return seen;
}

}  // namespace detail

/// Kahn's algorithm over the links accepted by `usable_link`, always
/// releasing the lowest ready node id first. Returns nullopt on a cycle.
template <class UsableFn>
std::optional<std::vector<NodeId>> topological_order(const Network& network,
                                                     UsableFn&& usable_link) {
  std::vector<int> indegree(network.node_count() + 1, 0);
  for (LinkId id = 0; id < network.link_count(); ++id) {
    if (usable_link(id)) ++indegree[network.link(id).head];
  }
  std::priority_queue<NodeId, std::vector<NodeId>, std::greater<>> ready;
  for (NodeId node = 1; node <= network.node_count(); ++node) {
    if (indegree[node] == 0) ready.push(node);
  }
  std::vector<NodeId> order;
  order.reserve(network.node_count());
  while (!ready.empty()) {
    NodeId node = ready.top();
    ready.pop();
    order.push_back(node);
    for (LinkId id : network.out_links(node)) {
      if (!usable_link(id)) continue;
      if (--indegree[network.link(id).head] == 0) ready.push(network.link(id).head);
    }
  }
  if (static_cast<int>(order.size()) != network.node_count()) return std::nullopt;
  return order;
}

inline std::optional<std::vector<NodeId>> topological_order(const Network& network) {
  return topological_order(network, [](LinkId) { return true; });
}

inline bool is_acyclic(const Network& network) { return topological_order(network).has_value(); }

/// Structural reachability from the source to the destination.
inline bool has_path(const Network& network) {
  auto seen = detail::reach_forward(network, network.source(), [](LinkId) { return true; });
  return seen[network.destination()] != 0;
}

/// True when removing `removed` disconnects source from destination
/// (a removed source or destination trivially counts as a cut).
inline bool is_node_cut(const Network& network, const std::vector<char>& removed) {
  if (removed[network.source()] || removed[network.destination()]) return true;
  auto seen = detail::reach_forward(network, network.source(), [&](LinkId id) {
    return !removed[network.link(id).head];
  });
  return seen[network.destination()] == 0;
}

/// Nodes that may carry traffic: reachable from the source using every link
/// of adversarial nodes and positive-ratio links of normal nodes.
inline std::vector<char> flow_carrying_nodes(const AttackProblem& problem) {
  return detail::reach_forward(problem.network, problem.network.source(),
                               [&](LinkId id) { return detail::usable(problem, id); });
}

inline std::vector<Violation> validate(const AttackProblem& problem) {
  std::vector<Violation> out;
  const Network& net = problem.network;
  const NodeId dest = net.destination();

  if (net.source() == dest) {
    out.push_back({"source-is-destination", "source and destination coincide", net.source(), {}});
  }
  for (LinkId id = 0; id < net.link_count(); ++id) {
    const Link& link = net.link(id);
    std::pair<NodeId, NodeId> ends{link.tail, link.head};
    if (link.tail == link.head) {
      out.push_back({"self-loop", "self-loop link", std::nullopt, ends});
    }
    if (id > 0 && net.link(id - 1).tail == link.tail && net.link(id - 1).head == link.head) {
      out.push_back({"duplicate-link", "link listed more than once", std::nullopt, ends});
    }
    if (std::isnan(link.capacity) || link.capacity <= 0.0) {
      out.push_back({"capacity", "capacity must be positive or inf", std::nullopt, ends});
    }
  }
  if (!has_path(net)) {
    out.push_back({"disconnected", "no directed path from source to destination",
                   std::nullopt, std::nullopt});
  }
  if (problem.is_adversary(dest)) {
    out.push_back({"adversarial-destination", "destination cannot be adversarial", dest, {}});
  }

  const auto carrying = flow_carrying_nodes(problem);
  for (NodeId node = 1; node <= net.node_count(); ++node) {
    if (!carrying[node] || node == dest) continue;
    if (net.out_links(node).empty()) {
      out.push_back({"dead-end", "flow-carrying node has no outgoing link", node, {}});
      continue;
    }
    if (problem.is_adversary(node)) continue;
    if (!problem.default_routing.has_row(node)) {
      out.push_back({"missing-row", "flow-carrying normal node has no routing row", node, {}});
      continue;
    }
    bool in_range = true;
    for (LinkId id : net.out_links(node)) {
      double x = problem.default_routing.ratio(id);
      if (!(x >= -kTolerance && x <= 1.0 + kTolerance)) in_range = false;
    }
    if (!in_range) {
      out.push_back({"ratio-range", "dispatch ratio outside [0,1]", node, {}});
    }
    double sum = problem.default_routing.row_sum(net, node);
    if (std::fabs(sum - 1.0) > kTolerance) {
      out.push_back({"row-sum", "routing row sums to " + std::to_string(sum) + ", not 1", node, {}});
    }
  }
  // Every flow-carrying node must be able to forward to the destination.
  auto to_dest = detail::reach_backward(net, dest, [&](LinkId id) {
    return detail::usable(problem, id);
  });
  for (NodeId node = 1; node <= net.node_count(); ++node) {
    if (carrying[node] && !to_dest[node] && !net.out_links(node).empty()) {
      out.push_back({"trapped", "traffic at this node cannot reach the destination", node, {}});
    }
  }

  if (problem.bounds) {
    const DispatchBounds& b = *problem.bounds;
    if (b.lower.size() != net.link_count() || b.upper.size() != net.link_count()) {
      out.push_back({"bounds", "bounds size does not match link count", std::nullopt, std::nullopt});
      return out;
    }
    for (LinkId id = 0; id < net.link_count(); ++id) {
      const Link& link = net.link(id);
      if (!(0.0 <= b.lower[id] && b.lower[id] <= b.upper[id] + kTolerance && b.upper[id] <= 1.0)) {
        out.push_back({"bounds", "need 0 <= x_min <= x_max <= 1", std::nullopt,
                       std::pair{link.tail, link.head}});
      }
    }
    for (NodeId node : problem.adversaries()) {
      if (node == dest || net.out_links(node).empty()) continue;
      double lo = 0.0, hi = 0.0;
      for (LinkId id : net.out_links(node)) {
        lo += b.lower[id];
        hi += b.upper[id];
      }
      if (lo > 1.0 + kTolerance || hi < 1.0 - kTolerance) {
        out.push_back({"bounds-infeasible", "bounds admit no dispatch row summing to 1", node, {}});
      }
    }
  }
  return out;
}

inline void require_valid(const AttackProblem& problem) {
  auto violations = validate(problem);
  if (!violations.empty()) {
    const Violation& v = violations.front();
    throw Error("invalid-problem", v.rule + ": " + v.message, v.node, v.link);
  }
}

namespace detail {

inline void check_path(const Network& network, const std::vector<NodeId>& path) {
  if (path.size() < 2 || path.front() != network.source() || path.back() != network.destination()) {
    throw Error("invalid-path", "path must run from source to destination");
  }
  for (std::size_t k = 0; k + 1 < path.size(); ++k) {
    if (!network.find_link(path[k], path[k + 1])) {
      throw Error("invalid-path", "path uses a missing link", std::nullopt,
                  std::pair{path[k], path[k + 1]});
    }
  }
}

}  // namespace detail

/// Dispatch ratios induced by a multi-path split: x_ij = beta_ij / beta_i,
/// where beta_ij is the total fraction of paths using (i,j). Nodes on no
/// path with positive weight get no row.
inline RoutingMatrix routing_from_paths(const Network& network, const PathDecomposition& paths) {
  std::vector<double> beta(network.link_count(), 0.0);
  for (const WeightedPath& path : paths) {
    detail::check_path(network, path.nodes);
    if (path.fraction < 0.0) throw Error("invalid-path", "negative path fraction");
    for (std::size_t k = 0; k + 1 < path.nodes.size(); ++k) {
      beta[network.link_id(path.nodes[k], path.nodes[k + 1])] += path.fraction;
    }
  }
  RoutingMatrix routing(network);
  for (NodeId node = 1; node <= network.node_count(); ++node) {
    if (node == network.destination()) continue;
    double total = 0.0;
    for (LinkId id : network.out_links(node)) total += beta[id];
    if (total <= 0.0) continue;
    for (LinkId id : network.out_links(node)) routing.set_ratio(network, id, beta[id] / total);
  }
  return routing;
}

/// Fraction of source traffic that follows `path`: the product of the
/// dispatch ratios along it.
inline double path_fraction(const Network& network, const RoutingMatrix& routing,
                            const std::vector<NodeId>& path) {
  detail::check_path(network, path);
  double fraction = 1.0;
  for (std::size_t k = 0; k + 1 < path.size(); ++k) {
    fraction *= routing.ratio(network.link_id(path[k], path[k + 1]));
  }
  return fraction;
}

/// Default rows for normal nodes, attack rows for adversarial ones. An
/// adversary without an attack row falls back to its recorded default, then
/// to a uniform split.
inline RoutingMatrix merge_routing(const AttackProblem& problem, const RoutingMatrix& attack) {
  const Network& net = problem.network;
  RoutingMatrix merged = problem.default_routing;
  for (NodeId node = 1; node <= net.node_count(); ++node) {
    if (!problem.is_adversary(node) || net.out_links(node).empty()) continue;
    if (attack.has_row(node)) {
      merged.copy_row(net, node, attack);
    } else if (!problem.default_routing.has_row(node)) {
      merged.set_uniform(net, node);
    }
  }
  return merged;
}

}  // namespace rattack
