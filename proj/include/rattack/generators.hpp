#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "rattack/core.hpp"
#include "rattack/flow_lp.hpp"
#include "rattack/network.hpp"
#include "rattack/node_select.hpp"
#include "rattack/single_hop.hpp"

namespace rattack {

enum class RoutingPolicy { Uniform, Proportional, Ecmp, MaxFlow };

inline RoutingPolicy parse_policy(const std::string& name) {
  if (name == "uniform") return RoutingPolicy::Uniform;
  if (name == "proportional") return RoutingPolicy::Proportional;
  if (name == "ecmp") return RoutingPolicy::Ecmp;
  if (name == "maxflow") return RoutingPolicy::MaxFlow;
  throw Error("bad-config", "unknown routing policy '" + name + "'");
}

inline std::string to_string(RoutingPolicy policy) {
  switch (policy) {
    case RoutingPolicy::Uniform: return "uniform";
    case RoutingPolicy::Proportional: return "proportional";
    case RoutingPolicy::Ecmp: return "ecmp";
    case RoutingPolicy::MaxFlow: return "maxflow";
  }
  return "?";
}

struct GenConfig {
  std::string mode = "multihop";  // multihop | singlehop | selection | setcover
  int nodes = 20;
  int ingress = 8;
  int egress = 8;
  double density = 0.4;
  double cap_min = 1.0;
  double cap_max = 10.0;
  int adversaries = 4;            // multihop |V_A|; single-hop: 0 means every ingress
  RoutingPolicy routing = RoutingPolicy::Uniform;
  double ratio = 2.0;             // sum mu / sum lambda
  std::string uniformity = "hetero";  // hetero | homo
  int budget = 4;                 // selection K
  int elements = 4;               // setcover m
  int sets = 3;                   // setcover n
  int topologies = 1;
  int adversary_sets = 1;
  int capacity_draws = 1;
  std::uint64_t seed = 1;
  std::vector<std::string> algorithms;
  bool timing = false;

  int instance_count() const { return topologies * adversary_sets * capacity_draws; }
};

inline void check_config(const GenConfig& config) {
  auto fail = [](const std::string& msg) { throw Error("bad-config", msg); };
  if (config.mode != "multihop" && config.mode != "singlehop" && config.mode != "selection" &&
      config.mode != "setcover") {
    fail("unknown mode '" + config.mode + "'");
  }
  if (!(config.density > 0.0 && config.density <= 1.0)) fail("density must lie in (0, 1]");
  if (!(config.ratio > 0.0)) fail("ratio must be positive");
  if (!(config.cap_min > 0.0 && config.cap_min <= config.cap_max)) fail("bad capacity range");
  if (config.topologies < 1 || config.adversary_sets < 1 || config.capacity_draws < 1) {
    fail("instance counts must be at least 1");
  }
  if (config.uniformity != "hetero" && config.uniformity != "homo") {
    fail("uniformity must be hetero or homo");
  }
  if (config.mode == "multihop") {
    if (config.nodes < 2) fail("multihop needs at least 2 nodes");
    if (config.adversaries < 0 || config.adversaries > config.nodes - 2) {
      fail("adversary count must lie in [0, N-2]");
    }
  }
  if (config.mode == "singlehop" || config.mode == "selection") {
    if (config.ingress < 1 || config.egress < 1) fail("single-hop needs ingress and egress nodes");
    if (config.adversaries < 0 || config.adversaries > config.ingress) fail("too many adversaries");
  }
  if (config.mode == "selection" && config.budget < 1) fail("budget must be at least 1");
  if (config.mode == "setcover" && (config.elements < 1 || config.sets < 1)) {
    fail("setcover needs elements and sets");
  }
}

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Deterministic seed for a stream tag and index tuple.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t tag, std::uint64_t a,
                                 std::uint64_t b = 0) {
  std::uint64_t state = master;
  std::uint64_t out = splitmix64(state);
  for (std::uint64_t v : {tag, a, b}) {
    state ^= v + 0x632be59bd9b4e019ULL;
    out ^= splitmix64(state);
  }
  return out;
}

struct InstanceSeeds {
  int index = 0;
  std::uint64_t topology = 0;
  std::uint64_t adversary = 0;
  std::uint64_t capacity = 0;
};

/// Instance `index` of the grid topologies x adversary sets x capacity draws.
inline InstanceSeeds instance_seeds(const GenConfig& config, int index) {
  const int per_topology = config.adversary_sets * config.capacity_draws;
  const int t = index / per_topology;
  const int a = (index % per_topology) / config.capacity_draws;
  const int c = index % config.capacity_draws;
  return {index, derive_seed(config.seed, 1, t), derive_seed(config.seed, 2, t, a),
          derive_seed(config.seed, 3, t, c)};
}

namespace detail {

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * std::generate_canonical<double, 53>(rng);
}

inline std::size_t pick_index(std::mt19937_64& rng, std::size_t n) {
  return static_cast<std::size_t>(rng() % n);
}

/// `count` distinct entries of `pool`, sorted.
inline std::vector<int> sample(std::mt19937_64& rng, std::vector<int> pool, int count) {
  for (int k = 0; k < count; ++k) {
    std::size_t r = k + pick_index(rng, pool.size() - k);
    std::swap(pool[k], pool[r]);
  }
  pool.resize(count);
  std::sort(pool.begin(), pool.end());
  return pool;
}

/// Number of min-hop paths from every node to the destination; -1 distance
/// marks nodes that cannot reach it.
inline void min_hop_counts(const Network& net, std::vector<int>& dist, std::vector<double>& count) {
  const int n = net.node_count();
  dist.assign(n + 1, -1);
  count.assign(n + 1, 0.0);
  std::vector<NodeId> queue{net.destination()};
  dist[net.destination()] = 0;
  count[net.destination()] = 1.0;
  for (std::size_t q = 0; q < queue.size(); ++q) {
    NodeId node = queue[q];
    for (LinkId id : net.in_links(node)) {
      NodeId tail = net.link(id).tail;
      if (tail == net.destination()) continue;
      if (dist[tail] < 0) {
        dist[tail] = dist[node] + 1;
        queue.push_back(tail);
      }
      if (dist[tail] == dist[node] + 1) count[tail] += count[node];
    }
  }
}

inline void enumerate_min_hop(const Network& net, const std::vector<int>& dist, NodeId node,
                              std::vector<NodeId>& path, PathDecomposition& out) {
  path.push_back(node);
  if (node == net.destination()) {
    out.push_back({path, 0.0});
  } else {
    for (LinkId id : net.out_links(node)) {
      NodeId head = net.link(id).head;
      if (dist[head] >= 0 && dist[head] + 1 == dist[node]) enumerate_min_hop(net, dist, head, path, out);
    }
  }
  path.pop_back();
}

}  // namespace detail

/// Default dispatch rows for every node except the destination.
inline RoutingMatrix default_routing(const Network& net, RoutingPolicy policy,
                                     double ecmp_path_cap = 1e5) {
  RoutingMatrix routing(net);
  const NodeId dest = net.destination();
  switch (policy) {
    case RoutingPolicy::Uniform:
      for (NodeId node = 1; node <= net.node_count(); ++node) {
        if (node != dest && !net.out_links(node).empty()) routing.set_uniform(net, node);
      }
      break;
    case RoutingPolicy::Proportional:
      for (NodeId node = 1; node <= net.node_count(); ++node) {
        auto out = net.out_links(node);
        if (node == dest || out.empty()) continue;
        int infinite = 0;
        double total = 0.0;
        for (LinkId id : out) {
          if (is_infinite(net.capacity(id))) ++infinite;
          else total += net.capacity(id);
        }
        for (LinkId id : out) {
          double share = infinite > 0 ? (is_infinite(net.capacity(id)) ? 1.0 / infinite : 0.0)
                                      : (total > 0.0 ? net.capacity(id) / total : 1.0 / out.size());
          routing.set_ratio(net, id, share);
        }
      }
      break;
    case RoutingPolicy::Ecmp: {
      std::vector<int> dist;
      std::vector<double> count;
      detail::min_hop_counts(net, dist, count);
      if (dist[net.source()] < 0) throw Error("disconnected", "no source-destination path");
      if (count[net.source()] > ecmp_path_cap) {
        throw Error("ecmp-path-cap", "too many min-hop paths for ECMP enumeration");
      }
      PathDecomposition paths;
      std::vector<NodeId> scratch;
      detail::enumerate_min_hop(net, dist, net.source(), scratch, paths);
      for (auto& path : paths) path.fraction = 1.0 / static_cast<double>(paths.size());
      routing = routing_from_paths(net, paths);
      // Nodes off every source path split by their own min-hop path counts.
      for (NodeId node = 1; node <= net.node_count(); ++node) {
        if (node == dest || routing.has_row(node) || net.out_links(node).empty()) continue;
        if (dist[node] < 0) {
          routing.set_uniform(net, node);
          continue;
        }
        for (LinkId id : net.out_links(node)) {
          NodeId head = net.link(id).head;
          bool on = dist[head] >= 0 && dist[head] + 1 == dist[node];
          routing.set_ratio(net, id, on ? count[head] / count[node] : 0.0);
        }
      }
      break;
    }
    case RoutingPolicy::MaxFlow: {
      MaxFlowResult flow = max_throughput_flow(net);
      for (NodeId node = 1; node <= net.node_count(); ++node) {
        auto out = net.out_links(node);
        if (node == dest || out.empty()) continue;
        double total = 0.0;
        for (LinkId id : out) total += flow.link_flow[id];
        if (total <= 1e-12) {
          routing.set_uniform(net, node);
          continue;
        }
        for (LinkId id : out) routing.set_ratio(net, id, std::max(flow.link_flow[id], 0.0) / total);
      }
      break;
    }
  }
  return routing;
}

/// Random DAG on nodes 1..N (source 1, destination N) with links i -> j,
/// i < j, each present with probability p. A node left without out-links
/// gets one to a uniformly drawn later node.
inline AttackProblem gen_multihop(const GenConfig& config, const InstanceSeeds& seeds) {
  const int n = config.nodes;
  std::mt19937_64 topo(seeds.topology);
  std::vector<std::pair<NodeId, NodeId>> pairs;
  bool connected = false;
  for (int draw = 0; draw < 10000 && !connected; ++draw) {
    pairs.clear();
    for (NodeId i = 1; i < n; ++i) {
      bool any = false;
      for (NodeId j = i + 1; j <= n; ++j) {
        if (std::generate_canonical<double, 53>(topo) < config.density) {
          pairs.push_back({i, j});
          any = true;
        }
      }
      if (!any) pairs.push_back({i, static_cast<NodeId>(i + 1 + detail::pick_index(topo, n - i))});
    }
    Network probe(n, [&] {
      std::vector<Link> links;
      for (auto [i, j] : pairs) links.push_back({i, j, 1.0});
      return links;
    }(), 1, n);
    connected = has_path(probe);
  }
  if (!connected) throw Error("generator-rejection", "no connected topology after 10^4 draws");

  std::mt19937_64 caps(seeds.capacity);
  std::vector<Link> links;
  for (auto [i, j] : pairs) links.push_back({i, j, detail::uniform(caps, config.cap_min, config.cap_max)});
  Network net(n, std::move(links), 1, n);

  std::mt19937_64 adv(seeds.adversary);
  std::vector<int> pool;
  for (NodeId node = 2; node < n; ++node) pool.push_back(node);
  std::vector<int> chosen = detail::sample(adv, pool, config.adversaries);

  RoutingMatrix routing = default_routing(net, config.routing);
  return AttackProblem(std::move(net), std::move(routing), std::vector<NodeId>(chosen.begin(), chosen.end()));
}

/// Random bipartite instance. Default rows are uniform over each ingress's
/// edges; `adversaries` = 0 hijacks every ingress.
inline SingleHopInstance gen_singlehop(const GenConfig& config, const InstanceSeeds& seeds) {
  const int ns = config.ingress, nd = config.egress;
  SingleHopInstance inst;
  std::mt19937_64 topo(seeds.topology);
  inst.edges.resize(ns);
  for (int i = 0; i < ns; ++i) {
    for (int j = 0; j < nd; ++j) {
      if (std::generate_canonical<double, 53>(topo) < config.density) inst.edges[i].push_back(j);
    }
    if (inst.edges[i].empty()) inst.edges[i].push_back(static_cast<int>(detail::pick_index(topo, nd)));
  }

  std::mt19937_64 rates(seeds.capacity);
  inst.lambda.resize(ns);
  for (double& l : inst.lambda) l = 1.0 - std::generate_canonical<double, 53>(rates);
  inst.mu.resize(nd);
  for (double& m : inst.mu) {
    m = config.uniformity == "homo" ? detail::uniform(rates, 1.0, 1.1)
                                    : 1.0 - std::generate_canonical<double, 53>(rates);
  }
  double sum_lambda = 0.0, sum_mu = 0.0;
  for (double l : inst.lambda) sum_lambda += l;
  for (double m : inst.mu) sum_mu += m;
  for (double& m : inst.mu) m *= config.ratio * sum_lambda / sum_mu;

  inst.adversarial.assign(ns, 0);
  if (config.adversaries == 0 || config.adversaries == ns) {
    std::fill(inst.adversarial.begin(), inst.adversarial.end(), 1);
  } else {
    std::mt19937_64 adv(seeds.adversary);
    std::vector<int> pool(ns);
    std::iota(pool.begin(), pool.end(), 0);
    for (int i : detail::sample(adv, pool, config.adversaries)) inst.adversarial[i] = 1;
  }
  inst.routing.resize(ns);
  for (int i = 0; i < ns; ++i) {
    inst.routing[i].assign(inst.edges[i].size(), 1.0 / static_cast<double>(inst.edges[i].size()));
  }
  normalize(inst);
  return inst;
}

/// Selection pool over every ingress of a fresh single-hop draw.
inline SingleHopSelection gen_selection(const GenConfig& config, const InstanceSeeds& seeds) {
  SingleHopSelection out;
  out.base = gen_singlehop(config, seeds);
  std::fill(out.base.adversarial.begin(), out.base.adversarial.end(), 0);
  for (int i = 0; i < out.base.ingress_count(); ++i) out.candidates.push_back(i);
  out.budget = config.budget;
  return out;
}

/// membership[j] lists the elements (0-based) of set j.
using SetFamily = std::vector<std::vector<int>>;

inline void check_cover(int elements, const SetFamily& sets) {
  std::vector<char> covered(elements, 0);
  for (const auto& set : sets) {
    for (int e : set) {
      if (e < 0 || e >= elements) throw Error("bad-setcover", "element index out of range");
      covered[e] = 1;
    }
  }
  for (int e = 0; e < elements; ++e) {
    if (!covered[e]) throw Error("uncovered-element", "element " + std::to_string(e + 1) + " is in no set");
  }
}

/// Random family where each element joins each set with probability p and
/// is forced into one uniform set if it joined none.
inline SetFamily gen_set_family(int elements, int sets, double density, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  SetFamily family(sets);
  for (int e = 0; e < elements; ++e) {
    bool any = false;
    for (int j = 0; j < sets; ++j) {
      if (std::generate_canonical<double, 53>(rng) < density) {
        family[j].push_back(e);
        any = true;
      }
    }
    if (!any) {
      int j = static_cast<int>(detail::pick_index(rng, sets));
      family[j].push_back(e);
      std::sort(family[j].begin(), family[j].end());
    }
  }
  return family;
}

/// Loss instance: one unit-rate ingress per element, one unit-service egress
/// per set, an edge for each membership, every ingress hijacked.
inline SingleHopInstance setcover_loss_instance(int elements, const SetFamily& sets) {
  check_cover(elements, sets);
  SingleHopInstance inst;
  inst.lambda.assign(elements, 1.0);
  inst.mu.assign(sets.size(), 1.0);
  inst.edges.resize(elements);
  for (std::size_t j = 0; j < sets.size(); ++j) {
    for (int e : sets[j]) inst.edges[e].push_back(static_cast<int>(j));
  }
  inst.adversarial.assign(elements, 1);
  inst.routing.resize(elements);
  for (int i = 0; i < elements; ++i) {
    std::sort(inst.edges[i].begin(), inst.edges[i].end());
    inst.edges[i].erase(std::unique(inst.edges[i].begin(), inst.edges[i].end()), inst.edges[i].end());
    inst.routing[i].assign(inst.edges[i].size(), 1.0 / static_cast<double>(inst.edges[i].size()));
  }
  normalize(inst);
  return inst;
}

/// Node ids of the selection construction.
struct SetCoverLayout {
  int elements = 0;
  int sets = 0;
  NodeId source() const { return 1; }
  NodeId element(int e) const { return 2 + e; }
  NodeId set(int j) const { return 2 + elements + j; }
  NodeId collector() const { return 2 + elements + sets; }
  NodeId sink() const { return 3 + elements + sets; }
};

/// Selection instance: the loss construction plus a sink T that every
/// element and set node feeds by default, and a collector d0 -> T of
/// capacity 1. Every other link is unlimited.
inline SelectionProblem setcover_selection_problem(int elements, const SetFamily& sets, int budget) {
  check_cover(elements, sets);
  SetCoverLayout layout{elements, static_cast<int>(sets.size())};
  std::vector<Link> links;
  for (int e = 0; e < elements; ++e) {
    links.push_back({layout.source(), layout.element(e), kInfinity});
    links.push_back({layout.element(e), layout.sink(), kInfinity});
  }
  for (std::size_t j = 0; j < sets.size(); ++j) {
    for (int e : sets[j]) links.push_back({layout.element(e), layout.set(static_cast<int>(j)), kInfinity});
    links.push_back({layout.set(static_cast<int>(j)), layout.collector(), kInfinity});
    links.push_back({layout.set(static_cast<int>(j)), layout.sink(), kInfinity});
  }
  links.push_back({layout.collector(), layout.sink(), 1.0});
  std::sort(links.begin(), links.end(), [](const Link& a, const Link& b) {
    return a.tail != b.tail ? a.tail < b.tail : a.head < b.head;
  });
  links.erase(std::unique(links.begin(), links.end()), links.end());
  Network net(layout.sink(), std::move(links), layout.source(), layout.sink());
  RoutingMatrix routing(net);
  for (int e = 0; e < elements; ++e) {
    routing.set_ratio(net, net.link_id(layout.source(), layout.element(e)), 1.0 / elements);
    routing.set_single(net, layout.element(e), net.link_id(layout.element(e), layout.sink()));
  }
  for (std::size_t j = 0; j < sets.size(); ++j) {
    NodeId d = layout.set(static_cast<int>(j));
    routing.set_single(net, d, net.link_id(d, layout.sink()));
  }
  routing.set_single(net, layout.collector(), net.link_id(layout.collector(), layout.sink()));

  SelectionProblem out;
  out.base = AttackProblem(std::move(net), std::move(routing), {});
  for (int e = 0; e < elements; ++e) out.candidates.push_back(layout.element(e));
  for (std::size_t j = 0; j < sets.size(); ++j) out.candidates.push_back(layout.set(static_cast<int>(j)));
  out.budget = budget;
  out.objective = Objective::MinLambda;
  return out;
}

}  // namespace rattack
