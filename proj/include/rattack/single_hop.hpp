#pragma once

#include <algorithm>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rattack/core.hpp"
#include "rattack/network.hpp"

namespace rattack {

/// Per-ingress dispatch rows, each aligned with that ingress's edge list.
using SingleHopRouting = std::vector<std::vector<double>>;

/// Bipartite ingress/egress network. Ingress and egress are addressed by
/// position; `ingress_ids` / `egress_ids` keep the external labels.
struct SingleHopInstance {
  std::vector<double> lambda;                // arrival per ingress
  std::vector<double> mu;                    // service per egress
  std::vector<std::vector<int>> edges;       // ingress -> ascending egress positions
  std::vector<char> adversarial;             // per ingress
  SingleHopRouting routing;                  // default rows (used for normal ingress)
  std::optional<std::vector<std::vector<std::pair<double, double>>>> bounds;
  std::vector<int> ingress_ids;
  std::vector<int> egress_ids;

  int ingress_count() const { return static_cast<int>(lambda.size()); }
  int egress_count() const { return static_cast<int>(mu.size()); }
  double total_arrival() const { return std::accumulate(lambda.begin(), lambda.end(), 0.0); }

  double lower(int i, std::size_t k) const { return bounds ? (*bounds)[i][k].first : 0.0; }
  double upper(int i, std::size_t k) const { return bounds ? (*bounds)[i][k].second : 1.0; }

  /// Position of egress `j` in ingress `i`'s edge list, or -1.
  int edge_index(int i, int j) const {
    auto it = std::lower_bound(edges[i].begin(), edges[i].end(), j);
    return it != edges[i].end() && *it == j ? static_cast<int>(it - edges[i].begin()) : -1;
  }
};

/// Fills ids, sorts edge lists and sizes the optional fields.
inline void normalize(SingleHopInstance& inst) {
  const int ns = inst.ingress_count();
  if (static_cast<int>(inst.edges.size()) != ns) inst.edges.resize(ns);
  if (inst.ingress_ids.empty()) {
    for (int i = 0; i < ns; ++i) inst.ingress_ids.push_back(i + 1);
  }
  if (inst.egress_ids.empty()) {
    for (int j = 0; j < inst.egress_count(); ++j) inst.egress_ids.push_back(j + 1);
  }
  inst.adversarial.resize(ns, 0);
  inst.routing.resize(ns);
  for (int i = 0; i < ns; ++i) {
    auto& e = inst.edges[i];
    if (!std::is_sorted(e.begin(), e.end())) {
      // Keep rows aligned while sorting.
      std::vector<std::size_t> perm(e.size());
      std::iota(perm.begin(), perm.end(), 0);
      std::sort(perm.begin(), perm.end(), [&](std::size_t a, std::size_t b) { return e[a] < e[b]; });
      auto permute = [&](auto& v) {
        if (v.size() != e.size()) return;
        auto copy = v;
        for (std::size_t k = 0; k < perm.size(); ++k) v[k] = copy[perm[k]];
      };
      permute(inst.routing[i]);
      if (inst.bounds) permute((*inst.bounds)[i]);
      permute(e);
    }
    if (inst.routing[i].size() != e.size()) inst.routing[i].assign(e.size(), 0.0);
  }
}

inline std::vector<std::string> validate_singlehop(const SingleHopInstance& inst) {
  std::vector<std::string> out;
  const int ns = inst.ingress_count();
  for (int j = 0; j < inst.egress_count(); ++j) {
    if (!(inst.mu[j] >= 0.0)) out.push_back("egress " + std::to_string(inst.egress_ids[j]) + ": mu must be >= 0");
  }
  for (int i = 0; i < ns; ++i) {
    std::string who = "ingress " + std::to_string(inst.ingress_ids[i]);
    if (!(inst.lambda[i] >= 0.0)) out.push_back(who + ": lambda must be >= 0");
    if (inst.lambda[i] > 0.0 && inst.edges[i].empty()) out.push_back(who + ": positive arrival but no edge");
    for (std::size_t k = 0; k < inst.edges[i].size(); ++k) {
      int j = inst.edges[i][k];
      if (j < 0 || j >= inst.egress_count()) out.push_back(who + ": edge to unknown egress");
      if (k > 0 && inst.edges[i][k - 1] == j) out.push_back(who + ": duplicate edge");
    }
    if (!inst.adversarial[i] && inst.lambda[i] > 0.0 && !inst.edges[i].empty()) {
      double sum = std::accumulate(inst.routing[i].begin(), inst.routing[i].end(), 0.0);
      if (std::fabs(sum - 1.0) > kTolerance) out.push_back(who + ": routing row sums to " + std::to_string(sum));
    }
    if (inst.bounds && inst.adversarial[i] && !inst.edges[i].empty()) {
      double lo = 0.0, hi = 0.0;
      for (std::size_t k = 0; k < inst.edges[i].size(); ++k) {
        auto [l, h] = (*inst.bounds)[i][k];
        if (!(0.0 <= l && l <= h && h <= 1.0)) out.push_back(who + ": need 0 <= x_min <= x_max <= 1");
        lo += l;
        hi += h;
      }
      if (lo > 1.0 + kTolerance || hi < 1.0 - kTolerance) out.push_back(who + ": bounds admit no row");
    }
  }
  return out;
}

struct EgressLoad {
  std::vector<double> load;
  std::vector<double> overload;
  double loss = 0.0;
};

/// Egress arrivals and overloads when every ingress follows `rows`.
inline EgressLoad evaluate_rows(const SingleHopInstance& inst, const SingleHopRouting& rows) {
  EgressLoad out;
  out.load.assign(inst.egress_count(), 0.0);
  out.overload.assign(inst.egress_count(), 0.0);
  for (int i = 0; i < inst.ingress_count(); ++i) {
    for (std::size_t k = 0; k < inst.edges[i].size(); ++k) {
      out.load[inst.edges[i][k]] += inst.lambda[i] * rows[i][k];
    }
  }
  for (int j = 0; j < inst.egress_count(); ++j) {
    out.overload[j] = std::max(out.load[j] - inst.mu[j], 0.0);
    out.loss += out.overload[j];
  }
  return out;
}

/// Result of a loss attack on a single-hop instance. `rows` covers every
/// ingress: attack rows for adversaries, defaults for the rest.
struct LossResult {
  SingleHopRouting rows;
  double loss = 0.0;
  std::vector<double> overload;
  std::string algo;
};

inline LossResult make_loss_result(const SingleHopInstance& inst, SingleHopRouting rows,
                                   std::string algo) {
  for (int i = 0; i < inst.ingress_count(); ++i) {
    if (!inst.adversarial[i]) rows[i] = inst.routing[i];
  }
  EgressLoad eval = evaluate_rows(inst, rows);
  return {std::move(rows), eval.loss, std::move(eval.overload), std::move(algo)};
}

/// All-adversarial equivalent of an instance: normal ingress traffic is
/// charged against the egress service rates and the ingress removed.
struct ReducedInstance {
  SingleHopInstance instance;
  std::vector<int> original;  // reduced ingress position -> original position
  double loss_offset = 0.0;   // overload normal ingress cause on their own
};

inline ReducedInstance reduce_normal_ingress(const SingleHopInstance& inst) {
  ReducedInstance out;
  SingleHopInstance& r = out.instance;
  r.mu = inst.mu;
  r.egress_ids = inst.egress_ids;
  if (inst.bounds) r.bounds.emplace();
  for (int i = 0; i < inst.ingress_count(); ++i) {
    if (inst.adversarial[i]) {
      out.original.push_back(i);
      r.lambda.push_back(inst.lambda[i]);
      r.edges.push_back(inst.edges[i]);
      r.adversarial.push_back(1);
      r.routing.push_back(inst.routing[i]);
      r.ingress_ids.push_back(inst.ingress_ids[i]);
      if (inst.bounds) r.bounds->push_back((*inst.bounds)[i]);
      continue;
    }
    for (std::size_t k = 0; k < inst.edges[i].size(); ++k) {
      r.mu[inst.edges[i][k]] -= inst.lambda[i] * inst.routing[i][k];
    }
  }
  for (double& mu : r.mu) {
    if (mu < 0.0) {
      out.loss_offset += -mu;
      mu = 0.0;
    }
  }
  return out;
}

/// Expands rows for the reduced instance back to the original ingress set.
inline SingleHopRouting expand_rows(const SingleHopInstance& inst, const ReducedInstance& reduced,
                                    const SingleHopRouting& rows) {
  SingleHopRouting out = inst.routing;
  for (std::size_t r = 0; r < reduced.original.size(); ++r) out[reduced.original[r]] = rows[r];
  return out;
}

/// Multi-hop numbering of a single-hop instance.
struct SingleHopLayout {
  NodeId meta_source = 1;
  NodeId first_ingress = 2;
  NodeId first_egress = 0;
  NodeId meta_destination = 0;

  NodeId ingress(int i) const { return first_ingress + i; }
  NodeId egress(int j) const { return first_egress + j; }
};

inline SingleHopLayout layout_of(const SingleHopInstance& inst) {
  SingleHopLayout layout;
  layout.first_egress = 2 + inst.ingress_count();
  layout.meta_destination = layout.first_egress + inst.egress_count();
  return layout;
}

/// Meta-source feeding each ingress its share of the arrival through
/// unlimited links, ingress-egress links unlimited, each egress draining
/// into a meta-destination through a link of capacity mu.
inline AttackProblem singlehop_to_multihop(const SingleHopInstance& inst) {
  const double total = inst.total_arrival();
  if (!(total > 0.0)) throw Error("no-arrival", "single-hop instance has zero total arrival");
  const SingleHopLayout layout = layout_of(inst);
  std::vector<Link> links;
  for (int i = 0; i < inst.ingress_count(); ++i) {
    links.push_back({layout.meta_source, layout.ingress(i), kInfinity});
    for (int j : inst.edges[i]) links.push_back({layout.ingress(i), layout.egress(j), kInfinity});
  }
  for (int j = 0; j < inst.egress_count(); ++j) {
    links.push_back({layout.egress(j), layout.meta_destination, inst.mu[j]});
  }
  Network net(layout.meta_destination, std::move(links), layout.meta_source, layout.meta_destination);
  RoutingMatrix routing(net);
  std::optional<DispatchBounds> bounds;
  if (inst.bounds) bounds = DispatchBounds(net);
  std::vector<NodeId> adversaries;
  for (int i = 0; i < inst.ingress_count(); ++i) {
    routing.set_ratio(net, net.link_id(layout.meta_source, layout.ingress(i)), inst.lambda[i] / total);
    if (inst.adversarial[i]) adversaries.push_back(layout.ingress(i));
    for (std::size_t k = 0; k < inst.edges[i].size(); ++k) {
      LinkId id = net.link_id(layout.ingress(i), layout.egress(inst.edges[i][k]));
      if (!inst.adversarial[i]) routing.set_ratio(net, id, inst.routing[i][k]);
      if (bounds) {
        bounds->lower[id] = (*inst.bounds)[i][k].first;
        bounds->upper[id] = (*inst.bounds)[i][k].second;
      }
    }
  }
  for (int j = 0; j < inst.egress_count(); ++j) {
    routing.set_ratio(net, net.link_id(layout.egress(j), layout.meta_destination), 1.0);
  }
  return AttackProblem(std::move(net), std::move(routing), adversaries, std::move(bounds));
}

/// Reads ingress rows out of a multi-hop routing of the transformed network.
inline SingleHopRouting rows_from_multihop(const SingleHopInstance& inst, const Network& net,
                                           const RoutingMatrix& routing) {
  const SingleHopLayout layout = layout_of(inst);
  SingleHopRouting rows(inst.ingress_count());
  for (int i = 0; i < inst.ingress_count(); ++i) {
    rows[i].assign(inst.edges[i].size(), 0.0);
    for (std::size_t k = 0; k < inst.edges[i].size(); ++k) {
      rows[i][k] = routing.ratio(net.link_id(layout.ingress(i), layout.egress(inst.edges[i][k])));
    }
  }
  return rows;
}

/// The same instance with arrivals rescaled to total `arrival`.
inline SingleHopInstance with_total_arrival(SingleHopInstance inst, double arrival) {
  const double total = inst.total_arrival();
  if (!(total > 0.0)) throw Error("no-arrival", "cannot rescale an instance with zero arrival");
  for (double& l : inst.lambda) l *= arrival / total;
  return inst;
}

}  // namespace rattack
