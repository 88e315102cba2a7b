#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rattack/core.hpp"
#include "rattack/flow.hpp"
#include "rattack/flow_lp.hpp"
#include "rattack/max_loss.hpp"
#include "rattack/min_lambda.hpp"
#include "rattack/network.hpp"
#include "rattack/single_hop.hpp"

namespace rattack {

enum class Objective { MinLambda, MaxLoss };

/// Choose at most `budget` nodes of `candidates` to hijack in `base`
/// (whose own adversary set is ignored).
struct SelectionProblem {
  AttackProblem base;
  std::vector<NodeId> candidates;
  int budget = 1;
  Objective objective = Objective::MinLambda;
  double arrival = 0.0;  // used by MaxLoss
};

struct SelectionResult {
  std::vector<NodeId> chosen;
  RoutingMatrix attack;
  double objective = 0.0;
  std::string algo;
};

/// Single-hop loss variant: candidates are ingress positions.
struct SingleHopSelection {
  SingleHopInstance base;
  std::vector<int> candidates;
  int budget = 1;
};

struct SingleHopSelectionResult {
  std::vector<int> chosen;
  SingleHopRouting rows;
  double loss = 0.0;
  std::string algo;
};

namespace detail {

inline void check_selection(const SelectionProblem& problem) {
  if (problem.budget < 1) throw Error("bad-budget", "budget K must be at least 1");
  const Network& net = problem.base.network;
  for (NodeId v : problem.candidates) {
    if (v < 1 || v > net.node_count()) throw Error("bad-candidate", "candidate id out of range", v);
    if (v == net.destination()) throw Error("bad-candidate", "destination cannot be a candidate", v);
  }
}

inline std::vector<NodeId> sorted_unique(std::vector<NodeId> nodes) {
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
  return nodes;
}

/// Calls `visit` with every size-`k` subset of `pool` in lexicographic order.
template <class Visit>
void for_each_subset(const std::vector<NodeId>& pool, std::size_t k, Visit&& visit) {
  std::vector<std::size_t> idx(k);
  for (std::size_t i = 0; i < k; ++i) idx[i] = i;
  std::vector<NodeId> subset(k);
  for (;;) {
    for (std::size_t i = 0; i < k; ++i) subset[i] = pool[idx[i]];
    visit(subset);
    std::size_t i = k;
    while (i > 0 && idx[i - 1] == pool.size() - k + i - 1) --i;
    if (i == 0) return;
    ++idx[i - 1];
    for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
}

inline double binomial(std::size_t n, std::size_t k) {
  double out = 1.0;
  for (std::size_t i = 1; i <= k; ++i) out = out * static_cast<double>(n - k + i) / static_cast<double>(i);
  return out;
}

}  // namespace detail

/// Solves the inner attack on every subset of size min(K, |candidates|).
inline SelectionResult brute_force_select(const SelectionProblem& problem, double subset_cap = 1e5) {
  detail::check_selection(problem);
  const auto pool = detail::sorted_unique(problem.candidates);
  const std::size_t k = std::min<std::size_t>(problem.budget, pool.size());
  if (detail::binomial(pool.size(), k) > subset_cap) {
    throw Error("subset-cap", "too many candidate subsets for brute force");
  }
  std::optional<SelectionResult> best;
  detail::for_each_subset(pool, k, [&](const std::vector<NodeId>& subset) {
    AttackProblem inner = problem.base.with_adversaries(subset);
    SelectionResult r;
    r.chosen = subset;
    if (problem.objective == Objective::MinLambda) {
      AttackResult a = exact_min_lambda(inner);
      r.attack = std::move(a.attack);
      r.objective = a.lambda_star;
      if (!best || strictly_greater(best->objective, r.objective)) best = std::move(r);
    } else {
      NetworkLossResult a = brute_force_max_loss(inner, problem.arrival);
      r.attack = std::move(a.attack);
      r.objective = a.loss;
      if (!best || strictly_greater(r.objective, best->objective)) best = std::move(r);
    }
  });
  best->algo = "brute";
  return std::move(*best);
}

/// Flow-into-link gain each candidate can cause on its own, relative to
/// default routing, for every finite-capacity link below the candidates.
struct CandidateGains {
  std::vector<LinkId> links;                      // links downstream of the pool
  std::vector<std::vector<NodeId>> upstream;      // per link: candidates above its tail
  std::vector<std::vector<double>> gain;          // aligned with upstream
  std::vector<double> default_flow;               // per link id, unit arrival
};

inline CandidateGains candidate_gains(const SelectionProblem& problem) {
  const AttackProblem& base = problem.base;
  const Network& net = base.network;
  const auto pool = detail::sorted_unique(problem.candidates);
  AttackProblem open = base.with_adversaries(pool);

  // down[v]: nodes traffic at v can reach when v may use any link.
  std::vector<std::vector<char>> down(pool.size());
  for (std::size_t a = 0; a < pool.size(); ++a) {
    down[a] = detail::reach_forward(net, pool[a], [&](LinkId id) {
      const Link& link = net.link(id);
      if (link.tail == net.destination()) return false;
      if (link.tail == pool[a]) return true;
      return detail::usable(open, id) && !open.is_adversary(link.tail);
    });
    down[a][pool[a]] = 0;
  }
  for (std::size_t a = 0; a < pool.size(); ++a) {
    for (std::size_t b = 0; b < pool.size(); ++b) {
      if (a != b && down[a][pool[b]]) {
        throw Error("not-parallel",
                    "candidates " + std::to_string(pool[a]) + " and " + std::to_string(pool[b]) +
                        " are not parallel; use brute force selection");
      }
    }
  }

  AttackProblem plain = base.with_adversaries({});
  CandidateGains out;
  out.default_flow = unit_flows(net, plain.default_routing);
  std::vector<std::optional<detail::UnitFlowProgram>> programs(pool.size());
  std::vector<AttackProblem> single(pool.size());
  for (std::size_t a = 0; a < pool.size(); ++a) single[a] = base.with_adversaries({pool[a]});
  std::vector<std::map<NodeId, double>> inflow_cache(pool.size());

  for (LinkId id = 0; id < net.link_count(); ++id) {
    const Link& link = net.link(id);
    if (is_infinite(link.capacity) || link.tail == net.destination()) continue;
    std::vector<NodeId> up;
    std::vector<double> gains;
    for (std::size_t a = 0; a < pool.size(); ++a) {
      if (link.tail != pool[a] && !down[a][link.tail]) continue;
      if (!programs[a]) programs[a].emplace(single[a]);
      double attacked;
      if (link.tail == pool[a]) {
        attacked = programs[a]->maximize_link(id).value;
      } else {
        auto it = inflow_cache[a].find(link.tail);
        if (it == inflow_cache[a].end()) {
          double value = programs[a]->maximize_inflow(link.tail).inflow[link.tail];
          it = inflow_cache[a].emplace(link.tail, value).first;
        }
        attacked = it->second * base.default_routing.ratio(id);
      }
      up.push_back(pool[a]);
      gains.push_back(std::max(0.0, attacked - out.default_flow[id]));
    }
    if (up.empty()) continue;
    out.links.push_back(id);
    out.upstream.push_back(std::move(up));
    out.gain.push_back(std::move(gains));
  }
  return out;
}

/// Exact selection for throughput minimization when no candidate lies up- or
/// downstream of another: for each link below the pool take the candidates
/// that most lower the arrival rate saturating it, then keep the best set.
inline SelectionResult select_parallel_min_lambda(const SelectionProblem& problem) {
  detail::check_selection(problem);
  const auto pool = detail::sorted_unique(problem.candidates);
  const std::size_t k = std::min<std::size_t>(problem.budget, pool.size());
  CandidateGains gains = candidate_gains(problem);

  // The reduction in saturating rate c/f0 - c/(f0 + g) is increasing in the
  // gain g, so ranking by gain ranks by reduction.
  std::vector<std::vector<NodeId>> sets;
  for (std::size_t l = 0; l < gains.links.size(); ++l) {
    std::vector<std::size_t> order(gains.upstream[l].size());
    for (std::size_t p = 0; p < order.size(); ++p) order[p] = p;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return strictly_greater(gains.gain[l][a], gains.gain[l][b]);
    });
    std::vector<NodeId> chosen;
    for (std::size_t p = 0; p < std::min(k, order.size()); ++p) {
      chosen.push_back(gains.upstream[l][order[p]]);
    }
    std::sort(chosen.begin(), chosen.end());
    sets.push_back(std::move(chosen));
  }
  sets.push_back(std::vector<NodeId>(pool.begin(), pool.begin() + static_cast<long>(k)));

  std::map<std::vector<NodeId>, AttackResult> cache;
  std::optional<SelectionResult> best;
  for (const auto& set : sets) {
    auto it = cache.find(set);
    if (it == cache.end()) {
      it = cache.emplace(set, exact_min_lambda(problem.base.with_adversaries(set))).first;
    }
    if (!best || strictly_greater(best->objective, it->second.lambda_star)) {
      best = SelectionResult{set, it->second.attack, it->second.lambda_star, "parallel"};
    }
  }
  return std::move(*best);
}

namespace detail {

inline SingleHopInstance with_adversarial_ingress(const SingleHopInstance& base,
                                                  const std::vector<int>& chosen) {
  SingleHopInstance inst = base;
  std::fill(inst.adversarial.begin(), inst.adversarial.end(), 0);
  for (int i : chosen) inst.adversarial[i] = 1;
  return inst;
}

}  // namespace detail

/// Best subset under the optimal (brute force) inner loss attack.
inline SingleHopSelectionResult brute_force_select(const SingleHopSelection& problem,
                                                   double subset_cap = 1e5) {
  if (problem.budget < 1) throw Error("bad-budget", "budget K must be at least 1");
  std::vector<NodeId> pool(problem.candidates.begin(), problem.candidates.end());
  pool = detail::sorted_unique(pool);
  const std::size_t k = std::min<std::size_t>(problem.budget, pool.size());
  if (detail::binomial(pool.size(), k) > subset_cap) {
    throw Error("subset-cap", "too many candidate subsets for brute force");
  }
  std::optional<SingleHopSelectionResult> best;
  detail::for_each_subset(pool, k, [&](const std::vector<NodeId>& subset) {
    std::vector<int> chosen(subset.begin(), subset.end());
    LossResult r = brute_force_max_loss(detail::with_adversarial_ingress(problem.base, chosen));
    if (!best || strictly_greater(r.loss, best->loss)) {
      best = SingleHopSelectionResult{chosen, std::move(r.rows), r.loss, "brute"};
    }
  });
  return std::move(*best);
}

/// Greedy selection for loss: per egress, rank unselected candidates by the
/// extra traffic they would add there, take the prefix (within the remaining
/// budget) with the best per-node overload, and commit the best egress.
/// Overload is measured against the service rate left over by the current
/// routing. Stops at K nodes or when no candidate can add traffic anywhere.
inline SingleHopSelectionResult select_singlehop_maxloss(const SingleHopSelection& problem) {
  if (problem.budget < 1) throw Error("bad-budget", "budget K must be at least 1");
  const SingleHopInstance& base = problem.base;
  const int nd = base.egress_count();
  SingleHopRouting rows = base.routing;
  std::vector<char> selected(base.ingress_count(), 0);
  std::vector<int> chosen;
  std::vector<char> is_candidate(base.ingress_count(), 0);
  for (int i : problem.candidates) {
    if (i < 0 || i >= base.ingress_count()) throw Error("bad-candidate", "candidate is not an ingress");
    is_candidate[i] = 1;
  }

  struct Pick {
    int ingress;
    double value;
  };
  while (static_cast<int>(chosen.size()) < problem.budget) {
    const int left = problem.budget - static_cast<int>(chosen.size());
    std::vector<double> residual = base.mu;
    const EgressLoad current = evaluate_rows(base, rows);
    for (int j = 0; j < nd; ++j) residual[j] -= current.load[j];
    double best_score = -kInfinity;
    int best_j = -1;
    std::vector<int> best_set;
    for (int j = 0; j < nd; ++j) {
      std::vector<Pick> cand;
      for (int i = 0; i < base.ingress_count(); ++i) {
        if (!is_candidate[i] || selected[i]) continue;
        int k = base.edge_index(i, j);
        if (k < 0) continue;
        double value = base.lambda[i] * (1.0 - rows[i][k]);
        if (value > 1e-12) cand.push_back({i, value});
      }
      if (cand.empty()) continue;
      std::stable_sort(cand.begin(), cand.end(),
                       [](const Pick& a, const Pick& b) { return a.value > b.value; });
      double sum = 0.0, score = 0.0;
      std::size_t size = 0;
      for (std::size_t p = 0; p < cand.size() && static_cast<int>(p) < left; ++p) {
        sum += cand[p].value;
        double s = (sum - residual[j]) / static_cast<double>(p + 1);
        if (size == 0 || strictly_greater(s, score)) {
          score = s;
          size = p + 1;
        }
      }
      if (best_j < 0 || strictly_greater(score, best_score)) {
        best_score = score;
        best_j = j;
        best_set.clear();
        for (std::size_t p = 0; p < size; ++p) best_set.push_back(cand[p].ingress);
      }
    }
    if (best_j < 0) break;
    for (int i : best_set) {
      selected[i] = 1;
      chosen.push_back(i);
      rows[i].assign(base.edges[i].size(), 0.0);
      rows[i][base.edge_index(i, best_j)] = 1.0;
    }
  }
  std::sort(chosen.begin(), chosen.end());
  EgressLoad eval = evaluate_rows(base, rows);
  return {std::move(chosen), std::move(rows), eval.loss, "heuristic"};
}

}  // namespace rattack
