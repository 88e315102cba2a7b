#pragma once

#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "rattack/core.hpp"
#include "rattack/max_loss.hpp"
#include "rattack/min_lambda.hpp"
#include "rattack/network.hpp"
#include "rattack/node_select.hpp"
#include "rattack/single_hop.hpp"

namespace rattack {

using Json = nlohmann::ordered_json;

namespace detail {

[[noreturn]] inline void bad_input(const std::string& msg) { throw Error("bad-input", msg); }

inline const Json& field(const Json& obj, const char* key) {
  if (!obj.is_object() || !obj.contains(key)) bad_input(std::string("missing field '") + key + "'");
  return obj.at(key);
}

inline double read_rate(const Json& v) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s == "inf" || s == "Infinity" || s == "infinity") return kInfinity;
  }
  bad_input("expected a number or \"inf\", got " + v.dump());
}

inline Json write_rate(double value) {
  if (is_infinite(value)) return "inf";
  if (std::isnan(value)) return nullptr;
  return value;
}

inline int read_int(const Json& v, const char* what) {
  if (v.is_number_integer()) return v.get<int>();
  if (v.is_string()) {
    try {
      std::size_t used = 0;
      int out = std::stoi(v.get<std::string>(), &used);
      if (used == v.get<std::string>().size()) return out;
    } catch (const std::exception&) {
    }
  }
  bad_input(std::string("expected an integer ") + what + ", got " + v.dump());
}

}  // namespace detail

inline Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("io", "cannot open '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error("bad-input", std::string("JSON parse error in '") + path + "': " + e.what());
  }
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("io", "cannot write '" + path + "'");
  out << text;
}

inline bool is_singlehop_json(const Json& j) { return j.is_object() && j.contains("ingress"); }

// ---- multi-hop problems ----

inline AttackProblem problem_from_json(const Json& j) {
  using detail::field;
  const int nodes = detail::read_int(field(j, "nodes"), "node count");
  std::vector<Link> links;
  for (const Json& l : field(j, "links")) {
    links.push_back({detail::read_int(field(l, "from"), "link tail"), detail::read_int(field(l, "to"), "link head"),
                     l.contains("cap") ? detail::read_rate(l.at("cap")) : kInfinity});
  }
  Network net(nodes, std::move(links), detail::read_int(field(j, "source"), "source"),
              detail::read_int(field(j, "destination"), "destination"));
  RoutingMatrix routing(net);
  if (j.contains("routing")) {
    for (const auto& [tail, row] : j.at("routing").items()) {
      NodeId i = detail::read_int(Json(tail), "routing node");
      for (const auto& [head, ratio] : row.items()) {
        NodeId k = detail::read_int(Json(head), "routing head");
        auto id = net.find_link(i, k);
        if (!id) throw Error("unknown-link", "routing names a missing link", std::nullopt, std::pair{i, k});
        routing.set_ratio(net, *id, detail::read_rate(ratio));
      }
    }
  }
  std::vector<NodeId> adversaries;
  if (j.contains("adversaries")) {
    for (const Json& v : j.at("adversaries")) adversaries.push_back(detail::read_int(v, "adversary"));
  }
  std::optional<DispatchBounds> bounds;
  if (j.contains("bounds") && !j.at("bounds").empty()) {
    bounds = DispatchBounds(net);
    for (const auto& [tail, row] : j.at("bounds").items()) {
      NodeId i = detail::read_int(Json(tail), "bounds node");
      for (const auto& [head, pair] : row.items()) {
        NodeId k = detail::read_int(Json(head), "bounds head");
        auto id = net.find_link(i, k);
        if (!id) throw Error("unknown-link", "bounds name a missing link", std::nullopt, std::pair{i, k});
        if (!pair.is_array() || pair.size() != 2) detail::bad_input("bounds entry must be [lo, hi]");
        bounds->lower[*id] = detail::read_rate(pair[0]);
        bounds->upper[*id] = detail::read_rate(pair[1]);
      }
    }
  }
  return AttackProblem(std::move(net), std::move(routing), adversaries, std::move(bounds));
}

inline Json routing_to_json(const Network& net, const RoutingMatrix& routing,
                            const std::vector<NodeId>& only = {}) {
  Json out = Json::object();
  for (NodeId node = 1; node <= net.node_count(); ++node) {
    if (!routing.has_row(node)) continue;
    if (!only.empty() && std::find(only.begin(), only.end(), node) == only.end()) continue;
    Json row = Json::object();
    for (LinkId id : net.out_links(node)) row[std::to_string(net.link(id).head)] = routing.ratio(id);
    out[std::to_string(node)] = std::move(row);
  }
  return out;
}

inline Json problem_to_json(const AttackProblem& problem) {
  const Network& net = problem.network;
  Json j;
  j["nodes"] = net.node_count();
  j["source"] = net.source();
  j["destination"] = net.destination();
  Json links = Json::array();
  for (const Link& l : net.links()) links.push_back({{"from", l.tail}, {"to", l.head}, {"cap", detail::write_rate(l.capacity)}});
  j["links"] = std::move(links);
  j["adversaries"] = problem.adversaries();
  j["routing"] = routing_to_json(net, problem.default_routing);
  if (problem.bounds) {
    Json b = Json::object();
    for (LinkId id = 0; id < net.link_count(); ++id) {
      const Link& l = net.link(id);
      if (problem.bounds->lower[id] == 0.0 && problem.bounds->upper[id] == 1.0) continue;
      b[std::to_string(l.tail)][std::to_string(l.head)] = {problem.bounds->lower[id], problem.bounds->upper[id]};
    }
    j["bounds"] = std::move(b);
  }
  return j;
}

// ---- single-hop instances ----

inline SingleHopInstance singlehop_from_json(const Json& j) {
  using detail::field;
  SingleHopInstance inst;
  std::map<int, int> egress_pos;
  for (const Json& e : field(j, "egress")) {
    int id = detail::read_int(field(e, "id"), "egress id");
    if (egress_pos.count(id)) detail::bad_input("duplicate egress id " + std::to_string(id));
    egress_pos[id] = static_cast<int>(inst.mu.size());
    inst.egress_ids.push_back(id);
    inst.mu.push_back(detail::read_rate(field(e, "mu")));
  }
  std::map<int, int> ingress_pos;
  for (const Json& s : field(j, "ingress")) {
    int id = detail::read_int(field(s, "id"), "ingress id");
    if (ingress_pos.count(id)) detail::bad_input("duplicate ingress id " + std::to_string(id));
    ingress_pos[id] = static_cast<int>(inst.lambda.size());
    inst.ingress_ids.push_back(id);
    inst.lambda.push_back(detail::read_rate(field(s, "lambda")));
    std::vector<int> edges;
    for (const Json& d : field(s, "edges")) {
      int eid = detail::read_int(d, "edge");
      auto it = egress_pos.find(eid);
      if (it == egress_pos.end()) detail::bad_input("edge to unknown egress " + std::to_string(eid));
      edges.push_back(it->second);
    }
    inst.edges.push_back(std::move(edges));
  }
  const int ns = inst.ingress_count();
  inst.adversarial.assign(ns, 0);
  if (j.contains("adversaries")) {
    for (const Json& v : j.at("adversaries")) {
      auto it = ingress_pos.find(detail::read_int(v, "adversary"));
      if (it == ingress_pos.end()) detail::bad_input("adversary is not an ingress id");
      inst.adversarial[it->second] = 1;
    }
  }
  inst.routing.resize(ns);
  for (int i = 0; i < ns; ++i) inst.routing[i].assign(inst.edges[i].size(), 0.0);
  auto locate = [&](const std::string& tail, const std::string& head) -> std::pair<int, int> {
    auto si = ingress_pos.find(detail::read_int(Json(tail), "routing ingress"));
    auto dj = egress_pos.find(detail::read_int(Json(head), "routing egress"));
    if (si == ingress_pos.end() || dj == egress_pos.end()) detail::bad_input("routing names an unknown node");
    const auto& e = inst.edges[si->second];
    auto it = std::find(e.begin(), e.end(), dj->second);
    if (it == e.end()) {
      throw Error("unknown-link", "routing names a missing edge", std::nullopt,
                  std::pair{si->first, dj->first});
    }
    return {si->second, static_cast<int>(it - e.begin())};
  };
  if (j.contains("routing")) {
    for (const auto& [tail, row] : j.at("routing").items()) {
      for (const auto& [head, ratio] : row.items()) {
        auto [i, k] = locate(tail, head);
        inst.routing[i][k] = detail::read_rate(ratio);
      }
    }
  }
  if (j.contains("bounds") && !j.at("bounds").empty()) {
    inst.bounds.emplace(ns);
    for (int i = 0; i < ns; ++i) (*inst.bounds)[i].assign(inst.edges[i].size(), {0.0, 1.0});
    for (const auto& [tail, row] : j.at("bounds").items()) {
      for (const auto& [head, pair] : row.items()) {
        auto [i, k] = locate(tail, head);
        if (!pair.is_array() || pair.size() != 2) detail::bad_input("bounds entry must be [lo, hi]");
        (*inst.bounds)[i][k] = {detail::read_rate(pair[0]), detail::read_rate(pair[1])};
      }
    }
  }
  normalize(inst);
  return inst;
}

inline Json singlehop_rows_to_json(const SingleHopInstance& inst, const SingleHopRouting& rows,
                                   bool adversaries_only = false) {
  Json out = Json::object();
  for (int i = 0; i < inst.ingress_count(); ++i) {
    if (adversaries_only && !inst.adversarial[i]) continue;
    Json row = Json::object();
    for (std::size_t k = 0; k < inst.edges[i].size(); ++k) {
      row[std::to_string(inst.egress_ids[inst.edges[i][k]])] = rows[i][k];
    }
    out[std::to_string(inst.ingress_ids[i])] = std::move(row);
  }
  return out;
}

inline Json singlehop_to_json(const SingleHopInstance& inst) {
  Json j;
  Json ingress = Json::array();
  std::vector<int> adversaries;
  for (int i = 0; i < inst.ingress_count(); ++i) {
    std::vector<int> edges;
    for (int e : inst.edges[i]) edges.push_back(inst.egress_ids[e]);
    ingress.push_back({{"id", inst.ingress_ids[i]}, {"lambda", inst.lambda[i]}, {"edges", edges}});
    if (inst.adversarial[i]) adversaries.push_back(inst.ingress_ids[i]);
  }
  Json egress = Json::array();
  for (int k = 0; k < inst.egress_count(); ++k) {
    egress.push_back({{"id", inst.egress_ids[k]}, {"mu", detail::write_rate(inst.mu[k])}});
  }
  j["ingress"] = std::move(ingress);
  j["egress"] = std::move(egress);
  j["adversaries"] = adversaries;
  j["routing"] = singlehop_rows_to_json(inst, inst.routing);
  if (inst.bounds) {
    Json b = Json::object();
    for (int i = 0; i < inst.ingress_count(); ++i) {
      for (std::size_t k = 0; k < inst.edges[i].size(); ++k) {
        auto [lo, hi] = (*inst.bounds)[i][k];
        if (lo == 0.0 && hi == 1.0) continue;
        b[std::to_string(inst.ingress_ids[i])][std::to_string(inst.egress_ids[inst.edges[i][k]])] = {lo, hi};
      }
    }
    j["bounds"] = std::move(b);
  }
  return j;
}

// ---- results ----

inline Json attack_result_to_json(const AttackProblem& problem, const AttackResult& result) {
  Json j;
  j["algo"] = result.algo;
  j["lambda_star"] = detail::write_rate(result.lambda_star);
  j["attack"] = routing_to_json(problem.network, result.attack, problem.adversaries());
  if (result.saturated_link) {
    const Link& l = problem.network.link(*result.saturated_link);
    j["saturated_link"] = {l.tail, l.head};
  } else {
    j["saturated_link"] = nullptr;
  }
  return j;
}

inline Json loss_result_to_json(const SingleHopInstance& inst, const LossResult& result, double arrival) {
  Json j;
  j["algo"] = result.algo;
  j["lambda"] = arrival;
  j["loss"] = result.loss;
  j["attack"] = singlehop_rows_to_json(inst, result.rows, true);
  Json overload = Json::object();
  for (int k = 0; k < inst.egress_count(); ++k) overload[std::to_string(inst.egress_ids[k])] = result.overload[k];
  j["overload"] = std::move(overload);
  return j;
}

inline Json loss_result_to_json(const AttackProblem& problem, const NetworkLossResult& result) {
  Json j;
  j["algo"] = result.algo;
  j["lambda"] = result.arrival;
  j["loss"] = result.loss;
  j["attack"] = routing_to_json(problem.network, result.attack, problem.adversaries());
  return j;
}

inline Json selection_to_json(const AttackProblem& base, const SelectionResult& result) {
  Json j;
  j["algo"] = result.algo;
  j["chosen"] = result.chosen;
  j["objective"] = detail::write_rate(result.objective);
  j["attack"] = routing_to_json(base.network, result.attack, result.chosen);
  return j;
}

inline Json selection_to_json(const SingleHopInstance& inst, const SingleHopSelectionResult& result) {
  Json j;
  j["algo"] = result.algo;
  std::vector<int> ids;
  for (int i : result.chosen) ids.push_back(inst.ingress_ids[i]);
  j["chosen"] = ids;
  j["objective"] = result.loss;
  Json attack = Json::object();
  for (int i : result.chosen) {
    Json row = Json::object();
    for (std::size_t k = 0; k < inst.edges[i].size(); ++k) {
      row[std::to_string(inst.egress_ids[inst.edges[i][k]])] = result.rows[i][k];
    }
    attack[std::to_string(inst.ingress_ids[i])] = std::move(row);
  }
  j["attack"] = std::move(attack);
  return j;
}

}  // namespace rattack
