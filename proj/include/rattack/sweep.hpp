#pragma once

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "rattack/generators.hpp"
#include "rattack/json_io.hpp"
#include "rattack/max_loss.hpp"
#include "rattack/min_lambda.hpp"
#include "rattack/node_select.hpp"
#include "rattack/toml.hpp"

namespace rattack {

struct SweepStats {
  std::vector<double> values;  // in instance order
  double mean = 0.0;
  double p10 = 0.0;
  double p90 = 0.0;
  double min = 0.0;
  double max = 0.0;

  /// (value, cumulative fraction) at each distinct value.
  std::vector<std::pair<double, double>> cdf() const {
    std::vector<double> sorted = values;
    std::sort(sorted.begin(), sorted.end());
    std::vector<std::pair<double, double>> out;
    for (std::size_t k = 0; k < sorted.size(); ++k) {
      if (k + 1 < sorted.size() && sorted[k + 1] == sorted[k]) continue;
      out.push_back({sorted[k], static_cast<double>(k + 1) / static_cast<double>(sorted.size())});
    }
    return out;
  }
};

/// Nearest-rank percentile of already sorted values.
inline double nearest_rank(const std::vector<double>& sorted, double percent) {
  if (sorted.empty()) return std::nan("");
  auto rank = static_cast<std::size_t>(std::ceil(percent / 100.0 * static_cast<double>(sorted.size())));
  return sorted[std::clamp<std::size_t>(rank, 1, sorted.size()) - 1];
}

inline SweepStats summarize(std::vector<double> values) {
  SweepStats s;
  s.values = std::move(values);
  if (s.values.empty()) {
    s.mean = s.p10 = s.p90 = s.min = s.max = std::nan("");
    return s;
  }
  std::vector<double> sorted = s.values;
  std::sort(sorted.begin(), sorted.end());
  double sum = 0.0;
  for (double v : sorted) sum += v;
  s.mean = sum / static_cast<double>(sorted.size());
  s.p10 = nearest_rank(sorted, 10);
  s.p90 = nearest_rank(sorted, 90);
  s.min = sorted.front();
  s.max = sorted.back();
  return s;
}

// ---- configuration ----

namespace detail {

inline const std::vector<std::string>& grid_keys() {
  static const std::vector<std::string> keys{"nodes", "ingress", "egress", "density", "adversaries",
                                             "routing", "ratio", "uniformity", "budget"};
  return keys;
}

inline void apply_key(GenConfig& c, const std::string& key, const Json& v) {
  auto num = [&]() {
    if (!v.is_number()) throw Error("bad-config", "'" + key + "' must be a number");
    return v.get<double>();
  };
  auto integer = [&]() {
    if (!v.is_number_integer()) throw Error("bad-config", "'" + key + "' must be an integer");
    return v.get<long long>();
  };
  auto text = [&]() {
    if (!v.is_string()) throw Error("bad-config", "'" + key + "' must be a string");
    return v.get<std::string>();
  };
  if (key == "mode") c.mode = text();
  else if (key == "nodes" || key == "N") c.nodes = static_cast<int>(integer());
  else if (key == "ingress" || key == "N_S") c.ingress = static_cast<int>(integer());
  else if (key == "egress" || key == "N_D") c.egress = static_cast<int>(integer());
  else if (key == "density" || key == "p") c.density = num();
  else if (key == "cap_min") c.cap_min = num();
  else if (key == "cap_max") c.cap_max = num();
  else if (key == "capacity") {
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
      throw Error("bad-config", "'capacity' must be [min, max]");
    }
    c.cap_min = v[0].get<double>();
    c.cap_max = v[1].get<double>();
  } else if (key == "adversaries") c.adversaries = static_cast<int>(integer());
  else if (key == "routing") c.routing = parse_policy(text());
  else if (key == "ratio") c.ratio = num();
  else if (key == "uniformity") c.uniformity = text() == "homo-10%" ? "homo" : text();
  else if (key == "budget" || key == "K") c.budget = static_cast<int>(integer());
  else if (key == "elements") c.elements = static_cast<int>(integer());
  else if (key == "sets") c.sets = static_cast<int>(integer());
  else if (key == "topologies") c.topologies = static_cast<int>(integer());
  else if (key == "adversary_sets") c.adversary_sets = static_cast<int>(integer());
  else if (key == "capacity_draws") c.capacity_draws = static_cast<int>(integer());
  else if (key == "seed") {
    if (!v.is_number_integer() || v.get<long long>() < 0) throw Error("bad-config", "'seed' must be a non-negative integer");
    c.seed = v.get<std::uint64_t>();
  } else if (key == "algorithms") {
    if (!v.is_array()) throw Error("bad-config", "'algorithms' must be an array");
    c.algorithms.clear();
    for (const Json& a : v) {
      if (!a.is_string()) throw Error("bad-config", "algorithm names must be strings");
      c.algorithms.push_back(a.get<std::string>());
    }
  } else if (key == "timing") {
    if (!v.is_boolean()) throw Error("bad-config", "'timing' must be a boolean");
    c.timing = v.get<bool>();
  } else {
    throw Error("bad-config", "unknown config key '" + key + "'");
  }
}

/// Merges top-level keys and one level of [tables] into a flat object.
inline std::string canonical_key(const std::string& key) {
  static const std::map<std::string, std::string> aliases{
      {"N", "nodes"}, {"N_S", "ingress"}, {"N_D", "egress"}, {"p", "density"}, {"K", "budget"}};
  auto it = aliases.find(key);
  return it == aliases.end() ? key : it->second;
}

inline Json flatten_config(const Json& j) {
  if (!j.is_object()) throw Error("bad-config", "config must be an object");
  Json flat = Json::object();
  auto put = [&](const std::string& key, const Json& v) {
    std::string name = canonical_key(key);
    if (flat.contains(name)) throw Error("bad-config", "'" + name + "' given twice");
    flat[name] = v;
  };
  for (const auto& [key, value] : j.items()) {
    if (value.is_object()) {
      for (const auto& [k, v] : value.items()) put(k, v);
    } else {
      put(key, value);
    }
  }
  return flat;
}

}  // namespace detail

/// One grid cell: a fully scalar configuration.
struct SweepCell {
  GenConfig config;
  Json params;  // the values of the grid keys for this cell
};

/// Expands list-valued grid keys (density, adversaries, routing, ...) into
/// the cartesian product of cells, first key varying slowest.
inline std::vector<SweepCell> cells_from_json(const Json& raw) {
  Json flat = detail::flatten_config(raw);
  GenConfig base;
  for (const auto& [key, value] : flat.items()) {
    bool grid = std::find(detail::grid_keys().begin(), detail::grid_keys().end(), key) != detail::grid_keys().end();
    if (grid && value.is_array()) continue;
    detail::apply_key(base, key, value);
  }
  std::vector<SweepCell> cells{{base, Json::object()}};
  for (const std::string& key : detail::grid_keys()) {
    if (!flat.contains(key) || !flat.at(key).is_array()) continue;
    const Json& values = flat.at(key);
    if (values.empty()) throw Error("bad-config", "'" + key + "' list is empty");
    std::vector<SweepCell> next;
    for (const SweepCell& cell : cells) {
      for (const Json& v : values) {
        SweepCell c = cell;
        detail::apply_key(c.config, key, v);
        c.params[key] = v;
        next.push_back(std::move(c));
      }
    }
    cells = std::move(next);
  }
  for (std::size_t k = 0; k < cells.size(); ++k) {
    if (cells.size() > 1) cells[k].config.seed = derive_seed(base.seed, 7, k);
    check_config(cells[k].config);
  }
  return cells;
}

inline Json read_config_file(const std::string& path) {
  const bool toml = path.size() >= 5 && path.substr(path.size() - 5) == ".toml";
  return toml ? TomlReader::parse_file(path) : read_json_file(path);
}

inline std::vector<std::string> default_algorithms(const std::string& mode) {
  if (mode == "multihop") return {"approx2"};
  if (mode == "singlehop") return {"mul", "add", "minmu", "rand"};
  if (mode == "selection") return {"heuristic", "heuristic_opt"};
  return {"brute"};
}

// ---- running ----

struct SweepRecord {
  int instance_id = 0;
  InstanceSeeds seeds;
  std::string algo;
  std::string metric;
  double value = 0.0;
  double runtime_ms = 0.0;
};

struct CellOutcome {
  SweepCell cell;
  int first_instance = 0;
  std::vector<SweepRecord> records;
  int failures = 0;
  std::vector<std::string> failure_messages;
  // (algo, metric) in first-seen order.
  std::vector<std::pair<std::pair<std::string, std::string>, SweepStats>> stats;
};

namespace detail {

class Stopwatch {
 public:
  explicit Stopwatch(bool on) : on_(on), start_(std::chrono::steady_clock::now()) {}
  double ms() const {
    if (!on_) return 0.0;
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  bool on_;
  std::chrono::steady_clock::time_point start_;
};

inline double lambda_ratio(double alg, double opt) {
  if (is_infinite(opt)) return is_infinite(alg) ? 1.0 : 0.0;
  if (is_infinite(alg)) return kInfinity;
  return alg / opt;
}

inline AttackResult run_min_lambda(const std::string& algo, const AttackProblem& problem) {
  if (algo == "exact") return exact_min_lambda(problem);
  if (algo == "brute") return brute_force_min_lambda(problem);
  if (algo == "approx2") return approx2_min_lambda(problem);
  if (algo == "distributed") return distributed_heuristic(problem);
  if (algo == "local") return local_min_capacity_attack(problem);
  throw Error("bad-config", "unknown min-lambda algorithm '" + algo + "'");
}

inline LossResult run_singlehop_loss(const std::string& algo, const SingleHopInstance& inst,
                                     std::uint64_t seed) {
  if (algo == "brute") return brute_force_max_loss(inst);
  if (algo == "mul") return maxloss_multiplicative(inst);
  if (algo == "add") return maxloss_additive(inst);
  if (algo == "minmu") return minmu_baseline(inst);
  if (algo == "rand") return rand_baseline(inst, seed);
  throw Error("bad-config", "unknown max-loss algorithm '" + algo + "'");
}

inline std::vector<SweepRecord> run_instance(const GenConfig& config, const InstanceSeeds& seeds) {
  std::vector<SweepRecord> out;
  auto emit = [&](const std::string& algo, const std::string& metric, double value, double ms) {
    out.push_back({0, seeds, algo, metric, value, ms});
  };
  const std::vector<std::string> algos =
      config.algorithms.empty() ? default_algorithms(config.mode) : config.algorithms;

  if (config.mode == "multihop") {
    AttackProblem problem = gen_multihop(config, seeds);
    const double opt = exact_min_lambda(problem).lambda_star;
    for (const auto& algo : algos) {
      Stopwatch clock(config.timing);
      AttackResult r = run_min_lambda(algo, problem);
      emit(algo, "ratio", lambda_ratio(r.lambda_star, opt), clock.ms());
    }
  } else if (config.mode == "singlehop") {
    SingleHopInstance inst = gen_singlehop(config, seeds);
    const double total = inst.total_arrival();
    const bool oracle = inst.ingress_count() <= 10;
    const double opt = oracle ? brute_force_max_loss(inst).loss : 0.0;
    for (const auto& algo : algos) {
      Stopwatch clock(config.timing);
      LossResult r = run_singlehop_loss(algo, inst, seeds.adversary);
      const double ms = clock.ms();
      emit(algo, "loss_ratio", r.loss / total, ms);
      if (!oracle) continue;
      if (opt > 1e-12) emit(algo, "ratio", r.loss / opt, ms);
      emit(algo, "gap", (opt - r.loss) / total, ms);
    }
  } else if (config.mode == "selection") {
    SingleHopSelection sel = gen_selection(config, seeds);
    const double opt = brute_force_select(sel).loss;
    auto ratio = [&](double loss) { return opt > 1e-12 ? loss / opt : 1.0; };
    for (const auto& algo : algos) {
      Stopwatch clock(config.timing);
      double loss;
      if (algo == "heuristic") {
        loss = select_singlehop_maxloss(sel).loss;
      } else if (algo == "heuristic_opt") {
        auto chosen = select_singlehop_maxloss(sel).chosen;
        loss = brute_force_max_loss(with_adversarial_ingress(sel.base, chosen)).loss;
      } else if (algo == "brute") {
        loss = opt;
      } else {
        throw Error("bad-config", "unknown selection algorithm '" + algo + "'");
      }
      emit(algo, "ratio", ratio(loss), clock.ms());
    }
  } else {
    SetFamily family = gen_set_family(config.elements, config.sets, config.density, seeds.topology);
    SingleHopInstance inst = setcover_loss_instance(config.elements, family);
    for (const auto& algo : algos) {
      Stopwatch clock(config.timing);
      LossResult r = run_singlehop_loss(algo, inst, seeds.adversary);
      emit(algo, "loss", r.loss, clock.ms());
    }
  }
  return out;
}

}  // namespace detail

/// Runs every instance of `cell`; `jobs` worker threads, results folded in
/// instance order so the output does not depend on scheduling.
inline CellOutcome run_cell(const SweepCell& cell, int first_instance, int jobs = 1) {
  const GenConfig& config = cell.config;
  const int n = config.instance_count();
  std::vector<std::vector<SweepRecord>> results(n);
  std::vector<std::optional<std::string>> errors(n);
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int k = next++; k < n; k = next++) {
      InstanceSeeds seeds = instance_seeds(config, k);
      try {
        results[k] = detail::run_instance(config, seeds);
      } catch (const Error& e) {
        errors[k] = "instance " + std::to_string(first_instance + k) + ": " + e.format();
      }
    }
  };
  const int threads = std::max(1, std::min(jobs, n));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  CellOutcome out;
  out.cell = cell;
  out.first_instance = first_instance;
  std::map<std::pair<std::string, std::string>, std::size_t> slot;
  for (int k = 0; k < n; ++k) {
    if (errors[k]) {
      ++out.failures;
      out.failure_messages.push_back(*errors[k]);
      continue;
    }
    for (SweepRecord& r : results[k]) {
      r.instance_id = first_instance + k;
      auto key = std::make_pair(r.algo, r.metric);
      auto it = slot.find(key);
      if (it == slot.end()) {
        it = slot.emplace(key, out.stats.size()).first;
        out.stats.push_back({key, SweepStats{}});
      }
      out.stats[it->second].second.values.push_back(r.value);
      out.records.push_back(std::move(r));
    }
  }
  for (auto& [key, stats] : out.stats) stats = summarize(std::move(stats.values));
  return out;
}

inline std::vector<CellOutcome> run_sweep(const std::vector<SweepCell>& cells, int jobs = 1) {
  std::vector<CellOutcome> out;
  int next_id = 0;
  for (const SweepCell& cell : cells) {
    out.push_back(run_cell(cell, next_id, jobs));
    next_id += cell.config.instance_count();
  }
  return out;
}

// ---- output ----

inline std::string format_number(double v) {
  if (is_infinite(v)) return "inf";
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string sweep_csv(const std::vector<CellOutcome>& outcomes) {
  std::ostringstream out;
  out << "instance_id,topology_seed,adv_seed,cap_seed,algo,metric,value,runtime_ms\n";
  for (const CellOutcome& cell : outcomes) {
    for (const SweepRecord& r : cell.records) {
      out << r.instance_id << ',' << r.seeds.topology << ',' << r.seeds.adversary << ',' << r.seeds.capacity
          << ',' << r.algo << ',' << r.metric << ',' << format_number(r.value) << ','
          << format_number(r.runtime_ms) << '\n';
    }
  }
  return out.str();
}

inline std::string sweep_cdf_csv(const std::vector<CellOutcome>& outcomes) {
  std::ostringstream out;
  out << "cell,algo,metric,value,cumulative_fraction\n";
  for (std::size_t c = 0; c < outcomes.size(); ++c) {
    for (const auto& [key, stats] : outcomes[c].stats) {
      for (auto [v, f] : stats.cdf()) {
        out << c << ',' << key.first << ',' << key.second << ',' << format_number(v) << ','
            << format_number(f) << '\n';
      }
    }
  }
  return out.str();
}

inline Json stat_json(double v) { return std::isfinite(v) ? Json(v) : Json(format_number(v)); }

inline Json sweep_summary(const std::vector<CellOutcome>& outcomes, std::uint64_t seed) {
  Json j;
  j["seed"] = seed;
  Json cells = Json::array();
  for (std::size_t c = 0; c < outcomes.size(); ++c) {
    const CellOutcome& o = outcomes[c];
    const GenConfig& cfg = o.cell.config;
    Json cell;
    cell["cell"] = c;
    cell["mode"] = cfg.mode;
    cell["params"] = o.cell.params;
    cell["seed"] = cfg.seed;
    cell["first_instance_id"] = o.first_instance;
    cell["instances"] = cfg.instance_count();
    cell["failures"] = o.failures;
    if (!o.failure_messages.empty()) cell["failure_messages"] = o.failure_messages;
    Json stats = Json::object();
    for (const auto& [key, s] : o.stats) {
      stats[key.first][key.second] = {{"count", s.values.size()}, {"mean", stat_json(s.mean)},
                                      {"p10", stat_json(s.p10)},   {"p90", stat_json(s.p90)},
                                      {"min", stat_json(s.min)},   {"max", stat_json(s.max)}};
    }
    cell["stats"] = std::move(stats);
    cells.push_back(std::move(cell));
  }
  j["cells"] = std::move(cells);
  return j;
}

/// Writes `<out>.csv`, `<out>.summary.json` and `<out>.cdf.csv`.
inline void write_sweep(const std::string& out, const std::vector<CellOutcome>& outcomes, std::uint64_t seed) {
  write_text_file(out + ".csv", sweep_csv(outcomes));
  write_text_file(out + ".summary.json", sweep_summary(outcomes, seed).dump(2) + "\n");
  write_text_file(out + ".cdf.csv", sweep_cdf_csv(outcomes));
}

}  // namespace rattack
