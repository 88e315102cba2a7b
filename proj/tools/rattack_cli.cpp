#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "rattack/rattack.hpp"

using namespace rattack;

namespace {

void emit(const Json& j, const std::string& out) {
  const std::string text = j.dump(2) + "\n";
  if (out.empty()) std::cout << text;
  else write_text_file(out, text);
}

std::vector<int> parse_id_list(const std::string& text) {
  std::vector<int> ids;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    try {
      std::size_t used = 0;
      int v = std::stoi(item, &used);
      if (used != item.size()) throw std::invalid_argument(item);
      ids.push_back(v);
    } catch (const std::exception&) {
      throw Error("bad-input", "candidate list entry '" + item + "' is not an integer");
    }
  }
  return ids;
}

int ingress_position(const SingleHopInstance& inst, int id) {
  for (int i = 0; i < inst.ingress_count(); ++i) {
    if (inst.ingress_ids[i] == id) return i;
  }
  throw Error("bad-candidate", "candidate " + std::to_string(id) + " is not an ingress id");
}

struct Options {
  std::string input, out, algo, config, candidates, objective = "min-lambda", bounds, dump_lp;
  double lambda = -1.0;
  std::uint64_t seed = 1;
  bool seed_given = false;
  int k = 1;
  int jobs = 1;
  int index = 0;
};

int cmd_validate(const Options& o) {
  Json j = read_json_file(o.input);
  if (is_singlehop_json(j)) {
    SingleHopInstance inst = singlehop_from_json(j);
    auto problems = validate_singlehop(inst);
    for (const auto& p : problems) std::cerr << "ERROR " << p << "\n";
    if (!problems.empty()) return 1;
  } else {
    AttackProblem problem = problem_from_json(j);
    auto violations = validate(problem);
    for (const auto& v : violations) std::cerr << v.format() << "\n";
    if (!violations.empty()) return 1;
  }
  std::cout << "OK\n";
  return 0;
}

AttackProblem load_multihop(const Options& o) {
  Json j = read_json_file(o.input);
  AttackProblem problem;
  if (is_singlehop_json(j)) problem = singlehop_to_multihop(singlehop_from_json(j));
  else problem = problem_from_json(j);
  if (!o.bounds.empty()) {
    Json b = read_json_file(o.bounds);
    Json merged = problem_to_json(problem);
    merged["bounds"] = b.contains("bounds") ? b.at("bounds") : b;
    problem = problem_from_json(merged);
  }
  require_valid(problem);
  return problem;
}

int cmd_min_lambda(const Options& o) {
  AttackProblem problem = load_multihop(o);
  std::ofstream trace;
  if (!o.dump_lp.empty()) {
    trace.open(o.dump_lp);
    if (!trace) throw Error("io", "cannot write '" + o.dump_lp + "'");
    lp_trace() = &trace;
  }
  AttackResult result;
  const std::string algo = o.algo.empty() ? "exact" : o.algo;
  if (algo == "exact") result = exact_min_lambda(problem);
  else if (algo == "brute") result = brute_force_min_lambda(problem);
  else if (algo == "approx2") result = approx2_min_lambda(problem);
  else if (algo == "distributed") result = distributed_heuristic(problem);
  else if (algo == "local") result = local_min_capacity_attack(problem);
  else throw Error("bad-algo", "unknown min-lambda algorithm '" + algo + "'");
  lp_trace() = nullptr;
  emit(attack_result_to_json(problem, result), o.out);
  return 0;
}

int cmd_max_loss(const Options& o) {
  Json j = read_json_file(o.input);
  const std::string algo = o.algo.empty() ? "mul" : o.algo;
  if (is_singlehop_json(j)) {
    SingleHopInstance inst = singlehop_from_json(j);
    auto problems = validate_singlehop(inst);
    if (!problems.empty()) throw Error("invalid-instance", problems.front());
    if (o.lambda >= 0.0) inst = with_total_arrival(inst, o.lambda);
    LossResult r;
    if (algo == "brute") r = brute_force_max_loss(inst);
    else if (algo == "mul") r = maxloss_multiplicative(inst);
    else if (algo == "add") r = maxloss_additive(inst);
    else if (algo == "minmu") r = minmu_baseline(inst);
    else if (algo == "rand") r = rand_baseline(inst, o.seed);
    else throw Error("bad-algo", "unknown max-loss algorithm '" + algo + "'");
    Json out = loss_result_to_json(inst, r, inst.total_arrival());
    if (algo == "rand") out["seed"] = o.seed;
    emit(out, o.out);
    return 0;
  }
  AttackProblem problem = problem_from_json(j);
  require_valid(problem);
  if (o.lambda < 0.0) throw Error("bad-input", "multi-hop max-loss needs --lambda");
  NetworkLossResult r;
  if (algo == "brute") r = brute_force_max_loss(problem, o.lambda);
  else if (algo == "add") r = maxloss_additive(problem, o.lambda);
  else throw Error("bad-algo", "multi-hop max-loss supports brute and add");
  emit(loss_result_to_json(problem, r), o.out);
  return 0;
}

int cmd_select(const Options& o) {
  Json j = read_json_file(o.input);
  const std::vector<int> ids = parse_id_list(o.candidates);
  if (ids.empty()) throw Error("bad-input", "--candidates is empty");
  if (o.objective != "min-lambda" && o.objective != "max-loss") {
    throw Error("bad-input", "--objective must be min-lambda or max-loss");
  }
  const bool loss = o.objective == "max-loss";
  const std::string algo = o.algo.empty() ? "brute" : o.algo;

  if (is_singlehop_json(j)) {
    SingleHopInstance inst = singlehop_from_json(j);
    std::fill(inst.adversarial.begin(), inst.adversarial.end(), 0);
    auto problems = validate_singlehop(inst);
    if (!problems.empty()) throw Error("invalid-instance", problems.front());
    if (o.lambda >= 0.0) inst = with_total_arrival(inst, o.lambda);
    if (loss) {
      SingleHopSelection sel{inst, {}, o.k};
      for (int id : ids) sel.candidates.push_back(ingress_position(inst, id));
      SingleHopSelectionResult r;
      if (algo == "brute") r = brute_force_select(sel);
      else if (algo == "heuristic") r = select_singlehop_maxloss(sel);
      else throw Error("bad-algo", "single-hop loss selection supports brute and heuristic");
      emit(selection_to_json(inst, r), o.out);
      return 0;
    }
    SelectionProblem sel;
    sel.base = singlehop_to_multihop(inst);
    const SingleHopLayout layout = layout_of(inst);
    for (int id : ids) sel.candidates.push_back(layout.ingress(ingress_position(inst, id)));
    sel.budget = o.k;
    SelectionResult r;
    if (algo == "brute") r = brute_force_select(sel);
    else if (algo == "parallel") r = select_parallel_min_lambda(sel);
    else throw Error("bad-algo", "min-lambda selection supports brute and parallel");
    Json out = selection_to_json(sel.base, r);
    std::vector<int> chosen;
    for (NodeId node : r.chosen) chosen.push_back(inst.ingress_ids[node - layout.ingress(0)]);
    out["chosen"] = chosen;
    emit(out, o.out);
    return 0;
  }

  SelectionProblem sel;
  sel.base = problem_from_json(j).with_adversaries({});
  require_valid(sel.base);
  sel.candidates = ids;
  sel.budget = o.k;
  sel.objective = loss ? Objective::MaxLoss : Objective::MinLambda;
  if (loss) {
    if (o.lambda < 0.0) throw Error("bad-input", "max-loss selection needs --lambda");
    sel.arrival = o.lambda;
  }
  SelectionResult r;
  if (algo == "brute") r = brute_force_select(sel);
  else if (algo == "parallel" && !loss) r = select_parallel_min_lambda(sel);
  else throw Error("bad-algo", "multi-hop selection supports brute, and parallel for min-lambda");
  emit(selection_to_json(sel.base, r), o.out);
  return 0;
}

std::vector<SweepCell> load_cells(const Options& o) {
  Json raw = read_config_file(o.config);
  if (o.seed_given) {
    Json flat = raw;
    flat["seed"] = o.seed;
    for (auto& [key, value] : flat.items()) {
      if (value.is_object() && value.contains("seed")) value.erase("seed");
    }
    raw = flat;
  }
  return cells_from_json(raw);
}

int cmd_gen(const Options& o) {
  std::vector<SweepCell> cells = load_cells(o);
  // --index is the sweep's instance_id: cells are numbered back to back.
  int local = o.index;
  const GenConfig* found = nullptr;
  for (const SweepCell& cell : cells) {
    if (local >= 0 && local < cell.config.instance_count()) {
      found = &cell.config;
      break;
    }
    local -= cell.config.instance_count();
  }
  if (!found) throw Error("bad-input", "--index outside the instance grid");
  const GenConfig& config = *found;
  InstanceSeeds seeds = instance_seeds(config, local);
  Json out;
  if (config.mode == "multihop") {
    out = problem_to_json(gen_multihop(config, seeds));
  } else if (config.mode == "setcover") {
    out = singlehop_to_json(
        setcover_loss_instance(config.elements, gen_set_family(config.elements, config.sets, config.density, seeds.topology)));
  } else {
    SingleHopInstance inst = gen_singlehop(config, seeds);
    if (config.mode == "selection") std::fill(inst.adversarial.begin(), inst.adversarial.end(), 0);
    out = singlehop_to_json(inst);
  }
  out["meta"] = {{"mode", config.mode}, {"seed", config.seed}, {"index", o.index},
                 {"topology_seed", seeds.topology}, {"adv_seed", seeds.adversary}, {"cap_seed", seeds.capacity}};
  emit(out, o.out);
  return 0;
}

int cmd_sweep(const Options& o) {
  std::vector<SweepCell> cells = load_cells(o);
  const Json flat = detail::flatten_config(read_config_file(o.config));
  std::uint64_t seed = o.seed_given ? o.seed : flat.value("seed", std::uint64_t{1});
  auto outcomes = run_sweep(cells, o.jobs);
  write_sweep(o.out, outcomes, seed);
  int failures = 0, instances = 0;
  for (const auto& c : outcomes) {
    failures += c.failures;
    instances += c.cell.config.instance_count();
  }
  std::cout << "seed " << seed << ": " << cells.size() << " cell(s), " << instances << " instance(s), "
            << failures << " failure(s); wrote " << o.out << ".csv\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Routing attack analysis: throughput minimization, loss maximization, node selection"};
  app.require_subcommand(1);
  Options o;

  auto* validate_cmd = app.add_subcommand("validate", "Check a problem or single-hop instance");
  validate_cmd->add_option("--input", o.input, "Problem JSON")->required()->check(CLI::ExistingFile);

  auto* min_cmd = app.add_subcommand("min-lambda", "Minimize no-loss throughput");
  min_cmd->add_option("--input", o.input, "Problem JSON")->required()->check(CLI::ExistingFile);
  min_cmd->add_option("--algo", o.algo, "exact|brute|approx2|distributed|local")
      ->check(CLI::IsMember({"exact", "brute", "approx2", "distributed", "local"}));
  min_cmd->add_option("--bounds", o.bounds, "Dispatch bounds JSON {\"i\":{\"j\":[lo,hi]}}")->check(CLI::ExistingFile);
  min_cmd->add_option("--out", o.out, "Result JSON (default stdout)");
  min_cmd->add_option("--dump-lp", o.dump_lp, "Write simplex tableaux to this file");

  auto* loss_cmd = app.add_subcommand("max-loss", "Maximize traffic loss");
  loss_cmd->add_option("--input", o.input, "Single-hop or problem JSON")->required()->check(CLI::ExistingFile);
  loss_cmd->add_option("--lambda", o.lambda, "Total arrival rate")->check(CLI::NonNegativeNumber);
  loss_cmd->add_option("--algo", o.algo, "brute|mul|add|minmu|rand")
      ->check(CLI::IsMember({"brute", "mul", "add", "minmu", "rand"}));
  loss_cmd->add_option("--seed", o.seed, "Seed for rand");
  loss_cmd->add_option("--out", o.out, "Result JSON (default stdout)");

  auto* select_cmd = app.add_subcommand("select", "Choose nodes to hijack");
  select_cmd->add_option("--input", o.input, "Single-hop or problem JSON")->required()->check(CLI::ExistingFile);
  select_cmd->add_option("--candidates", o.candidates, "Comma-separated candidate ids")->required();
  select_cmd->add_option("--k", o.k, "Budget")->required()->check(CLI::PositiveNumber);
  select_cmd->add_option("--objective", o.objective, "min-lambda|max-loss")
      ->check(CLI::IsMember({"min-lambda", "max-loss"}));
  select_cmd->add_option("--lambda", o.lambda, "Arrival rate for max-loss")->check(CLI::NonNegativeNumber);
  select_cmd->add_option("--algo", o.algo, "brute|parallel|heuristic")
      ->check(CLI::IsMember({"brute", "parallel", "heuristic"}));
  select_cmd->add_option("--out", o.out, "Result JSON (default stdout)");

  auto* gen_cmd = app.add_subcommand("gen", "Generate one instance from a config");
  gen_cmd->add_option("--config", o.config, "TOML or JSON config")->required()->check(CLI::ExistingFile);
  auto* gen_seed = gen_cmd->add_option("--seed", o.seed, "Override the config seed");
  gen_cmd->add_option("--index", o.index, "Instance index in the grid");
  gen_cmd->add_option("--out", o.out, "Output JSON (default stdout)");

  auto* sweep_cmd = app.add_subcommand("sweep", "Run a Monte-Carlo sweep");
  sweep_cmd->add_option("--config", o.config, "TOML or JSON config")->required()->check(CLI::ExistingFile);
  sweep_cmd->add_option("--out", o.out, "Output prefix")->required();
  sweep_cmd->add_option("--jobs", o.jobs, "Worker threads")->check(CLI::PositiveNumber);
  auto* sweep_seed = sweep_cmd->add_option("--seed", o.seed, "Override the config seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  o.seed_given = gen_seed->count() > 0 || sweep_seed->count() > 0;

  try {
    if (validate_cmd->parsed()) return cmd_validate(o);
    if (min_cmd->parsed()) return cmd_min_lambda(o);
    if (loss_cmd->parsed()) return cmd_max_loss(o);
    if (select_cmd->parsed()) return cmd_select(o);
    if (gen_cmd->parsed()) return cmd_gen(o);
    if (sweep_cmd->parsed()) return cmd_sweep(o);
  } catch (const Error& e) {
    std::cerr << e.format() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "ERROR internal: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
