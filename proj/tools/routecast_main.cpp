// Command line front end: single-shot planning, the two comparison
// experiments, and offline calibration table generation.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "routecast/dynamic_estimator.hpp"
#include "routecast/errors.hpp"
#include "routecast/experiment.hpp"
#include "routecast/planner.hpp"
#include "routecast/rng.hpp"
#include "routecast/scalar_kf.hpp"
#include "routecast/sim_world.hpp"
#include "routecast/text_io.hpp"
#include "routecast/topo_map.hpp"

namespace {

using namespace routecast;

TopologyMap map_by_name_or_path(const std::string& name) {
  if (const auto builtin = builtin_map_by_name(name)) return builtin_map(*builtin);
  return load_map(std::filesystem::path(name));
}

void print_summary(const RunSummary& summary) {
  std::printf("%-10s %-6s %-3s %5s %12s %12s %9s\n", "mode", "bundle", "reg", "runs",
              "mean[s]", "std[s]", "saving%%");
  for (const SummaryCell& c : summary.cells)
    std::printf("%-10s %-6u %-3d %5u %12.4f %12.4f %9.2f\n",
                std::string(to_string(c.mode)).c_str(), c.bundle, c.regression_no,
                c.n_runs, c.mean_scored, c.std_scored, c.saving_vs_heuristic_pct);
}

int cmd_plan(const std::string& map_name, const std::string& mode_name, NodeId source,
             NodeId dest, std::uint64_t seed, bool execute) {
  const auto mode = plan_mode_from_string(mode_name);
  if (!mode) throw Error("unknown mode '" + mode_name + "'");

  const TopologyMap map = map_by_name_or_path(map_name);
  SimWorldConfig wc;
  wc.seed = seed;

  std::unique_ptr<ObservationTable> table;
  std::unique_ptr<ScalarFilterBank> bank;
  std::unique_ptr<DynamicEstimator> estimator;
  std::unique_ptr<CostProvider> provider;
  switch (*mode) {
    case PlanMode::heuristic:
      provider = std::make_unique<HeuristicCostProvider>(map, wc.nominal_speed_mps);
      break;
    case PlanMode::static_kf: {
      SimWorldConfig tc = wc;
      tc.seed = mix_seed(seed, 0x7B01);
      table = std::make_unique<ObservationTable>(build_offline_table(SimWorld(map, tc), 64));
      bank = std::make_unique<ScalarFilterBank>(map, 1.0, kDefaultScalarProcessVar,
                                                kDefaultScalarObservationVar,
                                                wc.nominal_speed_mps);
      provider = std::make_unique<StaticKfCostProvider>(*table, *bank);
      break;
    }
    case PlanMode::dynamic_kf: {
      estimator = std::make_unique<DynamicEstimator>(
          map, BilinearParams::make_default(2, seed), wc.nominal_speed_mps);
      provider = std::make_unique<DynamicKfCostProvider>(*estimator);
      break;
    }
  }

  PathResult path = shortest_path(map, source, dest, *provider);

  std::printf("path %u -> %u (%s)\n", path.source, path.dest,
              std::string(provider->name()).c_str());
  std::printf("  nodes: %u", path.source);
  for (std::size_t e : path.edges) std::printf(" %u", map.edge(e).to);
  std::printf("\n  edges:");
  for (std::size_t e : path.edges) std::printf(" %zu", e);
  std::printf("\n  planned_cost: %s s\n", format_double(path.planned_cost_sec).c_str());

  if (execute) {
    SimWorld world(map, wc);
    std::uint32_t recharges = 0;
    for (;;) {
      path = execute_path(world, path);
      if (!path.battery_exhausted) break;
      if (++recharges > 32) throw Error("battery budget exhausted 32 times; giving up");
      world.recharge();
    }
    std::printf("  executed_cost: %s s (%u recharge%s)\n",
                format_double(path.executed_cost_sec).c_str(), recharges,
                recharges == 1 ? "" : "s");
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"travel-cost aware route planning testbed"};
  app.require_subcommand(1);

  // plan
  auto* plan = app.add_subcommand("plan", "plan one path on a map");
  std::string plan_map = "map1";
  std::string plan_mode = "heuristic";
  NodeId plan_source = 0;
  NodeId plan_dest = 0;
  std::uint64_t plan_seed = 1;
  bool plan_execute = false;
  plan->add_option("--map", plan_map, "builtin map name or map file path");
  plan->add_option("--mode", plan_mode, "heuristic|static_kf|dynamic_kf");
  plan->add_option("--source", plan_source, "source node id")->required();
  plan->add_option("--dest", plan_dest, "destination node id")->required();
  plan->add_option("--seed", plan_seed, "seed for table/parameter draws");
  plan->add_flag("--execute", plan_execute, "also execute the path in the simulator");

  // shared experiment options
  struct ExpArgs {
    std::string config;
    std::string map;
    std::string out;
    std::string score;
    std::string k_mode;
    std::uint64_t seed = 0;
    std::uint32_t n_plans = 0;
    std::vector<std::uint32_t> bundles;
    std::vector<int> regs;
  };
  auto add_common = [](CLI::App* sub, ExpArgs& args, const char* default_out) {
    sub->add_option("--config", args.config, "experiment config file");
    sub->add_option("--map", args.map, "builtin map name or map file path");
    sub->add_option("--seed", args.seed, "master seed");
    sub->add_option("--out", args.out, "output directory for csv files")
        ->default_val(default_out);
    sub->add_option("--score", args.score, "executed|estimated");
    sub->add_option("--k-mode", args.k_mode, "per_edge|path_depth");
  };

  auto* exp1 = app.add_subcommand("exp1", "heuristic vs static estimation");
  ExpArgs a1;
  add_common(exp1, a1, "runs/exp1");
  exp1->add_option("--n-plans", a1.n_plans, "planning cycles per mode");

  auto* exp2 = app.add_subcommand("exp2", "heuristic vs dynamic estimation");
  ExpArgs a2;
  add_common(exp2, a2, "runs/exp2");
  exp2->add_option("--bundles", a2.bundles, "bundle sizes")->delimiter(',');
  exp2->add_option("--regs", a2.regs, "regression orders")->delimiter(',');

  auto* gen = app.add_subcommand("gen-table", "generate an offline calibration table");
  std::string gen_map = "map1";
  std::string gen_out = "table.csv";
  std::uint64_t gen_seed = 1;
  std::uint32_t gen_max_k = 64;
  gen->add_option("--map", gen_map, "builtin map name or map file path");
  gen->add_option("--seed", gen_seed, "world seed for the calibration runs");
  gen->add_option("--max-k", gen_max_k, "observations per edge");
  gen->add_option("--out", gen_out, "output csv path");

  CLI11_PARSE(app, argc, argv);

  const auto apply_common = [](const CLI::App* sub, const ExpArgs& args,
                               routecast::ExperimentConfig& cfg) {
    if (sub->count("--map")) cfg.map_name = args.map;
    if (sub->count("--seed")) cfg.seed = args.seed;
    if (sub->count("--score")) {
      if (args.score == "executed") cfg.score = routecast::ScoreMode::executed;
      else if (args.score == "estimated") cfg.score = routecast::ScoreMode::estimated;
      else throw routecast::Error("score must be executed|estimated");
    }
    if (sub->count("--k-mode")) {
      if (args.k_mode == "per_edge") cfg.k_mode = routecast::KMode::per_edge;
      else if (args.k_mode == "path_depth") cfg.k_mode = routecast::KMode::path_depth;
      else throw routecast::Error("k-mode must be per_edge|path_depth");
    }
  };

  try {
    if (plan->parsed())
      return cmd_plan(plan_map, plan_mode, plan_source, plan_dest, plan_seed, plan_execute);

    if (exp1->parsed()) {
      ExperimentConfig cfg =
          a1.config.empty() ? ExperimentConfig{} : load_config(std::filesystem::path(a1.config));
      apply_common(exp1, a1, cfg);
      if (exp1->count("--n-plans")) cfg.n_plans = a1.n_plans;
      const RunSummary summary = run_experiment1(cfg);
      emit_csv(summary, cfg, a1.out);
      print_summary(summary);
      std::printf("wrote %s/{runs.csv,summary.csv,config.echo}\n", a1.out.c_str());
      return 0;
    }

    if (exp2->parsed()) {
      ExperimentConfig cfg =
          a2.config.empty() ? ExperimentConfig{} : load_config(std::filesystem::path(a2.config));
      apply_common(exp2, a2, cfg);
      if (exp2->count("--bundles")) cfg.bundle_sizes = a2.bundles;
      if (exp2->count("--regs")) cfg.regression_nos = a2.regs;
      const RunSummary summary = run_experiment2(cfg);
      emit_csv(summary, cfg, a2.out);
      print_summary(summary);
      std::printf("wrote %s/{runs.csv,summary.csv,config.echo}\n", a2.out.c_str());
      return 0;
    }

    if (gen->parsed()) {
      const TopologyMap map = map_by_name_or_path(gen_map);
      SimWorldConfig wc;
      wc.seed = gen_seed;
      const ObservationTable table = build_offline_table(SimWorld(map, wc), gen_max_k);
      table.save(std::filesystem::path(gen_out), map);
      std::printf("wrote %s (%zu rows)\n", gen_out.c_str(), table.row_count());
      return 0;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
