#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "routecast/bilinear_kf.hpp"
#include "routecast/planner.hpp"
#include "routecast/sim_world.hpp"
#include "routecast/topo_map.hpp"

namespace routecast {

enum class PlanMode { heuristic, static_kf, dynamic_kf };
std::string_view to_string(PlanMode mode);
std::optional<PlanMode> plan_mode_from_string(std::string_view name);

enum class ScoreMode { executed, estimated };
enum class XiConfig { deterministic, stochastic };

// One scheduled roughness change: before the plan with this index starts,
// the zone's factor is set on every world in the experiment.
struct ZoneOverride {
  std::uint32_t before_plan = 0;
  std::string zone;
  double factor = 1.0;
};

// Full description of an experiment run. Loadable from and savable to a
// plain "key value" text file; a saved file reproduces the run exactly.
struct ExperimentConfig {
  std::string map_name = "map1";  // builtin name or path to a map file
  std::vector<PlanMode> modes;    // empty: the experiment's default set
  std::uint32_t n_plans = 100;    // experiment 1 length
  std::vector<std::uint32_t> bundle_sizes = {20, 40, 60, 80};
  std::vector<int> regression_nos = {2, 3, 4, 5, 6, 7, 8, 9};
  std::uint64_t seed = 1;
  std::vector<std::pair<NodeId, NodeId>> pairs;  // explicit schedule; empty: seeded
  std::uint32_t min_hops = 4;
  // Distinct source/dest pairs on the decided list; the schedule cycles
  // through them. 0 draws every scheduled plan independently.
  std::uint32_t schedule_distinct = 6;

  SimWorldConfig world;

  // static estimation
  double static_sigma2_omega = kDefaultScalarProcessVar;
  double static_sigma2_eta = kDefaultScalarObservationVar;
  double static_p0 = 1.0;
  std::uint32_t table_max_k = 0;  // 0: sized automatically from the run length

  // dynamic estimation
  double phi = 0.2;
  double xi_mean = 0.1;
  double xi_std = 0.1;
  XiConfig xi_mode = XiConfig::deterministic;
  double q_std = 0.35;
  double r_std = 0.15;
  double dyn_x_var0 = 1.0;
  std::vector<double> dyn_b;      // empty: drawn from the seed
  std::vector<double> dyn_c;      // row-major, same
  std::uint32_t recharge_every = 10;

  KMode k_mode = KMode::per_edge;
  ScoreMode score = ScoreMode::executed;
  std::vector<ZoneOverride> zone_overrides;

  void validate() const;
};

ExperimentConfig load_config(std::istream& in, std::string_view origin = "<stream>");
ExperimentConfig load_config(const std::filesystem::path& path);
void save_config(const ExperimentConfig& cfg, std::ostream& out);

// Resolves the map named by the config (builtin or file).
TopologyMap resolve_map(const ExperimentConfig& cfg);

// Resolves the plan schedule: the explicit pair list when given, otherwise
// seeded uniform draws over ordered pairs at directed hop distance
// >= min_hops. With schedule_distinct > 0 only that many pairs are drawn and
// the schedule cycles through them for `count` plans.
std::vector<std::pair<NodeId, NodeId>> resolve_schedule(const ExperimentConfig& cfg,
                                                        const TopologyMap& map,
                                                        std::uint32_t count);

struct RunRecord {
  std::string id;
  PlanMode mode = PlanMode::heuristic;
  std::uint32_t bundle = 0;    // experiment 2 bundle size; 0 in experiment 1
  int regression_no = 0;       // dynamic runs only; 0 otherwise
  std::uint32_t plan_index = 0;
  NodeId source = 0;
  NodeId dest = 0;
  std::vector<std::size_t> edges;
  double planned_sec = 0.0;
  double executed_sec = 0.0;
  double scored_sec = 0.0;     // executed_sec under the default score mode
};

struct SummaryCell {
  PlanMode mode = PlanMode::heuristic;
  std::uint32_t bundle = 0;
  int regression_no = 0;
  std::uint32_t n_runs = 0;
  double mean_scored = 0.0;
  double std_scored = 0.0;
  double saving_vs_heuristic_pct = 0.0;  // 0 for the heuristic cells themselves
};

struct RunSummary {
  std::string experiment;  // "exp1" or "exp2"
  std::string map_name;
  std::vector<RunRecord> runs;
  std::vector<SummaryCell> cells;

  const SummaryCell* find_cell(PlanMode mode, std::uint32_t bundle,
                               int regression_no) const;
};

// Experiment 1: heuristic vs static estimation over n_plans planning cycles
// against one evolving world per mode (identical seeds, identical schedule).
RunSummary run_experiment1(const ExperimentConfig& cfg);

// Experiment 2: heuristic vs dynamic estimation over repeated-plan bundles,
// sweeping bundle_sizes x regression_nos. Within a cell the filters learn
// only from that cell's own executions.
RunSummary run_experiment2(const ExperimentConfig& cfg);

// Writes runs.csv, summary.csv and config.echo into out_dir (created if
// missing). config.echo reloads as an ExperimentConfig that reproduces
// runs.csv byte for byte.
void emit_csv(const RunSummary& summary, const ExperimentConfig& cfg,
              const std::filesystem::path& out_dir);

}  // namespace routecast
