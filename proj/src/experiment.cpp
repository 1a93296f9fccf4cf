#include "routecast/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <memory>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>
#include <string>

#include "routecast/dynamic_estimator.hpp"
#include "routecast/errors.hpp"
#include "routecast/rng.hpp"
#include "routecast/text_io.hpp"

namespace routecast {

namespace {

// Seed stream tags. Every consumer of randomness hangs off the master seed
// through its own tag, so consumers never perturb each other.
constexpr std::uint64_t kScheduleStream = 0x5CED01;
constexpr std::uint64_t kTableStream = 0x7B01;
constexpr std::uint64_t kWorldStream = 0x30AD;
constexpr std::uint64_t kDynParamStream = 0xD7A3;
constexpr std::uint64_t kXiStreamBase = 0xE0000;

constexpr std::uint32_t kMaxRechargesPerPlan = 32;

}  // namespace

std::string_view to_string(PlanMode mode) {
  switch (mode) {
    case PlanMode::heuristic: return "heuristic";
    case PlanMode::static_kf: return "static_kf";
    case PlanMode::dynamic_kf: return "dynamic_kf";
  }
  return "?";
}

std::optional<PlanMode> plan_mode_from_string(std::string_view name) {
  if (name == "heuristic") return PlanMode::heuristic;
  if (name == "static_kf") return PlanMode::static_kf;
  if (name == "dynamic_kf") return PlanMode::dynamic_kf;
  return std::nullopt;
}

void ExperimentConfig::validate() const {
  if (map_name.empty()) throw ValidationError("config: map must be set");
  if (n_plans == 0) throw ValidationError("config: n_plans must be >= 1");
  if (bundle_sizes.empty()) throw ValidationError("config: bundle_sizes must be non-empty");
  for (std::uint32_t b : bundle_sizes)
    if (b == 0) throw ValidationError("config: bundle sizes must be >= 1");
  if (regression_nos.empty())
    throw ValidationError("config: regression_nos must be non-empty");
  for (int r : regression_nos)
    if (r < 1 || r > 16)
      throw ValidationError("config: regression_no must be in [1, 16]");
  if (min_hops == 0) throw ValidationError("config: min_hops must be >= 1");
  world.validate();
  if (!(static_sigma2_omega >= 0.0) || !(static_sigma2_eta >= 0.0))
    throw ValidationError("config: static filter variances must be >= 0");
  if (!(static_p0 >= 0.0)) throw ValidationError("config: static_p0 must be >= 0");
  if (!std::isfinite(phi)) throw ValidationError("config: phi must be finite");
  if (!(xi_std >= 0.0) || !(q_std >= 0.0) || !(r_std >= 0.0) || !(dyn_x_var0 >= 0.0))
    throw ValidationError("config: dynamic filter spreads must be >= 0");

  const int reg_max = *std::max_element(regression_nos.begin(), regression_nos.end());
  if (!dyn_b.empty() && dyn_b.size() < static_cast<std::size_t>(reg_max))
    throw ValidationError("config: dyn_b shorter than the largest regression_no");
  if (!dyn_c.empty()) {
    const auto width = static_cast<std::size_t>(std::llround(std::sqrt(
        static_cast<double>(dyn_c.size()))));
    if (width * width != dyn_c.size())
      throw ValidationError("config: dyn_c must hold a square row-major matrix");
    if (width < static_cast<std::size_t>(reg_max))
      throw ValidationError("config: dyn_c smaller than the largest regression_no");
  }
  for (const ZoneOverride& z : zone_overrides) {
    if (z.zone.empty()) throw ValidationError("config: zone override without a zone");
    if (!(z.factor >= 1.0))
      throw ValidationError("config: zone override factor must be >= 1.0");
  }
  for (const auto& [a, b] : pairs)
    if (a == b) throw ValidationError("config: schedule pair with source == dest");
}

TopologyMap resolve_map(const ExperimentConfig& cfg) {
  if (const auto builtin = builtin_map_by_name(cfg.map_name)) return builtin_map(*builtin);
  return load_map(std::filesystem::path(cfg.map_name));
}

namespace {

// Directed hop distances from every node (small maps; O(V*(V+E))).
std::vector<std::vector<std::uint32_t>> all_hops(const TopologyMap& map) {
  constexpr auto kUnreached = std::numeric_limits<std::uint32_t>::max();
  const std::size_t n = map.node_count();
  std::vector<std::vector<std::uint32_t>> hops(n, std::vector<std::uint32_t>(n, kUnreached));
  for (NodeId s = 0; s < n; ++s) {
    hops[s][s] = 0;
    std::deque<NodeId> frontier{s};
    while (!frontier.empty()) {
      const NodeId u = frontier.front();
      frontier.pop_front();
      for (const TopologyMap::OutEdge& out : map.out_edges(u)) {
        if (hops[s][out.to] == kUnreached) {
          hops[s][out.to] = hops[s][u] + 1;
          frontier.push_back(out.to);
        }
      }
    }
  }
  return hops;
}

}  // namespace

std::vector<std::pair<NodeId, NodeId>> resolve_schedule(const ExperimentConfig& cfg,
                                                        const TopologyMap& map,
                                                        std::uint32_t count) {
  constexpr auto kUnreached = std::numeric_limits<std::uint32_t>::max();
  const auto hops = all_hops(map);

  if (!cfg.pairs.empty()) {
    for (const auto& [src, dst] : cfg.pairs) {
      if (src >= map.node_count() || dst >= map.node_count())
        throw ValidationError("schedule pair references unknown node");
      if (hops[src][dst] == kUnreached)
        throw ValidationError("schedule pair " + std::to_string(src) + "->" +
                              std::to_string(dst) + " is unreachable");
    }
    if (cfg.pairs.size() < count)
      throw ValidationError("explicit schedule has fewer pairs than plans");
    return {cfg.pairs.begin(), cfg.pairs.begin() + count};
  }

  const auto n = static_cast<std::uint32_t>(map.node_count());
  bool feasible = false;
  for (NodeId a = 0; a < n && !feasible; ++a)
    for (NodeId b = 0; b < n && !feasible; ++b)
      feasible = a != b && hops[a][b] != kUnreached && hops[a][b] >= cfg.min_hops;
  if (!feasible)
    throw ValidationError("no node pair at hop distance >= " +
                          std::to_string(cfg.min_hops) + " exists on this map");

  Rng rng(mix_seed(cfg.seed, kScheduleStream));
  const std::size_t distinct =
      cfg.schedule_distinct == 0
          ? count
          : std::min<std::size_t>(cfg.schedule_distinct, count);
  std::vector<std::pair<NodeId, NodeId>> list;
  list.reserve(distinct);
  while (list.size() < distinct) {
    const NodeId src = rng.uniform_below(n);
    const NodeId dst = rng.uniform_below(n);
    if (src == dst) continue;
    if (hops[src][dst] == kUnreached || hops[src][dst] < cfg.min_hops) continue;
    list.emplace_back(src, dst);
  }
  std::vector<std::pair<NodeId, NodeId>> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(list[i % list.size()]);
  return out;
}

namespace {

struct DynParamBase {
  std::vector<double> b;
  std::vector<double> c_flat;  // row-major, width x width
  std::size_t width = 0;
};

DynParamBase resolve_dyn_base(const ExperimentConfig& cfg) {
  const int reg_max =
      *std::max_element(cfg.regression_nos.begin(), cfg.regression_nos.end());
  DynParamBase base;
  if (!cfg.dyn_b.empty() && !cfg.dyn_c.empty()) {
    base.b = cfg.dyn_b;
    base.c_flat = cfg.dyn_c;
    base.width = static_cast<std::size_t>(
        std::llround(std::sqrt(static_cast<double>(cfg.dyn_c.size()))));
    return base;
  }
  const BilinearParams drawn =
      BilinearParams::make_default(reg_max, mix_seed(cfg.seed, kDynParamStream));
  base.b = cfg.dyn_b.empty() ? drawn.b : cfg.dyn_b;
  if (cfg.dyn_c.empty()) {
    base.width = static_cast<std::size_t>(reg_max);
    base.c_flat.resize(base.width * base.width);
    for (int r = 0; r < reg_max; ++r)
      for (int z = 0; z < reg_max; ++z)
        base.c_flat[static_cast<std::size_t>(r) * base.width + z] = drawn.c(r, z);
  } else {
    base.c_flat = cfg.dyn_c;
    base.width = static_cast<std::size_t>(
        std::llround(std::sqrt(static_cast<double>(cfg.dyn_c.size()))));
  }
  return base;
}

BilinearParams slice_params(const ExperimentConfig& cfg, const DynParamBase& base,
                            int reg) {
  BilinearParams p;
  p.regression_no = reg;
  p.phi.assign(reg, cfg.phi);
  p.b.assign(base.b.begin(), base.b.begin() + reg);
  p.c.resize(reg, reg);
  for (int r = 0; r < reg; ++r)
    for (int z = 0; z < reg; ++z)
      p.c(r, z) = base.c_flat[static_cast<std::size_t>(r) * base.width + z];
  p.xi_mean = cfg.xi_mean;
  p.xi_std = cfg.xi_std;
  p.q_std = cfg.q_std;
  p.r_std = cfg.r_std;
  p.x_var0 = cfg.dyn_x_var0;
  p.validate();
  return p;
}

SimWorldConfig world_config(const ExperimentConfig& cfg) {
  SimWorldConfig wc = cfg.world;
  wc.seed = mix_seed(cfg.seed, kWorldStream);
  return wc;
}

// One planning mode's evolving state over an experiment: its own world
// (identically seeded across modes), its provider, and its learning state.
struct ModeRunner {
  PlanMode mode;
  SimWorld world;
  std::unique_ptr<ScalarFilterBank> bank;
  std::unique_ptr<DynamicEstimator> estimator;
  std::unique_ptr<CostProvider> provider;

  ModeRunner(PlanMode mode_in, const TopologyMap& map, const ExperimentConfig& cfg,
             const ObservationTable* table, int reg, std::uint64_t xi_tag)
      : mode(mode_in), world(map, world_config(cfg)) {
    const double speed = cfg.world.nominal_speed_mps;
    switch (mode) {
      case PlanMode::heuristic:
        provider = std::make_unique<HeuristicCostProvider>(world.map(), speed);
        break;
      case PlanMode::static_kf:
        bank = std::make_unique<ScalarFilterBank>(world.map(), cfg.static_p0,
                                                  cfg.static_sigma2_omega,
                                                  cfg.static_sigma2_eta, speed);
        provider = std::make_unique<StaticKfCostProvider>(*table, *bank, cfg.k_mode);
        break;
      case PlanMode::dynamic_kf: {
        const auto xi_mode = cfg.xi_mode == XiConfig::stochastic
                                 ? DynamicEstimator::XiMode::stochastic
                                 : DynamicEstimator::XiMode::deterministic;
        estimator = std::make_unique<DynamicEstimator>(
            world.map(), slice_params(cfg, resolve_dyn_base(cfg), reg), speed, xi_mode,
            mix_seed(cfg.seed, kXiStreamBase + xi_tag));
        provider = std::make_unique<DynamicKfCostProvider>(*estimator);
        break;
      }
    }
  }

  // Plan, then execute to completion, recharging as often as the battery
  // demands. Dynamic runners learn from every executed traversal.
  PathResult run_plan(NodeId src, NodeId dst) {
    PathResult path = shortest_path(world.map(), src, dst, *provider);
    const std::size_t log_before = world.log().size();
    std::uint32_t recharges = 0;
    for (;;) {
      path = execute_path(world, path);
      if (!path.battery_exhausted) break;
      if (++recharges > kMaxRechargesPerPlan)
        throw Error("plan could not be completed within the recharge budget");
      world.recharge();
    }
    if (estimator)
      for (std::size_t i = log_before; i < world.log().size(); ++i)
        estimator->record_traversal(world.log()[i].edge, world.log()[i].observed_time_sec);
    return path;
  }
};

void apply_plan_epoch(const ExperimentConfig& cfg, std::uint32_t plan_index,
                      std::vector<ModeRunner>& runners) {
  for (const ZoneOverride& z : cfg.zone_overrides)
    if (z.before_plan == plan_index)
      for (ModeRunner& r : runners) r.world.set_zone_factor(z.zone, z.factor);
  if (cfg.recharge_every != 0 && plan_index != 0 && plan_index % cfg.recharge_every == 0)
    for (ModeRunner& r : runners) r.world.recharge();
}

std::string plan_id(PlanMode mode, std::uint32_t bundle, int reg, std::uint32_t index) {
  const char* prefix = mode == PlanMode::heuristic  ? "h"
                       : mode == PlanMode::static_kf ? "s"
                                                     : "d";
  char buf[64];
  if (bundle == 0) {
    std::snprintf(buf, sizeof buf, "%s-p%03u", prefix, index);
  } else if (reg == 0) {
    std::snprintf(buf, sizeof buf, "%s-b%u-p%03u", prefix, bundle, index);
  } else {
    std::snprintf(buf, sizeof buf, "%s-b%u-r%d-p%03u", prefix, bundle, reg, index);
  }
  return buf;
}

double mean_of(const std::vector<double>& xs) {
  return xs.empty() ? 0.0
                    : std::accumulate(xs.begin(), xs.end(), 0.0) /
                          static_cast<double>(xs.size());
}

double sample_std(const std::vector<double>& xs) {
  if (xs.size() < 2) return 0.0;
  const double m = mean_of(xs);
  double acc = 0.0;
  for (double x : xs) acc += (x - m) * (x - m);
  return std::sqrt(acc / static_cast<double>(xs.size() - 1));
}

SummaryCell make_cell(PlanMode mode, std::uint32_t bundle, int reg,
                      const std::vector<double>& scored, double heuristic_mean) {
  SummaryCell cell;
  cell.mode = mode;
  cell.bundle = bundle;
  cell.regression_no = reg;
  cell.n_runs = static_cast<std::uint32_t>(scored.size());
  cell.mean_scored = mean_of(scored);
  cell.std_scored = sample_std(scored);
  cell.saving_vs_heuristic_pct =
      (mode == PlanMode::heuristic || heuristic_mean == 0.0)
          ? 0.0
          : 100.0 * (heuristic_mean - cell.mean_scored) / heuristic_mean;
  return cell;
}

// Estimated-cost accounting: value a path by what the estimation model says the
// edges cost, walking the path in order so the tentative chain grows as it
// would during planning.
double rescore_path_dynamic(DynamicEstimator& est, const std::vector<std::size_t>& edges) {
  std::vector<double> chain;
  chain.reserve(edges.size());
  double total = 0.0;
  for (std::size_t e : edges) {
    const double c = est.query_cost(e, chain);
    chain.push_back(c);
    total += c;
  }
  return total;
}

double rescore_path_static(const ScalarFilterBank& bank,
                           const std::vector<std::size_t>& edges) {
  double total = 0.0;
  for (std::size_t e : edges) total += bank.filter(e).estimate();
  return total;
}

}  // namespace

const SummaryCell* RunSummary::find_cell(PlanMode mode, std::uint32_t bundle,
                                         int regression_no) const {
  for (const SummaryCell& c : cells)
    if (c.mode == mode && c.bundle == bundle && c.regression_no == regression_no)
      return &c;
  return nullptr;
}

RunSummary run_experiment1(const ExperimentConfig& cfg) {
  cfg.validate();
  const TopologyMap map = resolve_map(cfg);

  std::vector<PlanMode> modes = cfg.modes;
  if (modes.empty()) modes = {PlanMode::heuristic, PlanMode::static_kf};
  if (std::find(modes.begin(), modes.end(), PlanMode::heuristic) == modes.end())
    throw ValidationError("experiment 1 needs the heuristic mode as its baseline");
  if (cfg.score == ScoreMode::estimated &&
      std::find(modes.begin(), modes.end(), PlanMode::static_kf) == modes.end())
    throw ValidationError("estimated scoring needs an estimating mode");

  const auto pairs = resolve_schedule(cfg, map, cfg.n_plans);

  // The calibration table exists only if something consumes it.
  std::unique_ptr<ObservationTable> table;
  if (std::find(modes.begin(), modes.end(), PlanMode::static_kf) != modes.end()) {
    SimWorldConfig wc = cfg.world;
    wc.seed = mix_seed(cfg.seed, kTableStream);
    const std::uint32_t max_k =
        cfg.table_max_k != 0 ? cfg.table_max_k : cfg.n_plans + 8;
    table = std::make_unique<ObservationTable>(
        build_offline_table(SimWorld(map, wc), max_k));
  }

  std::vector<ModeRunner> runners;
  runners.reserve(modes.size());
  const int reg = cfg.regression_nos.front();
  for (std::size_t i = 0; i < modes.size(); ++i)
    runners.emplace_back(modes[i], map, cfg, table.get(), reg, i + 1);

  RunSummary summary;
  summary.experiment = "exp1";
  summary.map_name = cfg.map_name;

  std::vector<std::vector<double>> scored_by_mode(modes.size());
  for (std::uint32_t i = 0; i < cfg.n_plans; ++i) {
    apply_plan_epoch(cfg, i, runners);

    std::vector<PathResult> results;
    results.reserve(runners.size());
    for (ModeRunner& r : runners) results.push_back(r.run_plan(pairs[i].first, pairs[i].second));

    for (std::size_t mi = 0; mi < runners.size(); ++mi) {
      const ModeRunner& r = runners[mi];
      const PathResult& path = results[mi];

      double scored = path.executed_cost_sec;
      if (cfg.score == ScoreMode::estimated) {
        if (r.mode == PlanMode::heuristic) {
          for (const ModeRunner& other : runners)
            if (other.mode == PlanMode::static_kf) {
              scored = rescore_path_static(*other.bank, path.edges);
              break;
            }
        } else {
          scored = path.planned_cost_sec;
        }
      }

      RunRecord rec;
      rec.id = plan_id(r.mode, 0, 0, i);
      rec.mode = r.mode;
      rec.plan_index = i;
      rec.source = pairs[i].first;
      rec.dest = pairs[i].second;
      rec.edges = path.edges;
      rec.planned_sec = path.planned_cost_sec;
      rec.executed_sec = path.executed_cost_sec;
      rec.scored_sec = scored;
      summary.runs.push_back(std::move(rec));
      scored_by_mode[mi].push_back(scored);
    }
  }

  double heuristic_mean = 0.0;
  for (std::size_t mi = 0; mi < modes.size(); ++mi)
    if (modes[mi] == PlanMode::heuristic) heuristic_mean = mean_of(scored_by_mode[mi]);
  for (std::size_t mi = 0; mi < modes.size(); ++mi)
    summary.cells.push_back(make_cell(modes[mi], 0, 0, scored_by_mode[mi], heuristic_mean));
  return summary;
}

RunSummary run_experiment2(const ExperimentConfig& cfg) {
  cfg.validate();
  const TopologyMap map = resolve_map(cfg);

  std::vector<PlanMode> modes = cfg.modes;
  if (modes.empty()) modes = {PlanMode::heuristic, PlanMode::dynamic_kf};
  if (std::find(modes.begin(), modes.end(), PlanMode::heuristic) == modes.end() ||
      std::find(modes.begin(), modes.end(), PlanMode::dynamic_kf) == modes.end())
    throw ValidationError("experiment 2 compares heuristic and dynamic_kf modes");

  const std::uint32_t max_bundle =
      *std::max_element(cfg.bundle_sizes.begin(), cfg.bundle_sizes.end());
  const auto pairs = resolve_schedule(cfg, map, max_bundle);

  RunSummary summary;
  summary.experiment = "exp2";
  summary.map_name = cfg.map_name;

  for (std::uint32_t bundle : cfg.bundle_sizes) {
    // Heuristic leg, once per bundle; identical across regression sweeps.
    std::vector<double> h_scored;
    std::vector<PathResult> h_paths;
    {
      std::vector<ModeRunner> leg;
      leg.emplace_back(PlanMode::heuristic, map, cfg, nullptr, cfg.regression_nos.front(),
                       0);
      for (std::uint32_t i = 0; i < bundle; ++i) {
        apply_plan_epoch(cfg, i, leg);
        PathResult path = leg[0].run_plan(pairs[i].first, pairs[i].second);

        RunRecord rec;
        rec.id = plan_id(PlanMode::heuristic, bundle, 0, i);
        rec.mode = PlanMode::heuristic;
        rec.bundle = bundle;
        rec.plan_index = i;
        rec.source = pairs[i].first;
        rec.dest = pairs[i].second;
        rec.edges = path.edges;
        rec.planned_sec = path.planned_cost_sec;
        rec.executed_sec = path.executed_cost_sec;
        rec.scored_sec = path.executed_cost_sec;
        summary.runs.push_back(std::move(rec));
        h_scored.push_back(path.executed_cost_sec);
        h_paths.push_back(std::move(path));
      }
    }
    const double h_mean_executed = mean_of(h_scored);
    summary.cells.push_back(
        make_cell(PlanMode::heuristic, bundle, 0, h_scored, h_mean_executed));

    for (int reg : cfg.regression_nos) {
      std::vector<ModeRunner> leg;
      leg.emplace_back(PlanMode::dynamic_kf, map, cfg, nullptr, reg,
                       static_cast<std::uint64_t>(bundle) * 64 + static_cast<std::uint64_t>(reg));
      std::vector<double> d_scored;
      for (std::uint32_t i = 0; i < bundle; ++i) {
        apply_plan_epoch(cfg, i, leg);
        PathResult path = leg[0].run_plan(pairs[i].first, pairs[i].second);
        const double scored = cfg.score == ScoreMode::estimated
                                  ? path.planned_cost_sec
                                  : path.executed_cost_sec;

        RunRecord rec;
        rec.id = plan_id(PlanMode::dynamic_kf, bundle, reg, i);
        rec.mode = PlanMode::dynamic_kf;
        rec.bundle = bundle;
        rec.regression_no = reg;
        rec.plan_index = i;
        rec.source = pairs[i].first;
        rec.dest = pairs[i].second;
        rec.edges = path.edges;
        rec.planned_sec = path.planned_cost_sec;
        rec.executed_sec = path.executed_cost_sec;
        rec.scored_sec = scored;
        summary.runs.push_back(std::move(rec));
        d_scored.push_back(scored);
      }

      // Under estimated-cost accounting the baseline is the heuristic paths
      // revalued by this cell's final model.
      double h_mean = h_mean_executed;
      if (cfg.score == ScoreMode::estimated) {
        std::vector<double> re;
        re.reserve(h_paths.size());
        for (const PathResult& p : h_paths)
          re.push_back(rescore_path_dynamic(*leg[0].estimator, p.edges));
        h_mean = mean_of(re);
      }
      summary.cells.push_back(make_cell(PlanMode::dynamic_kf, bundle, reg, d_scored, h_mean));
    }
  }
  return summary;
}

namespace {

void write_runs_csv(const RunSummary& summary, std::ostream& out) {
  out << "run_id,mode,source,dest,edges,planned_cost,executed_cost\n";
  for (const RunRecord& r : summary.runs) {
    out << r.id << ',' << to_string(r.mode) << ',' << r.source << ',' << r.dest << ',';
    for (std::size_t i = 0; i < r.edges.size(); ++i) {
      if (i != 0) out << ';';
      out << r.edges[i];
    }
    out << ',' << format_double(r.planned_sec) << ',' << format_double(r.executed_sec)
        << '\n';
  }
}

void write_summary_csv(const RunSummary& summary, std::ostream& out) {
  out << "experiment,map,mode,bundle,regression_no,n_runs,mean_scored,std_scored,"
         "saving_vs_heuristic_pct\n";
  for (const SummaryCell& c : summary.cells) {
    out << summary.experiment << ',' << summary.map_name << ',' << to_string(c.mode) << ','
        << c.bundle << ',' << c.regression_no << ',' << c.n_runs << ','
        << format_double(c.mean_scored) << ',' << format_double(c.std_scored) << ','
        << format_double(c.saving_vs_heuristic_pct) << '\n';
  }
}

}  // namespace

ExperimentConfig load_config(std::istream& in, std::string_view origin) {
  const std::string where(origin);
  ExperimentConfig cfg;
  cfg.modes.clear();
  cfg.zone_overrides.clear();

  std::set<std::string> seen;
  std::string raw;
  std::size_t lineno = 0;

  auto once = [&](const std::string& key) {
    if (!seen.insert(key).second)
      throw ParseError(where, lineno, "duplicate key '" + key + "'");
  };
  auto need_double = [&](std::string_view v, const char* key) {
    const auto d = parse_double(v);
    if (!d) throw ParseError(where, lineno, std::string("bad number for ") + key);
    return *d;
  };
  auto need_uint = [&](std::string_view v, const char* key) {
    const auto u = parse_uint(v);
    if (!u) throw ParseError(where, lineno, std::string("bad integer for ") + key);
    return *u;
  };

  while (std::getline(in, raw)) {
    ++lineno;
    if (const auto pos = raw.find('#'); pos != std::string::npos) raw.erase(pos);
    std::istringstream ls(raw);
    std::string key;
    if (!(ls >> key)) continue;
    std::string value;
    std::getline(ls, value);
    const auto first = value.find_first_not_of(" \t\r");
    value = first == std::string::npos ? std::string() : value.substr(first);
    const auto last = value.find_last_not_of(" \t\r");
    if (last != std::string::npos) value = value.substr(0, last + 1);
    if (value.empty() && key != "pairs")
      throw ParseError(where, lineno, "key '" + key + "' without a value");

    if (key == "map") {
      once(key);
      cfg.map_name = value;
    } else if (key == "modes") {
      once(key);
      for (const auto part : split(value, ',')) {
        const auto m = plan_mode_from_string(part);
        if (!m) throw ParseError(where, lineno, "unknown mode '" + std::string(part) + "'");
        cfg.modes.push_back(*m);
      }
    } else if (key == "n_plans") {
      once(key);
      cfg.n_plans = static_cast<std::uint32_t>(need_uint(value, "n_plans"));
    } else if (key == "bundle_sizes") {
      once(key);
      cfg.bundle_sizes.clear();
      for (const auto part : split(value, ','))
        cfg.bundle_sizes.push_back(static_cast<std::uint32_t>(need_uint(part, "bundle_sizes")));
    } else if (key == "regression_nos") {
      once(key);
      cfg.regression_nos.clear();
      for (const auto part : split(value, ','))
        cfg.regression_nos.push_back(static_cast<int>(need_uint(part, "regression_nos")));
    } else if (key == "seed") {
      once(key);
      cfg.seed = need_uint(value, "seed");
    } else if (key == "pairs") {
      once(key);
      cfg.pairs.clear();
      if (!value.empty())
        for (const auto part : split(value, ';')) {
          const auto ends = split(part, '-');
          if (ends.size() != 2) throw ParseError(where, lineno, "pairs must be 'src-dst'");
          cfg.pairs.emplace_back(static_cast<NodeId>(need_uint(ends[0], "pairs")),
                                 static_cast<NodeId>(need_uint(ends[1], "pairs")));
        }
    } else if (key == "min_hops") {
      once(key);
      cfg.min_hops = static_cast<std::uint32_t>(need_uint(value, "min_hops"));
    } else if (key == "schedule_distinct") {
      once(key);
      cfg.schedule_distinct =
          static_cast<std::uint32_t>(need_uint(value, "schedule_distinct"));
    } else if (key == "initial_soc") {
      once(key);
      cfg.world.initial_soc = need_double(value, "initial_soc");
    } else if (key == "discharge_per_meter") {
      once(key);
      cfg.world.discharge_per_meter = need_double(value, "discharge_per_meter");
    } else if (key == "noise_std") {
      once(key);
      cfg.world.noise_std_sec = need_double(value, "noise_std");
    } else if (key == "process_noise_std") {
      once(key);
      cfg.world.process_noise_std_sec = need_double(value, "process_noise_std");
    } else if (key == "nominal_speed") {
      once(key);
      cfg.world.nominal_speed_mps = need_double(value, "nominal_speed");
    } else if (key == "battery_alpha") {
      once(key);
      cfg.world.battery.alpha = need_double(value, "battery_alpha");
    } else if (key == "battery_beta") {
      once(key);
      cfg.world.battery.beta = need_double(value, "battery_beta");
    } else if (key == "battery_knee") {
      once(key);
      cfg.world.battery.knee_soc = need_double(value, "battery_knee");
    } else if (key == "static_sigma2_omega") {
      once(key);
      cfg.static_sigma2_omega = need_double(value, "static_sigma2_omega");
    } else if (key == "static_sigma2_eta") {
      once(key);
      cfg.static_sigma2_eta = need_double(value, "static_sigma2_eta");
    } else if (key == "static_p0") {
      once(key);
      cfg.static_p0 = need_double(value, "static_p0");
    } else if (key == "table_max_k") {
      once(key);
      cfg.table_max_k = static_cast<std::uint32_t>(need_uint(value, "table_max_k"));
    } else if (key == "phi") {
      once(key);
      cfg.phi = need_double(value, "phi");
    } else if (key == "xi_mean") {
      once(key);
      cfg.xi_mean = need_double(value, "xi_mean");
    } else if (key == "xi_std") {
      once(key);
      cfg.xi_std = need_double(value, "xi_std");
    } else if (key == "xi_mode") {
      once(key);
      if (value == "deterministic") cfg.xi_mode = XiConfig::deterministic;
      else if (value == "stochastic") cfg.xi_mode = XiConfig::stochastic;
      else throw ParseError(where, lineno, "xi_mode must be deterministic|stochastic");
    } else if (key == "q_std") {
      once(key);
      cfg.q_std = need_double(value, "q_std");
    } else if (key == "r_std") {
      once(key);
      cfg.r_std = need_double(value, "r_std");
    } else if (key == "dyn_x_var0") {
      once(key);
      cfg.dyn_x_var0 = need_double(value, "dyn_x_var0");
    } else if (key == "dyn_b") {
      once(key);
      cfg.dyn_b.clear();
      for (const auto part : split(value, ',')) cfg.dyn_b.push_back(need_double(part, "dyn_b"));
    } else if (key == "dyn_c") {
      once(key);
      cfg.dyn_c.clear();
      for (const auto part : split(value, ',')) cfg.dyn_c.push_back(need_double(part, "dyn_c"));
    } else if (key == "recharge_every") {
      once(key);
      cfg.recharge_every = static_cast<std::uint32_t>(need_uint(value, "recharge_every"));
    } else if (key == "k_mode") {
      once(key);
      if (value == "per_edge") cfg.k_mode = KMode::per_edge;
      else if (value == "path_depth") cfg.k_mode = KMode::path_depth;
      else throw ParseError(where, lineno, "k_mode must be per_edge|path_depth");
    } else if (key == "score") {
      once(key);
      if (value == "executed") cfg.score = ScoreMode::executed;
      else if (value == "estimated") cfg.score = ScoreMode::estimated;
      else throw ParseError(where, lineno, "score must be executed|estimated");
    } else if (key == "zone_override") {
      const auto parts = split(value, ':');
      if (parts.size() != 3)
        throw ParseError(where, lineno, "zone_override must be 'plan:zone:factor'");
      ZoneOverride z;
      z.before_plan = static_cast<std::uint32_t>(need_uint(parts[0], "zone_override"));
      z.zone = std::string(parts[1]);
      z.factor = need_double(parts[2], "zone_override");
      cfg.zone_overrides.push_back(std::move(z));
    } else {
      throw ParseError(where, lineno, "unknown key '" + key + "'");
    }
  }

  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config file '" + path.string() + "'");
  return load_config(in, path.string());
}

void save_config(const ExperimentConfig& cfg, std::ostream& out) {
  out << "map " << cfg.map_name << '\n';
  if (!cfg.modes.empty()) {
    out << "modes ";
    for (std::size_t i = 0; i < cfg.modes.size(); ++i)
      out << (i ? "," : "") << to_string(cfg.modes[i]);
    out << '\n';
  }
  out << "n_plans " << cfg.n_plans << '\n';
  out << "bundle_sizes ";
  for (std::size_t i = 0; i < cfg.bundle_sizes.size(); ++i)
    out << (i ? "," : "") << cfg.bundle_sizes[i];
  out << '\n';
  out << "regression_nos ";
  for (std::size_t i = 0; i < cfg.regression_nos.size(); ++i)
    out << (i ? "," : "") << cfg.regression_nos[i];
  out << '\n';
  out << "seed " << cfg.seed << '\n';
  if (!cfg.pairs.empty()) {
    out << "pairs ";
    for (std::size_t i = 0; i < cfg.pairs.size(); ++i)
      out << (i ? ";" : "") << cfg.pairs[i].first << '-' << cfg.pairs[i].second;
    out << '\n';
  }
  out << "min_hops " << cfg.min_hops << '\n';
  out << "schedule_distinct " << cfg.schedule_distinct << '\n';
  out << "initial_soc " << format_double(cfg.world.initial_soc) << '\n';
  out << "discharge_per_meter " << format_double(cfg.world.discharge_per_meter) << '\n';
  out << "noise_std " << format_double(cfg.world.noise_std_sec) << '\n';
  out << "process_noise_std " << format_double(cfg.world.process_noise_std_sec) << '\n';
  out << "nominal_speed " << format_double(cfg.world.nominal_speed_mps) << '\n';
  out << "battery_alpha " << format_double(cfg.world.battery.alpha) << '\n';
  out << "battery_beta " << format_double(cfg.world.battery.beta) << '\n';
  out << "battery_knee " << format_double(cfg.world.battery.knee_soc) << '\n';
  out << "static_sigma2_omega " << format_double(cfg.static_sigma2_omega) << '\n';
  out << "static_sigma2_eta " << format_double(cfg.static_sigma2_eta) << '\n';
  out << "static_p0 " << format_double(cfg.static_p0) << '\n';
  out << "table_max_k " << cfg.table_max_k << '\n';
  out << "phi " << format_double(cfg.phi) << '\n';
  out << "xi_mean " << format_double(cfg.xi_mean) << '\n';
  out << "xi_std " << format_double(cfg.xi_std) << '\n';
  out << "xi_mode "
      << (cfg.xi_mode == XiConfig::stochastic ? "stochastic" : "deterministic") << '\n';
  out << "q_std " << format_double(cfg.q_std) << '\n';
  out << "r_std " << format_double(cfg.r_std) << '\n';
  out << "dyn_x_var0 " << format_double(cfg.dyn_x_var0) << '\n';
  if (!cfg.dyn_b.empty()) {
    out << "dyn_b ";
    for (std::size_t i = 0; i < cfg.dyn_b.size(); ++i)
      out << (i ? "," : "") << format_double(cfg.dyn_b[i]);
    out << '\n';
  }
  if (!cfg.dyn_c.empty()) {
    out << "dyn_c ";
    for (std::size_t i = 0; i < cfg.dyn_c.size(); ++i)
      out << (i ? "," : "") << format_double(cfg.dyn_c[i]);
    out << '\n';
  }
  out << "recharge_every " << cfg.recharge_every << '\n';
  out << "k_mode " << (cfg.k_mode == KMode::path_depth ? "path_depth" : "per_edge") << '\n';
  out << "score " << (cfg.score == ScoreMode::estimated ? "estimated" : "executed") << '\n';
  for (const ZoneOverride& z : cfg.zone_overrides)
    out << "zone_override " << z.before_plan << ':' << z.zone << ':'
        << format_double(z.factor) << '\n';
}

void emit_csv(const RunSummary& summary, const ExperimentConfig& cfg,
              const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw Error("cannot create output directory '" + out_dir.string() + "'");

  const auto open = [&](const char* name) {
    std::ofstream out(out_dir / name);
    if (!out) throw Error("cannot write '" + (out_dir / name).string() + "'");
    return out;
  };

  {
    auto out = open("runs.csv");
    write_runs_csv(summary, out);
    if (!out) throw Error("write failed for runs.csv");
  }
  {
    auto out = open("summary.csv");
    write_summary_csv(summary, out);
    if (!out) throw Error("write failed for summary.csv");
  }
  {
    auto out = open("config.echo");
    save_config(cfg, out);

    // Audit trail: the values the run actually resolved from the seed.
    // Comment lines; the loader ignores them.
    try {
      const TopologyMap map = resolve_map(cfg);
      const std::uint32_t count =
          summary.experiment == "exp2"
              ? *std::max_element(cfg.bundle_sizes.begin(), cfg.bundle_sizes.end())
              : cfg.n_plans;
      const auto pairs = resolve_schedule(cfg, map, count);
      out << "# resolved_pairs ";
      for (std::size_t i = 0; i < pairs.size(); ++i)
        out << (i ? ";" : "") << pairs[i].first << '-' << pairs[i].second;
      out << '\n';
      if (summary.experiment == "exp2") {
        const DynParamBase base = resolve_dyn_base(cfg);
        out << "# resolved_dyn_b ";
        for (std::size_t i = 0; i < base.b.size(); ++i)
          out << (i ? "," : "") << format_double(base.b[i]);
        out << '\n';
        out << "# resolved_dyn_c ";
        for (std::size_t i = 0; i < base.c_flat.size(); ++i)
          out << (i ? "," : "") << format_double(base.c_flat[i]);
        out << '\n';
      }
    } catch (const Error&) {
      // The echo itself must still be written even if resolution re-fails.
    }
    if (!out) throw Error("write failed for config.echo");
  }
}

}  // namespace routecast
