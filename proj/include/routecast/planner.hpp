#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "routecast/dynamic_estimator.hpp"
#include "routecast/scalar_kf.hpp"
#include "routecast/sim_world.hpp"
#include "routecast/topo_map.hpp"

namespace routecast {

// Everything a cost model may want to know about the edge being weighed
// during a search.
struct CostQuery {
  std::size_t edge = 0;
  NodeId from = 0;
  NodeId to = 0;
  std::uint32_t step = 1;          // predecessors of `from` on the tentative path, plus 1
  double predecessor_cost = 0.0;   // weight of the edge that reached `from`; 0 at source
  std::span<const double> chain_costs;  // tentative path costs so far, oldest first
};

class CostProvider {
 public:
  virtual ~CostProvider() = default;
  virtual double cost(const CostQuery& query) = 0;
  virtual std::string_view name() const = 0;
};

// Straight-line distance over nominal speed. Admissible lower bound; knows
// nothing about roughness, battery, or history.
class HeuristicCostProvider final : public CostProvider {
 public:
  explicit HeuristicCostProvider(const TopologyMap& map,
                                 double nominal_speed_mps = kDefaultNominalSpeedMps);
  double cost(const CostQuery& query) override;
  std::string_view name() const override { return "heuristic"; }

 private:
  const TopologyMap* map_;
  double speed_;
};

// How the scalar-filter provider indexes the calibration table.
//   per_edge:   each edge advances its own observation counter, one step per
//               search in which it is queried (default).
//   path_depth: the observation index is the edge's depth on the tentative
//               path, taken straight from the query.
enum class KMode { per_edge, path_depth };

// Replays the offline calibration table through a per-edge scalar filter.
// The filter bank persists across searches; within one search each edge is
// estimated once and the value reused.
class StaticKfCostProvider final : public CostProvider {
 public:
  StaticKfCostProvider(const ObservationTable& table, ScalarFilterBank& bank,
                       KMode k_mode = KMode::per_edge);
  double cost(const CostQuery& query) override;
  std::string_view name() const override { return "static_kf"; }

  // Times the requested k ran past the table and the last row was used.
  std::uint64_t table_clamp_events() const { return clamp_events_; }

 private:
  const ObservationTable* table_;
  ScalarFilterBank* bank_;
  KMode k_mode_;
  std::uint64_t clamp_events_ = 0;
};

// Bilinear-model estimates fed by the live execution log.
class DynamicKfCostProvider final : public CostProvider {
 public:
  explicit DynamicKfCostProvider(DynamicEstimator& estimator);
  double cost(const CostQuery& query) override;
  std::string_view name() const override { return "dynamic_kf"; }

 private:
  DynamicEstimator* estimator_;
};

struct PathEdge {
  std::size_t edge = 0;
  double planned_sec = 0.0;
  double executed_sec = 0.0;
};

struct PathResult {
  NodeId source = 0;
  NodeId dest = 0;
  std::vector<std::size_t> edges;
  std::vector<PathEdge> per_edge;
  double planned_cost_sec = 0.0;
  double executed_cost_sec = 0.0;
  std::size_t executed_edges = 0;       // prefix of `edges` actually traversed
  bool battery_exhausted = false;
};

// Dijkstra over provider-supplied weights. Weights are pulled lazily as
// nodes settle, once per edge per call (the first computed value is cached
// for the rest of the call). Equal tentative distances settle the lower node
// id first, which makes the returned path deterministic. Throws NoPathError
// when dest is unreachable over directed edges, and refuses non-finite or
// non-positive provider costs.
PathResult shortest_path(const TopologyMap& map, NodeId source, NodeId dest,
                         CostProvider& provider);

// Drives the world over the planned edges, filling in executed costs from
// the simulator's true times. Execution resumes at planned.executed_edges,
// so a result interrupted by battery exhaustion can be continued after a
// recharge by passing it back in. An empty path executes to cost 0.
PathResult execute_path(SimWorld& world, const PathResult& planned);

}  // namespace routecast
