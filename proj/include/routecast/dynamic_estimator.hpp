#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "routecast/bilinear_kf.hpp"
#include "routecast/rng.hpp"
#include "routecast/topo_map.hpp"

namespace routecast {

// Online travel-cost estimation over a whole map: one BilinearFilter per
// edge, one shared log of executed traversal costs, the latest observation
// per edge.
//
// The model's X window is a sliding window over costs the platform incurs in
// sequence. At query time the window for a tentative edge is the cost chain
// of the tentative path so far, padded backwards with the tail of the
// executed log when the chain alone is shorter than regression_no; a window
// that still cannot be filled drops the query to the per-edge running mean,
// or to the edge's Euclidean cost when the edge was never observed. Queries
// run against a copy of the edge's filter, so planning never perturbs the
// persistent state; record_traversal is the only mutation path.
//
// Every estimate is floored at the edge's Euclidean cost, the physical lower
// bound on its travel time.
class DynamicEstimator {
 public:
  enum class XiMode { deterministic, stochastic };

  DynamicEstimator(const TopologyMap& map, BilinearParams params,
                   double nominal_speed_mps = kDefaultNominalSpeedMps,
                   XiMode xi_mode = XiMode::deterministic, std::uint64_t seed = 0);

  int regression_no() const { return params_.regression_no; }
  const BilinearParams& params() const { return params_; }

  // Cost of an edge given the tentative chain of path costs leading to it
  // (oldest first). Non-mutating with respect to the persistent filters.
  double query_cost(std::size_t edge, std::span<const double> tentative_chain);

  // Estimate with no tentative context, as used when scoring a finished
  // path: the window is the executed log tail alone.
  double current_estimate(std::size_t edge);

  // Feeds one executed traversal: steps the edge's filter against the
  // observation (or only the running mean while history is too short) and
  // appends to the shared log.
  void record_traversal(std::size_t edge, double observed_sec);

  const BilinearFilter& filter(std::size_t edge) const;
  std::optional<double> latest_observation(std::size_t edge) const;
  std::size_t recorded_count() const { return history_.size(); }

 private:
  const TopologyMap* map_;
  BilinearParams params_;
  double nominal_speed_;
  XiMode xi_mode_;
  Rng xi_rng_;
  std::vector<BilinearFilter> bank_;
  std::vector<std::optional<double>> latest_;
  std::vector<double> history_;

  std::vector<double> make_window(std::span<const double> tentative_chain) const;
  std::optional<double> next_xi();
};

}  // namespace routecast
