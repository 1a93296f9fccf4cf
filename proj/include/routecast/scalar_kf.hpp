#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include "routecast/common.hpp"
#include "routecast/topo_map.hpp"

namespace routecast {

// Scalar Kalman filter for one edge's travel time under a random-walk model:
// the time drifts with variance process_var per step and is observed with
// variance observation_var.
class ScalarFilter {
 public:
  ScalarFilter(double x0_mean_sec, double p0, double process_var, double observation_var);

  struct Prior {
    double x;
    double p;
  };

  // Time update only. Pure: the filter itself is unchanged.
  Prior predict() const;

  // One predict + correct cycle with observation y. When both variances are
  // zero the correction is undefined; the state is left at the prior and the
  // degenerate flag is raised.
  void update(double y_sec);

  double estimate() const { return x_; }
  double variance() const { return p_; }
  std::uint32_t count() const { return k_; }
  double process_var() const { return q_; }
  double observation_var() const { return r_; }
  bool last_update_degenerate() const { return degenerate_; }

 private:
  double x_;
  double p_;
  double q_;
  double r_;
  std::uint32_t k_ = 0;
  bool degenerate_ = false;
};

inline constexpr double kDefaultScalarProcessVar = 0.04;
inline constexpr double kDefaultScalarObservationVar = 0.04;

// One ScalarFilter per edge, initialized at the edge's Euclidean heuristic
// cost (the only information available before any observation).
class ScalarFilterBank {
 public:
  ScalarFilterBank(const TopologyMap& map, double p0, double process_var,
                   double observation_var,
                   double nominal_speed_mps = kDefaultNominalSpeedMps);

  std::size_t size() const { return filters_.size(); }
  ScalarFilter& filter(std::size_t edge);
  const ScalarFilter& filter(std::size_t edge) const;

  // Debug checkpoint, one row per edge: edge,k,x_hat,p
  void save_snapshot(std::ostream& out) const;
  void save_snapshot(const std::filesystem::path& path) const;

 private:
  std::vector<ScalarFilter> filters_;
};

}  // namespace routecast
