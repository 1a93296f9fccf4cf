#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string_view>
#include <vector>

#include "routecast/rng.hpp"
#include "routecast/topo_map.hpp"

namespace routecast {

// Travel-time multiplier as a function of battery state of charge. Flat near
// full charge, a gentle linear rise while discharging, and a sharp knee once
// soc drops below knee_soc (motor torque collapses, the platform crawls).
struct BatteryModel {
  double alpha = 0.1;
  double beta = 40.0;
  double knee_soc = 0.15;

  double factor(double soc) const;
};

struct SimWorldConfig {
  double initial_soc = 1.0;            // [0, 1]
  double discharge_per_meter = 0.01;   // soc drained per meter, scaled by roughness
  double noise_std_sec = 0.05;         // measurement noise on reported times
  // Wear growth per traversal (std of a non-negative increment). Worn edges
  // recover while rested; see SimWorld::traverse.
  double process_noise_std_sec = 0.18;
  double nominal_speed_mps = kDefaultNominalSpeedMps;
  BatteryModel battery;
  std::uint64_t seed = 1;

  void validate() const;
};

struct ObservationRecord {
  std::size_t edge = 0;
  std::uint32_t traversal_count = 0;  // k, per-edge, 1-based
  std::uint64_t sequence_pos = 0;     // position in the world-wide traversal sequence
  std::uint32_t episode = 0;          // recharge cycle, 1-based
  double true_time_sec = 0.0;
  double observed_time_sec = 0.0;
  double soc_at_traversal = 0.0;      // soc when the traversal started
};

// Synthetic ground truth for a map. The true time of a traversal is
//
//   base_time(edge) * roughness(edge) * battery(soc) + wear(edge)
//
// where wear is a non-negative random walk stepped once per traversal of the
// edge (floors degrade with use; the offline calibration table cannot know
// the wear the live floor will accumulate). Reported observations add
// Gaussian measurement noise on top. All randomness derives from the
// config seed: the same seed and the same traversal sequence reproduce the
// log bit for bit.
class SimWorld {
 public:
  SimWorld(TopologyMap map, SimWorldConfig config);

  const TopologyMap& map() const { return map_; }
  const SimWorldConfig& config() const { return cfg_; }

  double soc() const { return soc_; }
  std::uint32_t episode() const { return episode_; }

  double base_time(std::size_t edge) const;
  double roughness_factor(std::size_t edge) const;
  double wear_sec(std::size_t edge) const;

  // True travel time if the edge were traversed right now.
  double ground_truth_time(std::size_t edge) const;

  // Performs one traversal: drains the battery, steps the edge's wear, logs
  // and returns the record. Throws BatteryExhaustedError (without traversing
  // or consuming randomness) if the move would drain soc to zero or below.
  ObservationRecord traverse(std::size_t edge);

  // Battery swap: soc back to initial_soc, next episode. Wear, traversal
  // counters and the log are untouched.
  void recharge();

  // Live zone override (spill cleaned up, new pallets dragged through...).
  // Unknown zone names and factors < 1 are rejected.
  void set_zone_factor(std::string_view zone_name, double factor);
  double zone_factor(std::string_view zone_name) const;

  const std::vector<ObservationRecord>& log() const { return log_; }
  std::uint32_t edge_traversals(std::size_t edge) const;

 private:
  TopologyMap map_;
  SimWorldConfig cfg_;
  double soc_;
  std::uint32_t episode_ = 1;
  Rng rng_;
  std::vector<double> zone_factor_;
  std::vector<double> edge_rough_;
  std::vector<double> wear_sec_;
  std::vector<std::uint64_t> last_wear_tick_;
  std::uint64_t tick_ = 0;
  std::vector<std::uint32_t> edge_count_;
  std::vector<ObservationRecord> log_;

  void rebuild_roughness();
};

// Calibration data: one observed time per (edge, traversal index k).
class ObservationTable {
 public:
  void insert(std::size_t edge, std::uint32_t k, double observed_sec);

  std::optional<double> find(std::size_t edge, std::uint32_t k) const;

  struct Lookup {
    double value;
    bool clamped;  // true when k exceeded the table and the last row was used
  };
  // Falls back to the edge's last available k when asked beyond the table.
  // Throws if the edge has no rows at all.
  Lookup find_clamped(std::size_t edge, std::uint32_t k) const;

  std::uint32_t max_k(std::size_t edge) const;
  std::size_t row_count() const;

  // Delimited text, one row per (edge, k): edge_from,edge_to,k,observed_time
  void save(std::ostream& out, const TopologyMap& map) const;
  void save(const std::filesystem::path& path, const TopologyMap& map) const;
  static ObservationTable load(std::istream& in, const TopologyMap& map,
                               std::string_view origin = "<stream>");
  static ObservationTable load(const std::filesystem::path& path, const TopologyMap& map);

 private:
  std::vector<std::vector<double>> by_edge_;  // [edge][k-1]
};

// Offline calibration pass: for every edge, a fresh identically-configured
// world (independent wear and noise realization, per-edge derived seed) is
// driven over the edge max_k times, recharging whenever the battery runs
// out, and the observed times are tabulated. This mirrors calibrating each
// segment in isolation before deployment.
ObservationTable build_offline_table(const SimWorld& world, std::uint32_t max_k);

}  // namespace routecast
