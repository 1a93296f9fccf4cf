#pragma once

namespace routecast {

// Default cruise speed of the scaled platform, used for heuristic costs and
// for the simulator's base travel times.
inline constexpr double kDefaultNominalSpeedMps = 1.0;

// Lower clamp applied to every travel-time estimate. Dijkstra needs strictly
// positive weights; badly conditioned filter parameters can otherwise drive
// estimates negative.
inline constexpr double kMinTravelTimeSec = 1e-3;

}  // namespace routecast
