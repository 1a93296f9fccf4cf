#include "routecast/sim_world.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "routecast/errors.hpp"
#include "routecast/text_io.hpp"

namespace routecast {

double BatteryModel::factor(double soc) const {
  const double depth = 1.0 - soc;
  const double under_knee = std::max(0.0, knee_soc - soc);
  return 1.0 + alpha * depth + beta * under_knee * under_knee;
}

void SimWorldConfig::validate() const {
  if (!(initial_soc >= 0.0 && initial_soc <= 1.0))
    throw ValidationError("initial_soc must be in [0, 1]");
  if (!(discharge_per_meter >= 0.0))
    throw ValidationError("discharge_per_meter must be >= 0");
  if (!(noise_std_sec >= 0.0)) throw ValidationError("noise_std must be >= 0");
  if (!(process_noise_std_sec >= 0.0))
    throw ValidationError("process_noise_std must be >= 0");
  if (!(nominal_speed_mps > 0.0)) throw ValidationError("nominal_speed must be > 0");
  if (!(battery.alpha >= 0.0) || !(battery.beta >= 0.0))
    throw ValidationError("battery coefficients must be >= 0");
  if (!(battery.knee_soc >= 0.0 && battery.knee_soc <= 1.0))
    throw ValidationError("battery knee_soc must be in [0, 1]");
}

// Wear never exceeds this fraction of an edge's base time; the floor gets
// bad, not impassable. Wear accumulates with use and recovers while an edge
// rests: each traversal of the world ages every other edge by one tick, and
// a resting edge's wear decays by kWearRestDecay per tick. Heavily ground
// corridors therefore sit near the cap while rotated-over ones settle at a
// lower equilibrium.
namespace {
constexpr double kMaxWearFraction = 0.8;
constexpr double kWearRestDecay = 0.98;
}

SimWorld::SimWorld(TopologyMap map, SimWorldConfig config)
    : map_(std::move(map)), cfg_(config), soc_(config.initial_soc), rng_(config.seed) {
  cfg_.validate();
  zone_factor_.reserve(map_.zones().size());
  for (const RoughnessZone& z : map_.zones()) zone_factor_.push_back(z.factor);
  wear_sec_.assign(map_.edge_count(), 0.0);
  last_wear_tick_.assign(map_.edge_count(), 0);
  edge_count_.assign(map_.edge_count(), 0);
  rebuild_roughness();
}

void SimWorld::rebuild_roughness() {
  edge_rough_.assign(map_.edge_count(), 1.0);
  for (std::size_t e = 0; e < map_.edge_count(); ++e)
    for (std::size_t zi : map_.zones_of_edge(e)) edge_rough_[e] *= zone_factor_[zi];
}

double SimWorld::base_time(std::size_t edge) const {
  return map_.edge_length(edge) / cfg_.nominal_speed_mps;
}

double SimWorld::roughness_factor(std::size_t edge) const {
  if (edge >= map_.edge_count()) throw std::out_of_range("edge index out of range");
  return edge_rough_[edge];
}

double SimWorld::wear_sec(std::size_t edge) const {
  if (edge >= map_.edge_count()) throw std::out_of_range("edge index out of range");
  return wear_sec_[edge];
}

double SimWorld::ground_truth_time(std::size_t edge) const {
  if (edge >= map_.edge_count()) throw std::out_of_range("edge index out of range");
  return base_time(edge) * edge_rough_[edge] * cfg_.battery.factor(soc_) + wear_sec_[edge];
}

ObservationRecord SimWorld::traverse(std::size_t edge) {
  if (edge >= map_.edge_count()) throw std::out_of_range("edge index out of range");

  const double drain =
      cfg_.discharge_per_meter * map_.edge_length(edge) * edge_rough_[edge];
  if (soc_ <= 0.0 || soc_ - drain <= 0.0) throw BatteryExhaustedError(soc_);

  // Rest recovery first, so the traversal sees the healed floor.
  wear_sec_[edge] *=
      std::pow(kWearRestDecay, static_cast<double>(tick_ - last_wear_tick_[edge]));

  ObservationRecord rec;
  rec.edge = edge;
  rec.soc_at_traversal = soc_;
  rec.episode = episode_;
  rec.true_time_sec = ground_truth_time(edge);
  rec.observed_time_sec = rec.true_time_sec + rng_.normal(0.0, cfg_.noise_std_sec);

  // Grind the edge for future traversals. The draw happens even when the
  // step std is zero so the stream layout stays fixed.
  const double step = std::abs(rng_.normal(0.0, cfg_.process_noise_std_sec));
  wear_sec_[edge] =
      std::min(wear_sec_[edge] + step, kMaxWearFraction * base_time(edge));
  last_wear_tick_[edge] = ++tick_;

  soc_ -= drain;
  rec.traversal_count = ++edge_count_[edge];
  rec.sequence_pos = log_.size() + 1;
  log_.push_back(rec);
  return rec;
}

void SimWorld::recharge() {
  soc_ = cfg_.initial_soc;
  ++episode_;
}

void SimWorld::set_zone_factor(std::string_view zone_name, double factor) {
  const auto zi = map_.find_zone(zone_name);
  if (!zi) throw ValidationError("unknown zone '" + std::string(zone_name) + "'");
  if (!(factor >= 1.0)) throw ValidationError("zone factor must be >= 1.0");
  zone_factor_[*zi] = factor;
  rebuild_roughness();
}

double SimWorld::zone_factor(std::string_view zone_name) const {
  const auto zi = map_.find_zone(zone_name);
  if (!zi) throw ValidationError("unknown zone '" + std::string(zone_name) + "'");
  return zone_factor_[*zi];
}

std::uint32_t SimWorld::edge_traversals(std::size_t edge) const {
  if (edge >= map_.edge_count()) throw std::out_of_range("edge index out of range");
  return edge_count_[edge];
}

void ObservationTable::insert(std::size_t edge, std::uint32_t k, double observed_sec) {
  if (k == 0) throw std::invalid_argument("table k is 1-based");
  if (by_edge_.size() <= edge) by_edge_.resize(edge + 1);
  auto& rows = by_edge_[edge];
  if (k != rows.size() + 1)
    throw std::invalid_argument("table rows must be inserted with consecutive k");
  rows.push_back(observed_sec);
}

std::optional<double> ObservationTable::find(std::size_t edge, std::uint32_t k) const {
  if (edge >= by_edge_.size() || k == 0 || k > by_edge_[edge].size()) return std::nullopt;
  return by_edge_[edge][k - 1];
}

ObservationTable::Lookup ObservationTable::find_clamped(std::size_t edge,
                                                        std::uint32_t k) const {
  if (edge >= by_edge_.size() || by_edge_[edge].empty())
    throw Error("observation table has no rows for edge " + std::to_string(edge));
  const auto& rows = by_edge_[edge];
  if (k == 0) throw std::invalid_argument("table k is 1-based");
  if (k <= rows.size()) return {rows[k - 1], false};
  return {rows.back(), true};
}

std::uint32_t ObservationTable::max_k(std::size_t edge) const {
  if (edge >= by_edge_.size()) return 0;
  return static_cast<std::uint32_t>(by_edge_[edge].size());
}

std::size_t ObservationTable::row_count() const {
  std::size_t total = 0;
  for (const auto& rows : by_edge_) total += rows.size();
  return total;
}

void ObservationTable::save(std::ostream& out, const TopologyMap& map) const {
  out << "edge_from,edge_to,k,observed_time\n";
  for (std::size_t e = 0; e < by_edge_.size(); ++e) {
    const Edge& edge = map.edge(e);
    for (std::size_t i = 0; i < by_edge_[e].size(); ++i)
      out << edge.from << ',' << edge.to << ',' << i + 1 << ','
          << format_double(by_edge_[e][i]) << '\n';
  }
}

void ObservationTable::save(const std::filesystem::path& path,
                            const TopologyMap& map) const {
  std::ofstream out(path);
  if (!out) throw Error("cannot write table file '" + path.string() + "'");
  save(out, map);
  if (!out) throw Error("write failed for table file '" + path.string() + "'");
}

ObservationTable ObservationTable::load(std::istream& in, const TopologyMap& map,
                                        std::string_view origin) {
  const std::string where(origin);
  ObservationTable table;
  std::string line;
  std::size_t lineno = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (!header_seen) {
      if (line != "edge_from,edge_to,k,observed_time")
        throw ParseError(where, lineno, "bad table header");
      header_seen = true;
      continue;
    }
    const auto fields = split(line, ',');
    if (fields.size() != 4) throw ParseError(where, lineno, "expected 4 fields");
    const auto from = parse_uint(fields[0]);
    const auto to = parse_uint(fields[1]);
    const auto k = parse_uint(fields[2]);
    const auto value = parse_double(fields[3]);
    if (!from || !to || !k || !value)
      throw ParseError(where, lineno, "bad table field");
    const auto edge = map.find_edge(static_cast<NodeId>(*from), static_cast<NodeId>(*to));
    if (!edge)
      throw ParseError(where, lineno,
                       "table row references edge absent from the map");
    try {
      table.insert(*edge, static_cast<std::uint32_t>(*k), *value);
    } catch (const std::invalid_argument& err) {
      throw ParseError(where, lineno, err.what());
    }
  }
  if (!header_seen) throw ParseError(where, lineno, "empty table file");
  return table;
}

ObservationTable ObservationTable::load(const std::filesystem::path& path,
                                        const TopologyMap& map) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open table file '" + path.string() + "'");
  return load(in, map, path.string());
}

ObservationTable build_offline_table(const SimWorld& world, std::uint32_t max_k) {
  if (max_k == 0) throw std::invalid_argument("max_k must be >= 1");

  ObservationTable table;
  for (std::size_t e = 0; e < world.map().edge_count(); ++e) {
    SimWorldConfig cfg = world.config();
    cfg.seed = mix_seed(world.config().seed, 0x7AB1E000ull + e);
    SimWorld probe(world.map(), cfg);
    for (std::uint32_t k = 1; k <= max_k; ++k) {
      bool recharged = false;
      for (;;) {
        try {
          table.insert(e, k, probe.traverse(e).observed_time_sec);
          break;
        } catch (const BatteryExhaustedError&) {
          if (recharged)
            throw Error("edge " + std::to_string(e) +
                        " cannot be traversed on a full charge");
          probe.recharge();
          recharged = true;
        }
      }
    }
  }
  return table;
}

}  // namespace routecast
