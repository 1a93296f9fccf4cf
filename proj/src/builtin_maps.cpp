// Hand-authored demo floors at desk scale (meters). Corridors are listed as
// undirected pairs and expanded to mirrored directed edges; zone membership
// always covers both directions of a corridor.

#include <stdexcept>
#include <tuple>
#include <utility>
#include <vector>

#include "routecast/errors.hpp"
#include "routecast/topo_map.hpp"

namespace routecast {
namespace {

using Corridor = std::pair<NodeId, NodeId>;
using ZoneSpec = std::tuple<std::string, double, std::vector<Corridor>>;

TopologyMap assemble(std::vector<Point> nodes, const std::vector<Corridor>& corridors,
                     const std::vector<ZoneSpec>& zone_specs) {
  std::vector<Edge> edges;
  edges.reserve(corridors.size() * 2);
  for (const auto& [a, b] : corridors) {
    edges.push_back({a, b});
    edges.push_back({b, a});
  }

  auto edge_index = [&edges](NodeId from, NodeId to) -> std::size_t {
    for (std::size_t i = 0; i < edges.size(); ++i)
      if (edges[i].from == from && edges[i].to == to) return i;
    throw Error("builtin map zone references missing corridor");
  };

  std::vector<RoughnessZone> zones;
  for (const auto& [name, factor, pairs] : zone_specs) {
    RoughnessZone z;
    z.name = name;
    z.factor = factor;
    for (const auto& [a, b] : pairs) {
      z.edges.push_back(edge_index(a, b));
      z.edges.push_back(edge_index(b, a));
    }
    zones.push_back(std::move(z));
  }

  return TopologyMap::from_parts(std::move(nodes), std::move(edges), std::move(zones));
}

// Three parallel east-west aisles (south y=0, middle y=0.7, north y=1.35)
// joined by cross corridors at x = 0, 3, 6. The whole southern aisle runs
// through a rack row with worn flooring; a lighter worn patch sits in the
// middle aisle.
TopologyMap make_map1() {
  std::vector<Point> nodes;
  for (int i = 0; i <= 6; ++i) nodes.push_back({double(i), 0.0});
  for (int i = 0; i <= 6; ++i) nodes.push_back({double(i), 0.7});
  for (int i = 0; i <= 6; ++i) nodes.push_back({double(i), 1.35});

  std::vector<Corridor> corridors;
  for (NodeId i = 0; i < 6; ++i) corridors.push_back({i, i + 1});
  for (NodeId i = 7; i < 13; ++i) corridors.push_back({i, i + 1});
  for (NodeId i = 14; i < 20; ++i) corridors.push_back({i, i + 1});
  corridors.insert(corridors.end(), {{0, 7}, {1, 8}, {3, 10}, {5, 12}, {6, 13}});
  corridors.insert(corridors.end(), {{7, 14}, {8, 15}, {10, 17}, {12, 19}, {13, 20}});

  std::vector<ZoneSpec> zones = {
      {"south_racks", 2.4, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 5}, {5, 6}}},
      {"mid_aisle", 1.2, {{9, 10}, {10, 11}, {11, 12}}},
  };
  return assemble(std::move(nodes), corridors, zones);
}

// Jittered 5x5 grid (ids row-major), two corridors blocked by racks, a few
// diagonal shortcuts, and a liquid spill around the center.
TopologyMap make_map2() {
  std::vector<Point> nodes = {
      {0.0, 0.1}, {1.4, 0.0}, {2.5, 0.3}, {3.9, 0.1}, {5.1, 0.2},
      {0.2, 1.2}, {1.2, 1.4}, {2.7, 1.3}, {3.8, 1.5}, {5.0, 1.3},
      {0.1, 2.6}, {1.5, 2.4}, {2.6, 2.7}, {3.7, 2.5}, {5.2, 2.6},
      {0.3, 3.8}, {1.3, 3.7}, {2.4, 3.9}, {4.0, 3.6}, {5.1, 3.8},
      {0.0, 5.0}, {1.4, 5.1}, {2.6, 4.9}, {3.9, 5.0}, {5.0, 5.1},
  };

  std::vector<Corridor> corridors;
  for (NodeId r = 0; r < 5; ++r)
    for (NodeId c = 0; c < 4; ++c) {
      const NodeId a = r * 5 + c;
      if (a == 17) continue;  // blocked rack row between 17 and 18
      corridors.push_back({a, a + 1});
    }
  for (NodeId r = 0; r < 4; ++r)
    for (NodeId c = 0; c < 5; ++c) {
      const NodeId a = r * 5 + c;
      if (a == 9) continue;  // blocked between 9 and 14
      corridors.push_back({a, a + 5});
    }
  corridors.insert(corridors.end(), {{0, 6}, {8, 14}, {10, 16}, {18, 24}});

  std::vector<ZoneSpec> zones = {
      {"central_spill",
       1.7,
       {{6, 7}, {7, 8}, {11, 12}, {12, 13}, {7, 12}, {12, 17}, {11, 16}, {16, 17}}},
  };
  return assemble(std::move(nodes), corridors, zones);
}

// Hub-and-ring floor: high-degree charging hub in the center, an inner ring
// of pick stations, an outer ring of docks. The western spokes cross an old,
// heavily worn concrete patch.
TopologyMap make_map3() {
  std::vector<Point> nodes = {
      {3.0, 3.0},                                                          // 0 hub
      {4.2, 3.0},  {3.85, 3.85}, {3.0, 4.2},  {2.15, 3.85},                // 1..4
      {1.8, 3.0},  {2.15, 2.15}, {3.0, 1.8},  {3.85, 2.15},                // 5..8
      {5.6, 3.0},  {5.25, 4.3},  {4.3, 5.25}, {3.0, 5.6},  {1.7, 5.25},    // 9..13
      {0.75, 4.3}, {0.4, 3.0},   {0.75, 1.7}, {1.7, 0.75}, {3.0, 0.4},     // 14..18
      {4.3, 0.75}, {5.25, 1.7},                                            // 19..20
  };

  std::vector<Corridor> corridors;
  for (NodeId i = 1; i <= 8; ++i) corridors.push_back({0, i});
  for (NodeId i = 1; i < 8; ++i) corridors.push_back({i, i + 1});
  corridors.push_back({1, 8});
  corridors.insert(corridors.end(), {{1, 9},
                                     {1, 10},
                                     {2, 11},
                                     {3, 12},
                                     {3, 13},
                                     {4, 14},
                                     {5, 15},
                                     {5, 16},
                                     {6, 17},
                                     {7, 18},
                                     {7, 19},
                                     {8, 20}});
  for (NodeId i = 9; i < 20; ++i) corridors.push_back({i, i + 1});
  corridors.push_back({9, 20});

  std::vector<ZoneSpec> zones = {
      {"west_spokes", 2.2, {{0, 4}, {0, 5}, {0, 6}, {4, 5}, {5, 6}}},
      {"hub_apron", 1.25, {{0, 1}, {0, 2}, {0, 3}, {0, 7}, {0, 8}}},
  };
  return assemble(std::move(nodes), corridors, zones);
}

}  // namespace

const TopologyMap& builtin_map(BuiltinMap which) {
  static const TopologyMap map1 = make_map1();
  static const TopologyMap map2 = make_map2();
  static const TopologyMap map3 = make_map3();
  switch (which) {
    case BuiltinMap::map1: return map1;
    case BuiltinMap::map2: return map2;
    case BuiltinMap::map3: return map3;
  }
  throw std::invalid_argument("unknown builtin map");
}

std::optional<BuiltinMap> builtin_map_by_name(std::string_view name) {
  if (name == "map1") return BuiltinMap::map1;
  if (name == "map2") return BuiltinMap::map2;
  if (name == "map3") return BuiltinMap::map3;
  return std::nullopt;
}

}  // namespace routecast
