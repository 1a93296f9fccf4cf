#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "routecast/common.hpp"

namespace routecast {

using NodeId = std::uint32_t;

struct Point {
  double x = 0.0;
  double y = 0.0;
  bool operator==(const Point&) const = default;
};

// Directed corridor segment between two nodes. Bidirectional corridors are
// represented as two mirrored edges.
struct Edge {
  NodeId from = 0;
  NodeId to = 0;
  bool operator==(const Edge&) const = default;
};

// Named set of edges sharing a floor-surface quality. factor multiplies the
// nominal travel time; 1.0 is smooth, larger is rougher.
struct RoughnessZone {
  std::string name;
  double factor = 1.0;
  std::vector<std::size_t> edges;  // indices into TopologyMap edges, sorted
  bool operator==(const RoughnessZone&) const = default;
};

// Immutable topological floor map: 2D nodes, directed edges, roughness zones.
// Construction validates every structural invariant; instances are safe to
// copy and share.
class TopologyMap {
 public:
  struct OutEdge {
    NodeId to;
    std::size_t edge;
  };

  // Validates and indexes the parts. Throws ValidationError on: dangling edge
  // endpoints, self-loops, duplicate directed edges, zero-length edges,
  // a disconnected graph (edges taken as undirected), zone factors < 1,
  // duplicate zone names, or zone edge indices out of range.
  static TopologyMap from_parts(std::vector<Point> nodes, std::vector<Edge> edges,
                                std::vector<RoughnessZone> zones);

  std::size_t node_count() const { return nodes_.size(); }
  std::size_t edge_count() const { return edges_.size(); }

  const Point& node(NodeId id) const;
  const Edge& edge(std::size_t index) const;
  double edge_length(std::size_t index) const;

  // Out-edges of a node, sorted by target id.
  std::span<const OutEdge> out_edges(NodeId id) const;

  std::optional<std::size_t> find_edge(NodeId from, NodeId to) const;
  std::optional<std::size_t> reverse_edge(std::size_t index) const;

  const std::vector<Point>& nodes() const { return nodes_; }
  const std::vector<Edge>& edges() const { return edges_; }
  const std::vector<RoughnessZone>& zones() const { return zones_; }
  std::optional<std::size_t> find_zone(std::string_view name) const;

  // Indices of the zones containing an edge (possibly several).
  std::span<const std::size_t> zones_of_edge(std::size_t index) const;

  bool operator==(const TopologyMap& other) const;

 private:
  TopologyMap() = default;

  std::vector<Point> nodes_;
  std::vector<Edge> edges_;
  std::vector<RoughnessZone> zones_;
  std::vector<double> lengths_;
  std::vector<std::vector<OutEdge>> adjacency_;
  std::vector<std::vector<std::size_t>> edge_zones_;
};

enum class BuiltinMap { map1, map2, map3 };

// Desk-scale demo floors. map1: three parallel aisles with a rough southern
// rack row. map2: jittered grid with a central spill. map3: hub-and-ring
// with rough western spokes.
const TopologyMap& builtin_map(BuiltinMap which);
std::optional<BuiltinMap> builtin_map_by_name(std::string_view name);

// Text format, three ordered sections. '#' starts a comment.
//   nodes            id x y          (ids dense, ascending from 0)
//   edges            from to
//   zones            name factor edge_index...
TopologyMap load_map(std::istream& in, std::string_view origin = "<stream>");
TopologyMap load_map(const std::filesystem::path& path);
void save_map(const TopologyMap& map, std::ostream& out);
void save_map(const TopologyMap& map, const std::filesystem::path& path);

// Distance-over-speed lower bound used as the uninformed planning cost.
double euclidean_cost(const TopologyMap& map, std::size_t edge_index,
                      double nominal_speed_mps = kDefaultNominalSpeedMps);

}  // namespace routecast
