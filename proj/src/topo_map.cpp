#include "routecast/topo_map.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "routecast/errors.hpp"
#include "routecast/text_io.hpp"

namespace routecast {

TopologyMap TopologyMap::from_parts(std::vector<Point> nodes, std::vector<Edge> edges,
                                    std::vector<RoughnessZone> zones) {
  if (nodes.empty()) throw ValidationError("map has no nodes");

  const std::size_t n = nodes.size();
  std::set<std::pair<NodeId, NodeId>> seen;
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const Edge& e = edges[i];
    if (e.from >= n || e.to >= n)
      throw ValidationError("edge " + std::to_string(i) + " references unknown node");
    if (e.from == e.to)
      throw ValidationError("edge " + std::to_string(i) + " is a self-loop");
    if (!seen.emplace(e.from, e.to).second)
      throw ValidationError("duplicate edge " + std::to_string(e.from) + " -> " +
                            std::to_string(e.to));
  }

  TopologyMap m;
  m.nodes_ = std::move(nodes);
  m.edges_ = std::move(edges);

  m.lengths_.reserve(m.edges_.size());
  for (std::size_t i = 0; i < m.edges_.size(); ++i) {
    const Point& a = m.nodes_[m.edges_[i].from];
    const Point& b = m.nodes_[m.edges_[i].to];
    const double len = std::hypot(b.x - a.x, b.y - a.y);
    if (len <= 0.0)
      throw ValidationError("edge " + std::to_string(i) + " has zero length");
    m.lengths_.push_back(len);
  }

  // Connectivity over the undirected skeleton.
  if (n > 1) {
    std::vector<char> reached(n, 0);
    std::deque<NodeId> frontier{0};
    reached[0] = 1;
    std::vector<std::vector<NodeId>> undirected(n);
    for (const Edge& e : m.edges_) {
      undirected[e.from].push_back(e.to);
      undirected[e.to].push_back(e.from);
    }
    while (!frontier.empty()) {
      const NodeId u = frontier.front();
      frontier.pop_front();
      for (NodeId v : undirected[u]) {
        if (!reached[v]) {
          reached[v] = 1;
          frontier.push_back(v);
        }
      }
    }
    if (std::count(reached.begin(), reached.end(), 1) != static_cast<long>(n))
      throw ValidationError("map graph is not connected");
  }

  std::set<std::string, std::less<>> zone_names;
  for (RoughnessZone& z : zones) {
    if (z.name.empty()) throw ValidationError("zone with empty name");
    if (!zone_names.insert(z.name).second)
      throw ValidationError("duplicate zone name '" + z.name + "'");
    if (!(z.factor >= 1.0))
      throw ValidationError("zone '" + z.name + "' factor must be >= 1.0");
    std::sort(z.edges.begin(), z.edges.end());
    z.edges.erase(std::unique(z.edges.begin(), z.edges.end()), z.edges.end());
    for (std::size_t idx : z.edges)
      if (idx >= m.edges_.size())
        throw ValidationError("zone '" + z.name + "' references unknown edge " +
                              std::to_string(idx));
  }
  m.zones_ = std::move(zones);

  m.adjacency_.assign(n, {});
  for (std::size_t i = 0; i < m.edges_.size(); ++i)
    m.adjacency_[m.edges_[i].from].push_back({m.edges_[i].to, i});
  for (auto& out : m.adjacency_)
    std::sort(out.begin(), out.end(),
              [](const OutEdge& a, const OutEdge& b) { return a.to < b.to; });

  m.edge_zones_.assign(m.edges_.size(), {});
  for (std::size_t zi = 0; zi < m.zones_.size(); ++zi)
    for (std::size_t e : m.zones_[zi].edges) m.edge_zones_[e].push_back(zi);

  return m;
}

const Point& TopologyMap::node(NodeId id) const {
  if (id >= nodes_.size()) throw std::out_of_range("node id out of range");
  return nodes_[id];
}

const Edge& TopologyMap::edge(std::size_t index) const {
  if (index >= edges_.size()) throw std::out_of_range("edge index out of range");
  return edges_[index];
}

double TopologyMap::edge_length(std::size_t index) const {
  if (index >= edges_.size()) throw std::out_of_range("edge index out of range");
  return lengths_[index];
}

std::span<const TopologyMap::OutEdge> TopologyMap::out_edges(NodeId id) const {
  if (id >= nodes_.size()) throw std::out_of_range("node id out of range");
  return adjacency_[id];
}

std::optional<std::size_t> TopologyMap::find_edge(NodeId from, NodeId to) const {
  if (from >= nodes_.size()) return std::nullopt;
  for (const OutEdge& oe : adjacency_[from])
    if (oe.to == to) return oe.edge;
  return std::nullopt;
}

std::optional<std::size_t> TopologyMap::reverse_edge(std::size_t index) const {
  const Edge& e = edge(index);
  return find_edge(e.to, e.from);
}

std::optional<std::size_t> TopologyMap::find_zone(std::string_view name) const {
  for (std::size_t i = 0; i < zones_.size(); ++i)
    if (zones_[i].name == name) return i;
  return std::nullopt;
}

std::span<const std::size_t> TopologyMap::zones_of_edge(std::size_t index) const {
  if (index >= edges_.size()) throw std::out_of_range("edge index out of range");
  return edge_zones_[index];
}

bool TopologyMap::operator==(const TopologyMap& other) const {
  return nodes_ == other.nodes_ && edges_ == other.edges_ && zones_ == other.zones_;
}

namespace {

// Strips comments/whitespace; returns empty for blank lines.
std::string clean_line(std::string raw) {
  if (const auto pos = raw.find('#'); pos != std::string::npos) raw.erase(pos);
  const auto first = raw.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = raw.find_last_not_of(" \t\r");
  return raw.substr(first, last - first + 1);
}

std::vector<std::string> tokenize(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream in(line);
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

}  // namespace

TopologyMap load_map(std::istream& in, std::string_view origin) {
  const std::string where(origin);
  enum class Section { none, nodes, edges, zones };
  Section section = Section::none;
  bool saw_nodes = false, saw_edges = false, saw_zones = false;

  std::vector<Point> nodes;
  std::vector<Edge> edges;
  std::vector<RoughnessZone> zones;

  std::string raw;
  std::size_t lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    const std::string line = clean_line(raw);
    if (line.empty()) continue;

    if (line == "nodes" || line == "edges" || line == "zones") {
      if (line == "nodes") {
        if (saw_nodes) throw ParseError(where, lineno, "duplicate 'nodes' section");
        saw_nodes = true;
        section = Section::nodes;
      } else if (line == "edges") {
        if (!saw_nodes) throw ParseError(where, lineno, "'edges' section before 'nodes'");
        if (saw_edges) throw ParseError(where, lineno, "duplicate 'edges' section");
        saw_edges = true;
        section = Section::edges;
      } else {
        if (!saw_edges) throw ParseError(where, lineno, "'zones' section before 'edges'");
        if (saw_zones) throw ParseError(where, lineno, "duplicate 'zones' section");
        saw_zones = true;
        section = Section::zones;
      }
      continue;
    }

    const std::vector<std::string> tok = tokenize(line);
    switch (section) {
      case Section::none:
        throw ParseError(where, lineno, "unknown section '" + tok[0] + "'");
      case Section::nodes: {
        if (tok.size() != 3)
          throw ParseError(where, lineno, "node line must be 'id x y'");
        const auto id = parse_uint(tok[0]);
        if (!id || *id != nodes.size())
          throw ParseError(where, lineno, "node ids must be dense and ascending from 0");
        const auto x = parse_double(tok[1]);
        const auto y = parse_double(tok[2]);
        if (!x || !y) throw ParseError(where, lineno, "bad node coordinate");
        nodes.push_back({*x, *y});
        break;
      }
      case Section::edges: {
        if (tok.size() != 2)
          throw ParseError(where, lineno, "edge line must be 'from to'");
        const auto from = parse_uint(tok[0]);
        const auto to = parse_uint(tok[1]);
        if (!from || !to) throw ParseError(where, lineno, "bad edge endpoint");
        edges.push_back({static_cast<NodeId>(*from), static_cast<NodeId>(*to)});
        break;
      }
      case Section::zones: {
        if (tok.size() < 2)
          throw ParseError(where, lineno, "zone line must be 'name factor edge...'");
        RoughnessZone z;
        z.name = tok[0];
        const auto f = parse_double(tok[1]);
        if (!f) throw ParseError(where, lineno, "bad zone factor");
        z.factor = *f;
        for (std::size_t i = 2; i < tok.size(); ++i) {
          const auto idx = parse_uint(tok[i]);
          if (!idx) throw ParseError(where, lineno, "bad zone edge index");
          z.edges.push_back(*idx);
        }
        zones.push_back(std::move(z));
        break;
      }
    }
  }

  if (!saw_nodes) throw ParseError(where, lineno, "missing 'nodes' section");
  if (!saw_edges) throw ParseError(where, lineno, "missing 'edges' section");

  try {
    return TopologyMap::from_parts(std::move(nodes), std::move(edges), std::move(zones));
  } catch (const ValidationError& err) {
    throw ValidationError(std::string(origin) + ": " + err.what());
  }
}

TopologyMap load_map(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open map file '" + path.string() + "'");
  return load_map(in, path.string());
}

void save_map(const TopologyMap& map, std::ostream& out) {
  out << "nodes\n";
  for (std::size_t i = 0; i < map.node_count(); ++i) {
    const Point& p = map.nodes()[i];
    out << i << ' ' << format_double(p.x) << ' ' << format_double(p.y) << '\n';
  }
  out << "edges\n";
  for (const Edge& e : map.edges()) out << e.from << ' ' << e.to << '\n';
  out << "zones\n";
  for (const RoughnessZone& z : map.zones()) {
    out << z.name << ' ' << format_double(z.factor);
    for (std::size_t idx : z.edges) out << ' ' << idx;
    out << '\n';
  }
}

void save_map(const TopologyMap& map, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write map file '" + path.string() + "'");
  save_map(map, out);
  if (!out) throw Error("write failed for map file '" + path.string() + "'");
}

double euclidean_cost(const TopologyMap& map, std::size_t edge_index,
                      double nominal_speed_mps) {
  if (!(nominal_speed_mps > 0.0))
    throw std::invalid_argument("nominal speed must be positive");
  return map.edge_length(edge_index) / nominal_speed_mps;
}

}  // namespace routecast
