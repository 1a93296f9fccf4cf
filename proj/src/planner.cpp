#include "routecast/planner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <stdexcept>
#include <string>
#include <utility>

#include "routecast/errors.hpp"

namespace routecast {

HeuristicCostProvider::HeuristicCostProvider(const TopologyMap& map,
                                             double nominal_speed_mps)
    : map_(&map), speed_(nominal_speed_mps) {
  if (!(nominal_speed_mps > 0.0))
    throw std::invalid_argument("nominal speed must be positive");
}

double HeuristicCostProvider::cost(const CostQuery& query) {
  return euclidean_cost(*map_, query.edge, speed_);
}

StaticKfCostProvider::StaticKfCostProvider(const ObservationTable& table,
                                           ScalarFilterBank& bank, KMode k_mode)
    : table_(&table), bank_(&bank), k_mode_(k_mode) {}

double StaticKfCostProvider::cost(const CostQuery& query) {
  ScalarFilter& f = bank_->filter(query.edge);
  const std::uint32_t k =
      k_mode_ == KMode::path_depth ? query.step : f.count() + 1;
  const ObservationTable::Lookup looked = table_->find_clamped(query.edge, k);
  if (looked.clamped) ++clamp_events_;
  f.update(looked.value);
  return f.estimate();
}

DynamicKfCostProvider::DynamicKfCostProvider(DynamicEstimator& estimator)
    : estimator_(&estimator) {}

double DynamicKfCostProvider::cost(const CostQuery& query) {
  return estimator_->query_cost(query.edge, query.chain_costs);
}

PathResult shortest_path(const TopologyMap& map, NodeId source, NodeId dest,
                         CostProvider& provider) {
  const std::size_t n = map.node_count();
  if (source >= n || dest >= n)
    throw std::invalid_argument("shortest_path: node id out of range");
  if (source == dest)
    throw std::invalid_argument("shortest_path: source equals destination");

  constexpr double kInf = std::numeric_limits<double>::infinity();
  constexpr auto kNone = static_cast<std::size_t>(-1);

  std::vector<double> dist(n, kInf);
  std::vector<NodeId> pred_node(n, 0);
  std::vector<std::size_t> pred_edge(n, kNone);
  std::vector<char> settled(n, 0);
  std::vector<double> edge_cost(map.edge_count(), -1.0);

  using Entry = std::pair<double, NodeId>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> queue;
  dist[source] = 0.0;
  queue.push({0.0, source});

  std::vector<double> chain;
  while (!queue.empty()) {
    const auto [du, u] = queue.top();
    queue.pop();
    if (settled[u] || du > dist[u]) continue;
    settled[u] = 1;

    chain.clear();
    for (NodeId w = u; pred_edge[w] != kNone; w = pred_node[w])
      chain.push_back(edge_cost[pred_edge[w]]);
    std::reverse(chain.begin(), chain.end());
    const auto step = static_cast<std::uint32_t>(chain.size()) + 1;
    const double prev_cost = chain.empty() ? 0.0 : chain.back();

    for (const TopologyMap::OutEdge& out : map.out_edges(u)) {
      double w = edge_cost[out.edge];
      if (w < 0.0) {
        w = provider.cost({out.edge, u, out.to, step, prev_cost, chain});
        if (!std::isfinite(w) || !(w > 0.0))
          throw Error("cost provider '" + std::string(provider.name()) +
                      "' returned a non-positive cost for edge " +
                      std::to_string(out.edge));
        edge_cost[out.edge] = w;
      }
      if (!settled[out.to] && dist[u] + w < dist[out.to]) {
        dist[out.to] = dist[u] + w;
        pred_node[out.to] = u;
        pred_edge[out.to] = out.edge;
        queue.push({dist[out.to], out.to});
      }
    }
  }

  if (!std::isfinite(dist[dest]))
    throw NoPathError("no path from " + std::to_string(source) + " to " +
                      std::to_string(dest));

  PathResult result;
  result.source = source;
  result.dest = dest;
  for (NodeId w = dest; pred_edge[w] != kNone; w = pred_node[w])
    result.edges.push_back(pred_edge[w]);
  std::reverse(result.edges.begin(), result.edges.end());

  result.per_edge.reserve(result.edges.size());
  double total = 0.0;
  for (std::size_t e : result.edges) {
    total += edge_cost[e];
    result.per_edge.push_back({e, edge_cost[e], 0.0});
  }
  result.planned_cost_sec = total;
  return result;
}

PathResult execute_path(SimWorld& world, const PathResult& planned) {
  PathResult out = planned;
  if (out.per_edge.size() != out.edges.size()) {
    out.per_edge.clear();
    out.per_edge.reserve(out.edges.size());
    for (std::size_t e : out.edges) out.per_edge.push_back({e, 0.0, 0.0});
  }

  for (std::size_t i = out.executed_edges; i < out.edges.size(); ++i) {
    try {
      const ObservationRecord rec = world.traverse(out.edges[i]);
      out.per_edge[i].executed_sec = rec.true_time_sec;
      out.executed_cost_sec += rec.true_time_sec;
      out.executed_edges = i + 1;
    } catch (const BatteryExhaustedError&) {
      out.battery_exhausted = true;
      return out;
    }
  }
  out.battery_exhausted = false;
  return out;
}

}  // namespace routecast
