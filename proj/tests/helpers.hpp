#pragma once

// Shared test scaffolding. The graph references are kept deliberately
// independent of the library planner: a plain binary-heap Dijkstra and an
// exhaustive simple-path search, both over frozen per-edge weights.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <queue>
#include <string_view>
#include <utility>
#include <vector>

#include "routecast/planner.hpp"
#include "routecast/rng.hpp"
#include "routecast/topo_map.hpp"

namespace testutil {

using routecast::NodeId;
using routecast::TopologyMap;

inline std::optional<double> reference_dijkstra(const TopologyMap& map, NodeId source,
                                                NodeId dest,
                                                const std::vector<double>& weight) {
  std::vector<double> dist(map.node_count(), std::numeric_limits<double>::infinity());
  using Entry = std::pair<double, NodeId>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> pq;
  dist[source] = 0.0;
  pq.push({0.0, source});
  while (!pq.empty()) {
    const auto [d, u] = pq.top();
    pq.pop();
    if (d > dist[u]) continue;
    for (const auto& out : map.out_edges(u)) {
      const double nd = d + weight[out.edge];
      if (nd < dist[out.to]) {
        dist[out.to] = nd;
        pq.push({nd, out.to});
      }
    }
  }
  if (!std::isfinite(dist[dest])) return std::nullopt;
  return dist[dest];
}

// Exhaustive minimum over simple paths. Exponential; tiny graphs only.
inline std::optional<double> best_simple_path(const TopologyMap& map, NodeId source,
                                              NodeId dest,
                                              const std::vector<double>& weight) {
  std::vector<char> used(map.node_count(), 0);
  double best = std::numeric_limits<double>::infinity();
  auto dfs = [&](auto&& self, NodeId u, double acc) -> void {
    if (u == dest) {
      best = std::min(best, acc);
      return;
    }
    used[u] = 1;
    for (const auto& out : map.out_edges(u))
      if (!used[out.to]) self(self, out.to, acc + weight[out.edge]);
    used[u] = 0;
  };
  dfs(dfs, source, 0.0);
  if (!std::isfinite(best)) return std::nullopt;
  return best;
}

// Random spanning tree plus chords, every corridor mirrored, so the result
// is strongly connected. Nodes sit on a jittered grid; cells are 3 apart and
// jitter stays below 1, which rules out zero-length edges.
inline TopologyMap random_connected_map(routecast::Rng& rng, std::size_t n_nodes,
                                        std::size_t extra_corridors) {
  std::vector<routecast::Point> nodes;
  nodes.reserve(n_nodes);
  const std::size_t width = std::max<std::size_t>(2, n_nodes / 5);
  for (std::size_t i = 0; i < n_nodes; ++i)
    nodes.push_back({static_cast<double>(i % width) * 3.0 + rng.uniform01(),
                     static_cast<double>(i / width) * 3.0 + rng.uniform01()});

  std::vector<routecast::Edge> edges;
  auto has = [&](NodeId a, NodeId b) {
    return std::any_of(edges.begin(), edges.end(), [&](const routecast::Edge& e) {
      return e.from == a && e.to == b;
    });
  };
  auto add_corridor = [&](NodeId a, NodeId b) {
    if (a == b || has(a, b)) return;
    edges.push_back({a, b});
    edges.push_back({b, a});
  };
  for (std::size_t i = 1; i < n_nodes; ++i)
    add_corridor(static_cast<NodeId>(i),
                 static_cast<NodeId>(rng.uniform_below(static_cast<std::uint32_t>(i))));
  for (std::size_t i = 0; i < extra_corridors; ++i)
    add_corridor(static_cast<NodeId>(rng.uniform_below(static_cast<std::uint32_t>(n_nodes))),
                 static_cast<NodeId>(rng.uniform_below(static_cast<std::uint32_t>(n_nodes))));
  return TopologyMap::from_parts(std::move(nodes), std::move(edges), {});
}

class FrozenCostProvider final : public routecast::CostProvider {
 public:
  explicit FrozenCostProvider(std::vector<double> weights)
      : weights_(std::move(weights)) {}
  double cost(const routecast::CostQuery& q) override { return weights_[q.edge]; }
  std::string_view name() const override { return "frozen"; }

 private:
  std::vector<double> weights_;
};

inline std::vector<double> random_weights(routecast::Rng& rng, std::size_t count,
                                          double lo = 0.5, double hi = 5.0) {
  std::vector<double> w(count);
  for (double& v : w) v = lo + (hi - lo) * rng.uniform01();
  return w;
}

}  // namespace testutil
