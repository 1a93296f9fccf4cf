#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "doctest.h"
#include "helpers.hpp"
#include "routecast/errors.hpp"
#include "routecast/planner.hpp"
#include "routecast/rng.hpp"
#include "routecast/sim_world.hpp"
#include "routecast/topo_map.hpp"

using namespace routecast;

namespace {

// 0 --2m-- 1 --3m-- 2 --4m-- 3, both directions; forward edges 0, 2, 4.
TopologyMap line_map() {
  std::vector<Point> nodes = {{0, 0}, {2, 0}, {5, 0}, {9, 0}};
  std::vector<Edge> edges = {{0, 1}, {1, 0}, {1, 2}, {2, 1}, {2, 3}, {3, 2}};
  return TopologyMap::from_parts(std::move(nodes), std::move(edges), {});
}

struct RecordedQuery {
  std::size_t edge;
  NodeId from;
  NodeId to;
  std::uint32_t step;
  double predecessor_cost;
  std::vector<double> chain;
};

class RecordingProvider final : public CostProvider {
 public:
  explicit RecordingProvider(std::vector<double> weights)
      : weights_(std::move(weights)) {}
  double cost(const CostQuery& q) override {
    log_.push_back({q.edge, q.from, q.to, q.step, q.predecessor_cost,
                    {q.chain_costs.begin(), q.chain_costs.end()}});
    return weights_[q.edge];
  }
  std::string_view name() const override { return "recording"; }
  const std::vector<RecordedQuery>& log() const { return log_; }

 private:
  std::vector<double> weights_;
  std::vector<RecordedQuery> log_;
};

class ConstantProvider final : public CostProvider {
 public:
  explicit ConstantProvider(double v) : v_(v) {}
  double cost(const CostQuery&) override { return v_; }
  std::string_view name() const override { return "constant"; }

 private:
  double v_;
};

void check_path_shape(const TopologyMap& map, const PathResult& r) {
  REQUIRE(!r.edges.empty());
  CHECK(map.edge(r.edges.front()).from == r.source);
  CHECK(map.edge(r.edges.back()).to == r.dest);
  for (std::size_t i = 1; i < r.edges.size(); ++i)
    CHECK(map.edge(r.edges[i - 1]).to == map.edge(r.edges[i]).from);
  REQUIRE(r.per_edge.size() == r.edges.size());
  double sum = 0.0;
  for (const PathEdge& pe : r.per_edge) sum += pe.planned_sec;
  CHECK(r.planned_cost_sec == doctest::Approx(sum).epsilon(1e-12));
}

}  // namespace

TEST_CASE("matches an independent Dijkstra on random maps") {
  Rng rng(4242);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = 8 + rng.uniform_below(43);  // up to 50 nodes
    const TopologyMap map = testutil::random_connected_map(rng, n, n / 2);
    const auto weights = testutil::random_weights(rng, map.edge_count());
    testutil::FrozenCostProvider provider(weights);

    const auto source = static_cast<NodeId>(rng.uniform_below(static_cast<std::uint32_t>(n)));
    auto dest = static_cast<NodeId>(rng.uniform_below(static_cast<std::uint32_t>(n)));
    if (dest == source) dest = (dest + 1) % static_cast<NodeId>(n);

    const PathResult got = shortest_path(map, source, dest, provider);
    const auto want = testutil::reference_dijkstra(map, source, dest, weights);
    REQUIRE(want.has_value());
    CHECK(got.planned_cost_sec == doctest::Approx(*want).epsilon(1e-12));
    check_path_shape(map, got);
  }
}

TEST_CASE("matches exhaustive search on tiny maps") {
  Rng rng(77);
  for (int trial = 0; trial < 8; ++trial) {
    const std::size_t n = 5 + rng.uniform_below(8);  // up to 12 nodes
    const TopologyMap map = testutil::random_connected_map(rng, n, 3);
    const auto weights = testutil::random_weights(rng, map.edge_count());
    testutil::FrozenCostProvider provider(weights);

    const NodeId source = 0;
    const auto dest = static_cast<NodeId>(n - 1);
    const PathResult got = shortest_path(map, source, dest, provider);
    const auto want = testutil::best_simple_path(map, source, dest, weights);
    REQUIRE(want.has_value());
    CHECK(got.planned_cost_sec == doctest::Approx(*want).epsilon(1e-12));
  }
}

TEST_CASE("equal-cost alternatives settle toward the lower node id") {
  // Diamond: 0 -> {1, 2} -> 3, every edge weight 1. Both routes cost 2; the
  // route through node 1 must win deterministically.
  std::vector<Point> nodes = {{0, 0}, {1, 1}, {1, -1}, {2, 0}};
  std::vector<Edge> edges = {{0, 1}, {0, 2}, {1, 3}, {2, 3}};
  const TopologyMap map =
      TopologyMap::from_parts(std::move(nodes), std::move(edges), {});
  testutil::FrozenCostProvider provider({1.0, 1.0, 1.0, 1.0});

  const PathResult r = shortest_path(map, 0, 3, provider);
  CHECK(r.edges == std::vector<std::size_t>{0, 2});
  CHECK(r.planned_cost_sec == 2.0);
}

TEST_CASE("unreachable destination raises NoPathError") {
  std::vector<Point> nodes = {{0, 0}, {1, 0}};
  std::vector<Edge> edges = {{0, 1}};  // one-way
  const TopologyMap map =
      TopologyMap::from_parts(std::move(nodes), std::move(edges), {});
  testutil::FrozenCostProvider provider({1.0});
  CHECK_THROWS_AS(shortest_path(map, 1, 0, provider), NoPathError);
}

TEST_CASE("argument validation") {
  const TopologyMap map = line_map();
  Rng rng(1);
  testutil::FrozenCostProvider provider(testutil::random_weights(rng, 6));
  CHECK_THROWS_AS(shortest_path(map, 2, 2, provider), std::invalid_argument);
  CHECK_THROWS_AS(shortest_path(map, 9, 0, provider), std::invalid_argument);
  CHECK_THROWS_AS(shortest_path(map, 0, 9, provider), std::invalid_argument);
}

TEST_CASE("provider costs must be finite and positive") {
  const TopologyMap map = line_map();
  ConstantProvider zero(0.0);
  ConstantProvider negative(-1.0);
  ConstantProvider nan(std::nan(""));
  ConstantProvider inf(std::numeric_limits<double>::infinity());
  CHECK_THROWS_AS(shortest_path(map, 0, 3, zero), Error);
  CHECK_THROWS_AS(shortest_path(map, 0, 3, negative), Error);
  CHECK_THROWS_AS(shortest_path(map, 0, 3, nan), Error);
  CHECK_THROWS_AS(shortest_path(map, 0, 3, inf), Error);
}

TEST_CASE("each edge is priced at most once per search") {
  Rng rng(12);
  const TopologyMap map = testutil::random_connected_map(rng, 24, 12);
  RecordingProvider provider(testutil::random_weights(rng, map.edge_count()));
  shortest_path(map, 0, 23, provider);

  std::vector<int> hits(map.edge_count(), 0);
  for (const RecordedQuery& q : provider.log()) ++hits[q.edge];
  for (int h : hits) CHECK(h <= 1);
}

TEST_CASE("query context mirrors the settled path") {
  const TopologyMap map = line_map();
  // Forward edges cheap, back edges dear, so settle order walks the line.
  RecordingProvider provider({1.5, 10.0, 2.5, 10.0, 3.5, 10.0});
  const PathResult r = shortest_path(map, 0, 3, provider);

  CHECK(r.edges == std::vector<std::size_t>{0, 2, 4});
  CHECK(r.planned_cost_sec == doctest::Approx(7.5).epsilon(1e-12));

  const auto& log = provider.log();
  REQUIRE(log.size() == 6);  // back edges are priced too

  CHECK(log[0].edge == 0);
  CHECK(log[0].from == 0);
  CHECK(log[0].to == 1);
  CHECK(log[0].step == 1);
  CHECK(log[0].predecessor_cost == 0.0);
  CHECK(log[0].chain.empty());

  // Settling node 1: its out-edges are priced with the chain {1.5}.
  CHECK(log[1].edge == 1);
  CHECK(log[1].step == 2);
  CHECK(log[1].predecessor_cost == 1.5);
  CHECK(log[1].chain == std::vector<double>{1.5});
  CHECK(log[2].edge == 2);
  CHECK(log[2].chain == std::vector<double>{1.5});

  // Settling node 2: chain {1.5, 2.5}.
  CHECK(log[3].edge == 3);
  CHECK(log[4].edge == 4);
  CHECK(log[4].step == 3);
  CHECK(log[4].predecessor_cost == 2.5);
  CHECK(log[4].chain == std::vector<double>{1.5, 2.5});

  // Settling the destination still prices its out-edges.
  CHECK(log[5].edge == 5);
  CHECK(log[5].step == 4);
  CHECK(log[5].chain == std::vector<double>{1.5, 2.5, 3.5});
}

TEST_CASE("execution fills in ground-truth times exactly in a quiet world") {
  const TopologyMap map = line_map();
  SimWorldConfig cfg;
  cfg.noise_std_sec = 0.0;
  cfg.process_noise_std_sec = 0.0;
  cfg.discharge_per_meter = 0.0;
  cfg.nominal_speed_mps = 1.0;
  cfg.seed = 5;
  SimWorld world(map, cfg);

  HeuristicCostProvider provider(map, 1.0);
  const PathResult planned = shortest_path(map, 0, 3, provider);
  const PathResult done = execute_path(world, planned);

  CHECK_FALSE(done.battery_exhausted);
  CHECK(done.executed_edges == 3);
  CHECK(done.executed_cost_sec == 9.0);
  for (const PathEdge& pe : done.per_edge) CHECK(pe.executed_sec == pe.planned_sec);
  CHECK(world.log().size() == 3);
}

TEST_CASE("exhaustion interrupts execution and a recharge resumes it") {
  const TopologyMap map = line_map();
  SimWorldConfig cfg;
  cfg.noise_std_sec = 0.0;
  cfg.process_noise_std_sec = 0.0;
  cfg.discharge_per_meter = 0.22;
  cfg.nominal_speed_mps = 1.0;
  cfg.seed = 5;
  SimWorld world(map, cfg);

  HeuristicCostProvider provider(map, 1.0);
  PathResult r = shortest_path(map, 0, 3, provider);

  r = execute_path(world, r);  // 2 m ok, 3 m would overdraw
  CHECK(r.battery_exhausted);
  CHECK(r.executed_edges == 1);
  CHECK(r.executed_cost_sec == 2.0);

  world.recharge();
  r = execute_path(world, r);  // 3 m ok, 4 m would overdraw
  CHECK(r.battery_exhausted);
  CHECK(r.executed_edges == 2);
  CHECK(r.executed_cost_sec == 5.0);

  world.recharge();
  r = execute_path(world, r);
  CHECK_FALSE(r.battery_exhausted);
  CHECK(r.executed_edges == 3);
  CHECK(r.executed_cost_sec == 9.0);
  CHECK(world.episode() == 3);
}

TEST_CASE("an empty plan executes to zero") {
  const TopologyMap map = line_map();
  SimWorldConfig cfg;
  cfg.seed = 3;
  SimWorld world(map, cfg);
  PathResult empty;
  const PathResult done = execute_path(world, empty);
  CHECK(done.executed_cost_sec == 0.0);
  CHECK(done.executed_edges == 0);
  CHECK_FALSE(done.battery_exhausted);
  CHECK(world.log().empty());
}
