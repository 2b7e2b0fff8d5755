#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "shapeline/network.hpp"
#include "shapeline/routes.hpp"

using namespace shapeline;

namespace {

// Abstract graph: points only provide positions for the network container.
SpatialNetwork abstract_graph(std::size_t n, std::vector<NetEdge> edges) {
  std::vector<Point> pts;
  for (std::size_t i = 0; i < n; ++i) pts.push_back({static_cast<double>(i), 0.0});
  auto ps = std::make_shared<const PointSet>(Window(double(n) + 1, 1, Topology::plane), pts, std::vector<std::size_t>{}, 0);
  return SpatialNetwork(ps, {}, std::move(edges), "test");
}

SpatialNetwork random_connected_graph(std::size_t n, std::uint64_t seed) {
  Engine eng(seed);
  std::vector<NetEdge> edges;
  for (std::size_t v = 1; v < n; ++v) edges.push_back({uniform_index(eng, v), v, uniform(eng, 0.1, 5.0)});
  for (int extra = 0; extra < 40; ++extra) {
    std::size_t a = uniform_index(eng, n), b = uniform_index(eng, n);
    if (a == b) continue;
    bool dup = false;
    for (const auto& e : edges) dup |= (std::min(a, b) == std::min(e.u, e.v) && std::max(a, b) == std::max(e.u, e.v));
    if (!dup) edges.push_back({a, b, uniform(eng, 0.1, 5.0)});
  }
  return abstract_graph(n, edges);
}

}  // namespace

TEST(RouteLength, SmallCases) {
  RouteEngine path(abstract_graph(3, {{0, 1, 1.0}, {1, 2, 1.0}}));
  EXPECT_EQ(path.route_length(1, 1), 0.0);
  EXPECT_EQ(path.route_length(0, 2), 2.0);
  EXPECT_EQ(path.route_length(2, 0), 2.0);
  EXPECT_THROW(path.route_length(0, 5), std::invalid_argument);
}

TEST(RouteLength, DisconnectedIsAnError) {
  RouteEngine eng(abstract_graph(4, {{0, 1, 1.0}, {2, 3, 1.0}}));
  try {
    eng.route_length(0, 3);
    FAIL();
  } catch (const disconnected_graph_error& e) {
    EXPECT_NE(std::string(e.what()).find("component"), std::string::npos);
    EXPECT_EQ(e.component_sizes().size(), 2u);
  }
}

TEST(RouteLength, MatchesFloydWarshall) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto net = random_connected_graph(30, seed);
    RouteEngine eng(net);
    const auto fw = oracle::floyd_warshall(30, net.edges());
    for (std::size_t u = 0; u < 30; ++u)
      for (std::size_t v = 0; v < 30; ++v) EXPECT_NEAR(eng.route_length(u, v), fw[u][v], 1e-12 * fw[u][v]);
  }
}

TEST(RouteLengthsFrom, BatchedQueries) {
  RouteEngine path(abstract_graph(3, {{0, 1, 1.0}, {1, 2, 1.0}}));
  EXPECT_EQ(path.route_lengths_from(2, {2}), std::vector<double>{0.0});
  RouteEngine cycle(abstract_graph(5, {{0, 1, 1}, {1, 2, 1}, {2, 3, 1}, {3, 4, 1}, {0, 4, 1}}));
  EXPECT_EQ(cycle.route_lengths_from(0, {0, 1, 2, 3, 4}), (std::vector<double>{0, 1, 2, 2, 1}));
}

TEST(RouteLengthsFrom, AgreesWithPairQueriesOnRng) {
  const PointSet ps = sample_poisson(Window(31.6, 31.6), 1.0, 44);
  ASSERT_GT(ps.size(), 900u);
  RouteEngine eng(build_rng(ps));
  std::vector<std::size_t> targets;
  for (std::size_t v = 0; v < ps.size(); v += 37) targets.push_back(v);
  const auto batch = eng.route_lengths_from(5, targets);
  for (std::size_t k = 0; k < targets.size(); ++k) EXPECT_EQ(batch[k], eng.route_length(5, targets[k]));
}

TEST(Ball, Examples) {
  RouteEngine path(abstract_graph(3, {{0, 1, 1.0}, {1, 2, 1.0}}));
  EXPECT_EQ(path.ball(1, 0.0), std::vector<std::size_t>{1});
  EXPECT_EQ(path.ball(0, 1.0), (std::vector<std::size_t>{0, 1}));
  EXPECT_THROW(path.ball(0, INFINITY), std::invalid_argument);
}

TEST(Ball, IsFilterOfDistances) {
  const auto net = random_connected_graph(200, 9);
  RouteEngine eng(net);
  for (std::size_t u : {0u, 17u, 123u})
    for (double r : {0.5, 2.0, 6.0, 30.0}) {
      const auto d = eng.distances_from(u);
      std::vector<std::size_t> expect;
      for (std::size_t v = 0; v < d.size(); ++v)
        if (d[v] <= r) expect.push_back(v);
      EXPECT_EQ(eng.ball(u, r), expect);
    }
}

TEST(CheckTriangle, ShortestPathMetricsHaveNoViolations) {
  RouteEngine small(abstract_graph(4, {{0, 1, 1.5}, {1, 2, 0.25}, {2, 3, 2.0}, {0, 3, 3.0}, {0, 2, 1.0}}));
  const auto rep = small.network().edges().size() ? check_triangle(small, 500, 1) : MetricReport{};
  EXPECT_EQ(rep.samples_checked, 500u);
  EXPECT_TRUE(rep.ok());
  EXPECT_LE(rep.max_violation, 1e-9);

  RouteEngine rng(build_rng(sample_poisson(Window(40, 40), 1.0, 7)));
  const auto big = check_triangle(rng, 10000, 7);
  EXPECT_EQ(big.samples_checked, 10000u);
  EXPECT_TRUE(big.ok());
}

TEST(CheckEuclidLb, GeometricAndCostModels) {
  const PointSet ps = sample_poisson(Window(20, 20), 1.0, 3);
  EXPECT_TRUE(check_euclid_lb(RouteEngine(build_rng(ps)), 2000, 1).ok());

  const PointSet three(Window(3, 1, Topology::plane), {{0, 0.5}, {1, 0.5}, {2, 0.5}}, {}, 0);
  RouteEngine p2(apply_cost_rule(build_rng(three), CostRule::power(2.0)));
  EXPECT_EQ(p2.route_length(0, 2), 2.0);
  EXPECT_TRUE(check_euclid_lb(p2, 200, 1).ok());
  const PointSet half(Window(3, 1, Topology::plane), {{0, 0.5}, {0.5, 0.5}, {1, 0.5}}, {}, 0);
  RouteEngine p3(apply_cost_rule(build_rng(half), CostRule::power(2.0)));
  EXPECT_EQ(p3.route_length(0, 2), 0.5);
  EXPECT_FALSE(check_euclid_lb(p3, 200, 1).ok());

  const PointSet cloud = sample_poisson(Window(14.1, 14.1), 1.0, 5);
  RouteEngine iid(apply_cost_rule(build_delaunay(cloud), CostRule::iid(CostLaw::exponential(1.0), 9)));
  const auto rep = check_euclid_lb(iid, 5000, 2);
  EXPECT_GT(rep.violations.size(), 0u);
  EXPECT_GT(rep.max_violation, 0.0);
}

TEST(RouteEngine, MonotoneUnderEdgeAddition) {
  const auto net = random_connected_graph(60, 2);
  RouteEngine before(net);
  auto edges = net.edges();
  edges.push_back({0, 59, 0.05});
  if (net.has_edge(0, 59)) edges.pop_back();
  RouteEngine after(net.with_edges(edges, "test+"));
  for (std::size_t u = 0; u < 60; u += 3) {
    const auto a = before.distances_from(u), b = after.distances_from(u);
    for (std::size_t v = 0; v < 60; ++v) EXPECT_LE(b[v], a[v]);
  }
}
