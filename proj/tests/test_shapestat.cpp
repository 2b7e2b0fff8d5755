#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "shapeline/shapestat.hpp"

using namespace shapeline;

namespace {

std::size_t nearest_linear(const PointSet& ps, Point p) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < ps.size(); ++i)
    if (pair_distance(ps.window(), ps[i], p) < pair_distance(ps.window(), ps[best], p)) best = i;
  return best;
}

Realization rng_realization(double side, std::uint64_t seed) {
  ModelSpec m;
  return realize(m, replicate_points(Window(side, side), 1.0, seed, 0), 1.0, replicate_model_seed(seed, 0));
}

double l1_rho(double t) { return std::abs(std::cos(t)) + std::abs(std::sin(t)); }

}  // namespace

TEST(Models, ValidateRejectsBadParameters) {
  ModelSpec m;
  m.name = "power";
  m.alpha = 0.5;
  EXPECT_THROW(m.validate(), std::invalid_argument);
  m.alpha = 1.0;
  EXPECT_THROW(m.validate(), std::invalid_argument);
  m.degenerate = true;
  EXPECT_NO_THROW(m.validate());
  EXPECT_TRUE(m.exact_euclidean());
  m.name = "nonsense";
  EXPECT_THROW(m.validate(), std::invalid_argument);
  ModelSpec e;
  e.name = "euclidean-complete";
  e.cost = CostRule::power(2.0);
  EXPECT_THROW(e.validate(), std::invalid_argument);
}

TEST(Models, ReplicatePointsSharedAcrossModels) {
  const auto a = replicate_points(Window(30, 30), 1.0, 5, 3);
  const auto b = replicate_points(Window(30, 30), 1.0, 5, 3);
  ASSERT_EQ(a->size(), b->size());
  for (std::size_t i = 0; i < a->size(); ++i) EXPECT_EQ((*a)[i], (*b)[i]);
  const auto c = replicate_points(Window(30, 30), 1.0, 5, 4);
  EXPECT_FALSE(c->size() == a->size() && (*c)[0] == (*a)[0]);
}

TEST(Models, RunReplicatesIndependentOfWorkers) {
  auto f = [](std::size_t r) { return derive_seed(11, stream::sampling, r); };
  EXPECT_EQ(run_replicates(37, 1, f), run_replicates(37, 4, f));
  try {
    run_replicates(10, 3, [](std::size_t r) -> int {
      if (r == 4 || r == 7) throw std::runtime_error("rep " + std::to_string(r));
      return 0;
    });
    FAIL();
  } catch (const std::runtime_error& e) {
    EXPECT_STREQ(e.what(), "rep 4");
  }
}

TEST(Models, ExactEuclideanRealization) {
  ModelSpec m;
  m.name = "euclidean-complete";
  const auto ps = replicate_points(Window(20, 20), 1.0, 2, 0);
  const Realization r = realize(m, ps, 1.0, 0);
  ASSERT_TRUE(r.exact_euclidean());
  for (std::size_t u = 0; u < ps->size(); u += 13)
    for (std::size_t v = 0; v < ps->size(); v += 7)
      EXPECT_EQ(r.route_length(u, v), pair_distance(ps->window(), (*ps)[u], (*ps)[v]));
}

TEST(DNearest, ComposesNearestPointAndRouteLength) {
  const Realization r = rng_realization(40, 3);
  const PointSet& ps = r.points();
  Engine eng(8);
  for (int k = 0; k < 25; ++k) {
    const Point a{uniform(eng, 0, 40), uniform(eng, 0, 40)}, b{uniform(eng, 0, 40), uniform(eng, 0, 40)};
    EXPECT_EQ(d_nearest(r, a, b), r.route_length(nearest_linear(ps, a), nearest_linear(ps, b)));
  }
}

TEST(SStatistic, MatchesPairLoopAndIsAdditive) {
  const Realization r = rng_realization(40, 4);
  const PointSet& ps = r.points();
  const Region A = Region::rectangle({10, 20}, 3, 2), B = Region::disc({28, 22}, 3);
  const double c = 17.5;
  double brute = 0;
  for (std::size_t x = 0; x < ps.size(); ++x)
    for (std::size_t y = 0; y < ps.size(); ++y)
      if (A.contains(ps.window(), ps[x]) && B.contains(ps.window(), ps[y])) brute += std::abs(r.route_length(x, y) - c);
  EXPECT_NEAR(s_statistic(r, A, B, c), brute, 1e-9 * brute);
  // A split into two halves
  const Region A1 = Region::rectangle({8.5, 20}, 1.5, 2), A2 = Region::rectangle({11.5, 20}, 1.5, 2);
  EXPECT_NEAR(s_statistic(r, A1, B, c) + s_statistic(r, A2, B, c), brute, 1e-9 * brute);
  EXPECT_EQ(s_statistic(r, Region::disc({5, 5}, 1e-9), B, c), 0.0);
  EXPECT_THROW(s_statistic(r, A, B, -1.0), std::invalid_argument);
}

TEST(SStatistic, SelfPairContributesC) {
  const PointSet one(Window(10, 10, Topology::plane), {{5, 5}}, {}, 0);
  ModelSpec m;
  m.name = "euclidean-complete";
  const Realization r = realize(m, std::make_shared<const PointSet>(one), 1.0, 0);
  EXPECT_EQ(s_statistic(r, Region::disc({5, 5}, 1), Region::disc({5, 5}, 1), 2.5), 2.5);
}

TEST(MeanSe, Oracle) {
  const MeanSe m = mean_se({1, 2, 3, 4});
  EXPECT_DOUBLE_EQ(m.mean, 2.5);
  EXPECT_NEAR(m.se, std::sqrt((2.25 + 0.25 + 0.25 + 2.25) / 3.0 / 4.0), 1e-15);
}

TEST(SummarizeRho, LinearTablesGiveExactSlope) {
  const std::vector<double> theta{0, 1, 2}, r{10, 20, 40};
  std::vector<std::vector<std::vector<double>>> tables;
  for (int k = 0; k < 5; ++k) {
    std::vector<std::vector<double>> t(3, std::vector<double>(3));
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 3; ++j) t[i][j] = 3.0 + k + (1.0 + 0.25 * j) * r[i];
    tables.push_back(t);
  }
  const auto s = summarize_rho(tables, theta, r, Estimator::slope);
  for (std::size_t j = 0; j < 3; ++j) {
    EXPECT_NEAR(s.rho_hat[j], 1.0 + 0.25 * j, 1e-12);
    EXPECT_NEAR(s.std_error[j], 0.0, 1e-12);
  }
  EXPECT_NEAR(s.theta_average, 1.25, 1e-12);
  const auto t = summarize_rho(tables, theta, r, Estimator::terminal);
  EXPECT_NEAR(t.rho_hat[0], (3.0 + 2.0) / 40.0 + 1.0, 1e-12);
  EXPECT_THROW(summarize_rho(tables, theta, {40}, Estimator::slope), std::invalid_argument);
}

TEST(EstimateRho, LatticeMatchesL1Formula) {
  ModelSpec m;
  m.name = "lattice";
  RhoOptions o;
  o.theta_grid = default_theta_grid(8);
  o.r_ladder = {10, 20, 40};
  o.replicates = 4;
  o.seed = 3;
  const auto est = estimate_rho(m, Window(130, 130), 1.0, o);
  for (std::size_t j = 0; j < 8; ++j) EXPECT_NEAR(est.rho_hat[j], l1_rho(est.theta_grid[j]), 0.05) << j;
}

TEST(EstimateRho, EuclideanIsOneAndWorkerIndependent) {
  ModelSpec m;
  m.name = "euclidean-complete";
  RhoOptions o;
  o.theta_grid = default_theta_grid(4);
  o.r_ladder = {20, 40};
  o.replicates = 6;
  const auto a = estimate_rho(m, Window(130, 130), 1.0, o);
  for (double r : a.rho_hat) EXPECT_NEAR(r, 1.0, 0.05);
  o.workers = 3;
  const auto b = estimate_rho(m, Window(130, 130), 1.0, o);
  EXPECT_EQ(a.rho_hat, b.rho_hat);
  EXPECT_EQ(a.std_error, b.std_error);
}

TEST(EstimateRho, RejectsLongLadder) {
  ModelSpec m;
  RhoOptions o;
  o.r_ladder = {10, 50};
  EXPECT_THROW(estimate_rho(m, Window(120, 120), 1.0, o), std::invalid_argument);
}

TEST(RhoAt, InterpolatesCircularly) {
  ShapeEstimate e;
  e.theta_grid = {0, std::numbers::pi / 2, std::numbers::pi, 3 * std::numbers::pi / 2};
  e.rho_hat = {1, 2, 3, 4};
  EXPECT_DOUBLE_EQ(rho_at(e, std::numbers::pi / 4), 1.5);
  EXPECT_DOUBLE_EQ(rho_at(e, 7 * std::numbers::pi / 4), 2.5);
  EXPECT_DOUBLE_EQ(rho_at(e, -std::numbers::pi / 4), 2.5);
}

TEST(Lipschitz, BruteForceAndL1Bound) {
  const auto g = default_theta_grid(64);
  std::vector<double> rho;
  for (double t : g) rho.push_back(l1_rho(t));
  double brute = 0;
  for (std::size_t j = 0; j < g.size(); ++j) {
    const std::size_t k = (j + 1) % g.size();
    const double dt = k ? g[k] - g[j] : 2 * std::numbers::pi - g[j];
    brute = std::max(brute, std::abs(rho[k] - rho[j]) / dt);
  }
  EXPECT_DOUBLE_EQ(lipschitz_ratio(g, rho), brute);
  EXPECT_LE(lipschitz_ratio(g, rho), std::sqrt(2.0) + 1e-12);
  EXPECT_THROW(lipschitz_ratio({0.0}, {1.0}), std::invalid_argument);
}

TEST(LimitShape, ConstantGivesRegularPolygon) {
  const auto g = default_theta_grid(12);
  const LimitShape s = limit_shape(g, std::vector<double>(12, 2.0), std::vector<double>(12, 0.01));
  EXPECT_NEAR(s.convexity_defect, 0.0, 1e-12);
  for (std::size_t j = 0; j < 12; ++j) {
    EXPECT_DOUBLE_EQ(s.radius[j], 0.5);
    EXPECT_NEAR(s.radial_extent(g[j]), 0.5, 1e-12);
    EXPECT_NEAR(norm(s.vertices[j]), 0.5, 1e-15);
  }
  // mid-edge of a regular 12-gon sits at r cos(pi/12)
  EXPECT_NEAR(s.radial_extent(std::numbers::pi / 12), 0.5 * std::cos(std::numbers::pi / 12), 1e-12);
  EXPECT_TRUE(s.contains({0.3, 0.3}, 1.0));
  EXPECT_FALSE(s.contains({0.3, 0.3}, 0.8));
  EXPECT_NEAR(s.defect_stderr, 0.01 / 4 * std::sqrt(1.5), 1e-15);
}

TEST(LimitShape, DiamondIsConvexAndDentIsMeasured) {
  const auto g = default_theta_grid(16);
  std::vector<double> rho;
  for (double t : g) rho.push_back(l1_rho(t));
  const LimitShape d = limit_shape(g, rho, {});
  EXPECT_LT(d.convexity_defect, 1e-12);
  for (std::size_t j = 0; j < 16; ++j)
    EXPECT_NEAR(std::abs(d.vertices[j].x) + std::abs(d.vertices[j].y), 1.0, 1e-12);
  // pull one vertex inward; its defect is the distance to the chord of its neighbours
  rho[2] *= 1.5;
  const LimitShape dent = limit_shape(g, rho, {});
  const Point a = dent.vertices[1], b = dent.vertices[3], p = dent.vertices[2];
  const double chord = std::abs(cross(b - a, p - a)) / norm(b - a);
  EXPECT_NEAR(dent.convexity_defect, chord, 1e-12);
  EXPECT_THROW(limit_shape(g, std::vector<double>(16, 0.0), {}), std::invalid_argument);
}

TEST(Judges, LspAndMomentsRules) {
  ShapeDiagnostics d;
  d.r_ladder = {1, 2, 3};
  d.s_ratio = {1.0, 0.7, 0.45};
  d.s_stderr = {0.01, 0.01, 0.01};
  judge_lsp(d);
  EXPECT_TRUE(d.pass);
  d.s_ratio = {1.0, 0.4, 0.45};  // rise of 0.05 > joint se 0.014
  judge_lsp(d);
  EXPECT_FALSE(d.pass);
  d.s_ratio = {1.0, 0.8, 0.6};
  judge_lsp(d);
  EXPECT_FALSE(d.pass);

  d.l2_ratio = {1.0, 1.02, 0.99};
  d.l2_stderr = {0.02, 0.02, 0.02};
  d.lub_ratio = {1.0, 1.0, 1.0};
  d.lub_stderr = {0.0, 0.0, 0.0};
  judge_moments(d);
  EXPECT_TRUE(d.pass);
  d.l2_ratio = {1.0, 1.02, 1.2};
  judge_moments(d);
  EXPECT_FALSE(d.pass);
  EXPECT_NE(d.detail.find("l2_ratio"), std::string::npos);
}

TEST(Diagnostics, EuclideanSRatioVanishesWithExactRho) {
  ModelSpec m;
  m.name = "euclidean-complete";
  ShapeEstimate rho;
  rho.theta_grid = default_theta_grid(4);
  rho.rho_hat.assign(4, 1.0);
  DiagOptions o;
  o.r_ladder = {10, 20, 40};
  o.replicates = 4;
  o.placements = 2;
  const Region A = Region::square({0, 0}, 1), B = Region::square({0, 0}, 1);
  const auto d = shape_diagnostics(m, Window(130, 130), 1.0, A, B, rho, o);
  ASSERT_EQ(d.s_ratio.size(), 3u);
  // |x - y| - r is at most the region diameter, so S/r is O(1/r)
  for (std::size_t i = 0; i < 3; ++i) EXPECT_LE(d.s_ratio[i], 2.0 * std::sqrt(2.0) * 4.0 / o.r_ladder[i]);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(d.lub_ratio[i], d.lub_ratio[0], 0.5);
}

TEST(AsShape, EuclideanSandwichesDisc) {
  ModelSpec m;
  m.name = "euclidean-complete";
  const Window w(100, 100, Topology::plane);
  const auto ps = replicate_points(w, 1.0, 6, 0, {w.center()});
  const Realization r = realize(m, ps, 1.0, 0);
  const auto g = default_theta_grid(16);
  const LimitShape disc = limit_shape(g, std::vector<double>(16, 1.0), {});
  for (const auto& res : as_shape_check(r, disc, {5, 20, 40}, 0.1)) EXPECT_TRUE(res.pass());
  // a shape twice too large: the inner sandwich fails
  const LimitShape big = limit_shape(g, std::vector<double>(16, 0.5), {});
  const auto bad = as_shape_check(r, big, {20}, 0.1);
  EXPECT_FALSE(bad[0].inner_ok);
  EXPECT_TRUE(bad[0].outer_ok);
  EXPECT_THROW(as_shape_check(r, disc, {48}, 0.1), std::invalid_argument);
}

TEST(Csv, RhoColumns) {
  ShapeEstimate e;
  e.theta_grid = {0};
  e.rho_hat = {1.25};
  e.std_error = {0.5};
  e.r_ladder = {10};
  e.per_r_means = {{1.5}};
  e.per_r_stderr = {{0.25}};
  std::ostringstream os;
  write_rho_csv(os, e);
  EXPECT_EQ(os.str().substr(0, os.str().find('\n')), "theta,rho_hat,std_error,mean_r10,stderr_r10");
}
