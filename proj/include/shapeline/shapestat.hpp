#pragma once

// Shape-constant estimation and its diagnostics.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <string>
#include <vector>

#include "errors.hpp"
#include "geometry.hpp"
#include "io.hpp"
#include "models.hpp"
#include "pointset.hpp"
#include "routes.hpp"

namespace shapeline {

inline const PointSet& points_of(const RouteEngine& e) { return e.network().pointset(); }
inline const PointSet& points_of(const Realization& r) { return r.points(); }

/// Route-length between the points nearest to `origin` and to `target`.
template <class Metric>
double d_nearest(const Metric& m, Point origin, Point target) {
  const PointSet& ps = points_of(m);
  if (ps.empty()) throw empty_domain_error("d_nearest on an empty network");
  return m.route_length(nearest_point(ps, origin), nearest_point(ps, target));
}

/// S(A,B;c) = sum over points x in A, y in B of |d(x,y) - c|. Planted points
/// are skipped unless include_planted. A point in both regions pairs with
/// itself and contributes c.
template <class Metric>
double s_statistic(const Metric& m, const Region& A, const Region& B, double c, bool include_planted = false) {
  if (!(c >= 0.0) || !std::isfinite(c)) throw invalid_argument("s_statistic needs c >= 0");
  const PointSet& ps = points_of(m);
  auto pick = [&](const Region& r) {
    auto idx = points_in(ps, r);
    if (!include_planted) std::erase_if(idx, [&](std::size_t i) { return ps.is_planted(i); });
    return idx;
  };
  const auto a = pick(A), b = pick(B);
  if (a.empty() || b.empty()) return 0.0;
  double s = 0.0;
  for (std::size_t x : a)
    for (double d : m.route_lengths_from(x, b)) s += std::abs(d - c);
  return s;
}

enum class Estimator { slope, terminal };

inline std::string to_string(Estimator e) { return e == Estimator::slope ? "slope" : "terminal"; }

inline Estimator estimator_from_string(const std::string& s) {
  if (s == "slope") return Estimator::slope;
  if (s == "terminal") return Estimator::terminal;
  throw invalid_argument("unknown estimator '" + s + "'");
}

inline std::vector<double> default_theta_grid(std::size_t k) {
  if (k == 0) throw invalid_argument("theta grid needs at least one angle");
  std::vector<double> g(k);
  for (std::size_t j = 0; j < k; ++j) g[j] = 2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(k);
  return g;
}

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};

inline MeanSe mean_se(const std::vector<double>& v) {
  MeanSe out;
  if (v.empty()) return out;
  for (double x : v) out.mean += x;
  out.mean /= static_cast<double>(v.size());
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - out.mean) * (x - out.mean);
    out.se = std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
  }
  return out;
}

struct RhoOptions {
  std::vector<double> theta_grid = default_theta_grid(16);
  std::vector<double> r_ladder{25, 50, 100, 200};
  std::size_t replicates = 24;
  std::uint64_t seed = 1;
  Estimator estimator = Estimator::slope;
  unsigned workers = 1;
};

struct ShapeEstimate {
  std::vector<double> theta_grid;
  std::vector<double> rho_hat;
  std::vector<double> std_error;
  std::vector<double> r_ladder;
  std::vector<std::vector<double>> per_r_means;   // [r][theta] of E[D(r,theta)]/r
  std::vector<std::vector<double>> per_r_stderr;  // same shape
  std::size_t replicates = 0;
  Estimator estimator = Estimator::slope;
  double theta_average = 0.0;  // replicate-wise average over the grid
  double theta_average_stderr = 0.0;
};

namespace detail {

inline void check_ladder(const std::vector<double>& ladder, const Window& w) {
  if (ladder.empty()) throw invalid_argument("r ladder is empty");
  for (std::size_t i = 0; i < ladder.size(); ++i) {
    if (!(ladder[i] > 0.0) || !std::isfinite(ladder[i])) throw invalid_argument("r ladder entries must be positive");
    if (i > 0 && !(ladder[i] > ladder[i - 1])) throw invalid_argument("r ladder must be increasing");
  }
  if (ladder.back() > w.min_side() / 3.0)
    throw invalid_argument("largest radius " + io::real(ladder.back()) + " exceeds window_side/3 = " +
                           io::real(w.min_side() / 3.0));
}

inline void check_theta_grid(const std::vector<double>& g) {
  if (g.empty()) throw invalid_argument("theta grid is empty");
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!(g[i] >= 0.0 && g[i] < 2.0 * std::numbers::pi)) throw invalid_argument("theta grid angles must be in [0, 2pi)");
    if (i > 0 && !(g[i] > g[i - 1])) throw invalid_argument("theta grid must be increasing");
  }
}

inline double ls_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(x.size());
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxy / sxx;
}

}  // namespace detail

/// D(r,theta) for every rung and angle of one realization, origin at the
/// window center: [r][theta].
template <class Metric>
std::vector<std::vector<double>> d_table(const Metric& m, const std::vector<double>& theta_grid,
                                         const std::vector<double>& r_ladder) {
  const PointSet& ps = points_of(m);
  if (ps.empty()) throw empty_domain_error("realization has no points");
  const Window& w = ps.window();
  const Point origin = w.center();
  const auto dist = m.distances_from(nearest_point(ps, origin));
  std::vector<std::vector<double>> table(r_ladder.size(), std::vector<double>(theta_grid.size()));
  for (std::size_t i = 0; i < r_ladder.size(); ++i)
    for (std::size_t j = 0; j < theta_grid.size(); ++j) {
      const double d = dist[nearest_point(ps, polar_point(w, origin, r_ladder[i], theta_grid[j]))];
      if (d == unreachable) throw disconnected_graph_error("target unreachable from origin", {});
      table[i][j] = d;
    }
  return table;
}

/// Aggregates per-replicate D tables into an estimate.
inline ShapeEstimate summarize_rho(const std::vector<std::vector<std::vector<double>>>& tables,
                                   const std::vector<double>& theta_grid, const std::vector<double>& r_ladder,
                                   Estimator estimator) {
  if (estimator == Estimator::slope && r_ladder.size() < 2)
    throw invalid_argument("slope estimator needs at least two radii");
  const std::size_t R = tables.size(), nr = r_ladder.size(), nt = theta_grid.size();
  ShapeEstimate est;
  est.theta_grid = theta_grid;
  est.r_ladder = r_ladder;
  est.replicates = R;
  est.estimator = estimator;
  est.per_r_means.assign(nr, std::vector<double>(nt));
  est.per_r_stderr.assign(nr, std::vector<double>(nt));
  std::vector<double> col(R);
  for (std::size_t i = 0; i < nr; ++i)
    for (std::size_t j = 0; j < nt; ++j) {
      for (std::size_t k = 0; k < R; ++k) col[k] = tables[k][i][j] / r_ladder[i];
      const MeanSe ms = mean_se(col);
      est.per_r_means[i][j] = ms.mean;
      est.per_r_stderr[i][j] = ms.se;
    }
  // per replicate and angle estimator value; the slope is linear in D, so
  // averaging per-replicate slopes equals the slope of the mean curve
  std::vector<std::vector<double>> value(R, std::vector<double>(nt));
  std::vector<double> d(nr);
  for (std::size_t k = 0; k < R; ++k)
    for (std::size_t j = 0; j < nt; ++j) {
      if (estimator == Estimator::terminal) {
        value[k][j] = tables[k][nr - 1][j] / r_ladder[nr - 1];
      } else {
        for (std::size_t i = 0; i < nr; ++i) d[i] = tables[k][i][j];
        value[k][j] = detail::ls_slope(r_ladder, d);
      }
    }
  est.rho_hat.resize(nt);
  est.std_error.resize(nt);
  for (std::size_t j = 0; j < nt; ++j) {
    for (std::size_t k = 0; k < R; ++k) col[k] = value[k][j];
    const MeanSe ms = mean_se(col);
    est.rho_hat[j] = ms.mean;
    est.std_error[j] = ms.se;
  }
  for (std::size_t k = 0; k < R; ++k) {
    double s = 0;
    for (double v : value[k]) s += v;
    col[k] = s / static_cast<double>(nt);
  }
  const MeanSe avg = mean_se(col);
  est.theta_average = avg.mean;
  est.theta_average_stderr = avg.se;
  return est;
}

/// Monte Carlo estimate of rho(theta) for a model at the given intensity.
inline ShapeEstimate estimate_rho(const ModelSpec& model, const Window& w, double intensity, const RhoOptions& opt) {
  model.validate();
  detail::check_theta_grid(opt.theta_grid);
  detail::check_ladder(opt.r_ladder, w);
  if (opt.replicates < 2) throw invalid_argument("estimate_rho needs at least 2 replicates");
  if (opt.estimator == Estimator::slope && opt.r_ladder.size() < 2)
    throw invalid_argument("slope estimator needs at least two radii");
  if (!(intensity > 0.0)) throw invalid_argument("estimate_rho needs positive intensity");
  auto tables = run_replicates(opt.replicates, opt.workers, [&](std::size_t rep) {
    const auto ps = replicate_points(w, intensity, opt.seed, rep);
    const Realization real = realize(model, ps, intensity, replicate_model_seed(opt.seed, rep));
    return d_table(real, opt.theta_grid, opt.r_ladder);
  });
  return summarize_rho(tables, opt.theta_grid, opt.r_ladder, opt.estimator);
}

/// rho_hat at an arbitrary angle by circular linear interpolation.
inline double rho_at(const ShapeEstimate& est, double theta) {
  const auto& g = est.theta_grid;
  const std::size_t n = g.size();
  if (n == 1) return est.rho_hat[0];
  constexpr double two_pi = 2.0 * std::numbers::pi;
  theta = std::fmod(std::fmod(theta, two_pi) + two_pi, two_pi);
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t k = (j + 1) % n;
    const double a = g[j], b = k == 0 ? g[0] + two_pi : g[k];
    double t = theta;
    if (t < a) t += two_pi;
    if (t >= a && t <= b) {
      const double f = (t - a) / (b - a);
      return est.rho_hat[j] * (1 - f) + est.rho_hat[k] * f;
    }
  }
  return est.rho_hat[0];
}

struct ShapeDiagnostics {
  std::vector<double> r_ladder;
  std::vector<double> s_ratio, s_stderr;
  std::vector<double> l2_ratio, l2_stderr;
  std::vector<double> lub_ratio, lub_stderr;
  double kappa_hat = 0.0;
  std::size_t replicates = 0;
  bool pass = false;
  std::string detail;
};

struct DiagOptions {
  std::vector<double> r_ladder{25, 50, 100, 200};
  std::size_t replicates = 24;
  std::uint64_t seed = 1;
  std::size_t placements = 4;  // independent base positions per replicate
  unsigned workers = 1;
};

namespace detail {

struct DiagSample {
  std::vector<double> s, l2, lub;
};

// Sums over pairs (x in A at a base point, y in B at base + r*(cos, sin)),
// averaged over the estimate's angles and the base placements.
template <class Metric>
DiagSample diag_sample(const Metric& m, const Region& A, const Region& B, const ShapeEstimate& rho,
                       const std::vector<double>& ladder, std::size_t placements) {
  const PointSet& ps = points_of(m);
  const Window& w = ps.window();
  const std::size_t nr = ladder.size(), nt = rho.theta_grid.size();
  if (!w.is_torus()) placements = 1;
  DiagSample out{std::vector<double>(nr, 0.0), std::vector<double>(nr, 0.0), std::vector<double>(nr, 0.0)};
  for (std::size_t p = 0; p < placements; ++p) {
    const double fx = static_cast<double>(p) / static_cast<double>(placements);
    const double fy = std::fmod(static_cast<double>(p) * 0.6180339887498949, 1.0);
    const Point base = w.wrap(w.center() + Point{fx * w.width(), fy * w.height()});
    auto in_a = points_in(ps, A.translated_to(base));
    std::erase_if(in_a, [&](std::size_t i) { return ps.is_planted(i); });
    if (in_a.empty()) continue;
    std::vector<std::vector<std::vector<std::size_t>>> in_b(nr, std::vector<std::vector<std::size_t>>(nt));
    for (std::size_t i = 0; i < nr; ++i)
      for (std::size_t j = 0; j < nt; ++j) {
        in_b[i][j] = points_in(ps, B.translated_to(polar_point(w, base, ladder[i], rho.theta_grid[j])));
        std::erase_if(in_b[i][j], [&](std::size_t k) { return ps.is_planted(k); });
      }
    for (std::size_t x : in_a) {
      const auto dist = m.distances_from(x);
      for (std::size_t i = 0; i < nr; ++i)
        for (std::size_t j = 0; j < nt; ++j) {
          const double c = ladder[i] * rho.rho_hat[j];
          for (std::size_t y : in_b[i][j]) {
            const double d = dist[y];
            if (d == unreachable) throw disconnected_graph_error("diagnostic pair unreachable", {});
            out.s[i] += std::abs(d - c);
            out.lub[i] += d;
            out.l2[i] += d * d;
          }
        }
    }
  }
  const double norm = static_cast<double>(placements * nt);
  for (std::size_t i = 0; i < nr; ++i) {
    out.s[i] /= norm * ladder[i];
    out.lub[i] /= norm * ladder[i];
    out.l2[i] /= norm * std::max(1.0, ladder[i] * ladder[i]);
  }
  return out;
}

inline double joint_se(double a, double b) { return std::sqrt(a * a + b * b); }

}  // namespace detail

/// Per-rung ratios r^-1 S(A, z+B; r rho), E[sum d^2]/max(1,r^2) and
/// E[sum d]/r with standard errors across replicates. No verdict.
inline ShapeDiagnostics shape_diagnostics(const ModelSpec& model, const Window& w, double intensity, const Region& A,
                                          const Region& B, const ShapeEstimate& rho, const DiagOptions& opt) {
  model.validate();
  detail::check_ladder(opt.r_ladder, w);
  if (opt.replicates < 2) throw invalid_argument("diagnostics need at least 2 replicates");
  if (rho.theta_grid.empty() || rho.rho_hat.size() != rho.theta_grid.size())
    throw invalid_argument("diagnostics need a rho estimate");
  auto samples = run_replicates(opt.replicates, opt.workers, [&](std::size_t rep) {
    const auto ps = replicate_points(w, intensity, opt.seed, rep);
    const Realization real = realize(model, ps, intensity, replicate_model_seed(opt.seed, rep));
    return detail::diag_sample(real, A, B, rho, opt.r_ladder, std::max<std::size_t>(opt.placements, 1));
  });
  ShapeDiagnostics diag;
  diag.r_ladder = opt.r_ladder;
  diag.replicates = opt.replicates;
  std::vector<double> col(samples.size());
  auto fill = [&](auto member, std::vector<double>& mean, std::vector<double>& se) {
    for (std::size_t i = 0; i < opt.r_ladder.size(); ++i) {
      for (std::size_t k = 0; k < samples.size(); ++k) col[k] = (samples[k].*member)[i];
      const MeanSe ms = mean_se(col);
      mean.push_back(ms.mean);
      se.push_back(ms.se);
    }
  };
  fill(&detail::DiagSample::s, diag.s_ratio, diag.s_stderr);
  fill(&detail::DiagSample::l2, diag.l2_ratio, diag.l2_stderr);
  fill(&detail::DiagSample::lub, diag.lub_ratio, diag.lub_stderr);
  diag.kappa_hat = *std::max_element(diag.lub_ratio.begin(), diag.lub_ratio.end());
  return diag;
}

/// L1 shape-property trend: final rung at most half the first, and no
/// consecutive increase beyond one joint standard error.
inline void judge_lsp(ShapeDiagnostics& d) {
  const auto& s = d.s_ratio;
  const auto& se = d.s_stderr;
  bool monotone = true;
  std::string why;
  for (std::size_t i = 0; i + 1 < s.size(); ++i)
    if (s[i + 1] > s[i] + detail::joint_se(se[i], se[i + 1])) {
      monotone = false;
      why = "s_ratio rises from r=" + io::real(d.r_ladder[i]) + " to r=" + io::real(d.r_ladder[i + 1]);
    }
  const bool halved = s.back() <= 0.5 * s.front();
  if (!halved) why = "s_ratio at largest r is above half of its value at smallest r";
  d.pass = monotone && halved;
  d.detail = d.pass ? "s_ratio halves and decreases within 1 stderr" : why;
}

/// Moment boundedness: neither l2_ratio nor lub_ratio increases between any
/// two rungs by more than two joint standard errors.
inline void judge_moments(ShapeDiagnostics& d) {
  d.pass = true;
  d.detail = "l2_ratio and lub_ratio show no increasing trend";
  auto scan = [&](const std::vector<double>& v, const std::vector<double>& se, const char* name) {
    for (std::size_t i = 0; i < v.size(); ++i)
      for (std::size_t j = i + 1; j < v.size(); ++j)
        if (v[j] - v[i] > 2.0 * detail::joint_se(se[i], se[j])) {
          d.pass = false;
          d.detail = std::string(name) + " increases from r=" + io::real(d.r_ladder[i]) + " to r=" +
                     io::real(d.r_ladder[j]);
        }
  };
  scan(d.l2_ratio, d.l2_stderr, "l2_ratio");
  scan(d.lub_ratio, d.lub_stderr, "lub_ratio");
}

inline ShapeDiagnostics check_lsp(const ModelSpec& model, const Window& w, double intensity, const Region& A,
                                  const Region& B, const ShapeEstimate& rho, const DiagOptions& opt) {
  auto d = shape_diagnostics(model, w, intensity, A, B, rho, opt);
  judge_lsp(d);
  return d;
}

inline ShapeDiagnostics check_moments(const ModelSpec& model, const Window& w, double intensity, const Region& A,
                                      const Region& B, const ShapeEstimate& rho, const DiagOptions& opt) {
  auto d = shape_diagnostics(model, w, intensity, A, B, rho, opt);
  judge_moments(d);
  return d;
}

/// max over circularly adjacent grid angles of |drho| / dtheta.
inline double lipschitz_ratio(const std::vector<double>& theta, const std::vector<double>& rho) {
  if (theta.size() < 2 || rho.size() != theta.size()) throw invalid_argument("lipschitz_ratio needs >= 2 angles");
  double best = 0.0;
  for (std::size_t j = 0; j < theta.size(); ++j) {
    const std::size_t k = (j + 1) % theta.size();
    const double dt = k == 0 ? theta[0] + 2.0 * std::numbers::pi - theta[j] : theta[k] - theta[j];
    best = std::max(best, std::abs(rho[k] - rho[j]) / dt);
  }
  return best;
}

inline double lipschitz_ratio(const ShapeEstimate& est) { return lipschitz_ratio(est.theta_grid, est.rho_hat); }

struct LimitShape {
  std::vector<double> theta;
  std::vector<double> radius;          // 1 / rho_hat
  std::vector<double> radius_stderr;   // stderr / rho_hat^2
  std::vector<Point> vertices;
  double convexity_defect = 0.0;
  double defect_stderr = 0.0;

  double max_radius() const { return *std::max_element(radius.begin(), radius.end()); }

  /// Distance from the origin to the polygon boundary along angle phi.
  double radial_extent(double phi) const {
    const Point u{std::cos(phi), std::sin(phi)};
    double best = 0.0;
    for (std::size_t j = 0; j < vertices.size(); ++j) {
      const Point a = vertices[j], b = vertices[(j + 1) % vertices.size()];
      // solve t*u = a + s*(b - a), t >= 0, s in [0,1]
      const Point e = b - a;
      const double den = cross(u, e);
      if (den == 0.0) continue;
      const double t = cross(a, e) / den;
      const double s = cross(a, u) / den;
      if (t >= 0.0 && s >= -1e-12 && s <= 1.0 + 1e-12) best = std::max(best, t);
    }
    return best;
  }

  /// Whether offset lies in scale * polygon (closed).
  bool contains(Point offset, double scale) const {
    const double r = norm(offset);
    if (r == 0.0) return true;
    return r <= scale * radial_extent(std::atan2(offset.y, offset.x));
  }
};

namespace detail {

inline std::vector<Point> convex_hull(std::vector<Point> p) {
  std::sort(p.begin(), p.end(), [](Point a, Point b) { return a.x < b.x || (a.x == b.x && a.y < b.y); });
  if (p.size() < 3) return p;
  std::vector<Point> h(2 * p.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    while (k >= 2 && cross(h[k - 1] - h[k - 2], p[i] - h[k - 2]) <= 0) --k;
    h[k++] = p[i];
  }
  for (std::size_t i = p.size() - 1, t = k + 1; i-- > 0;) {
    while (k >= t && cross(h[k - 1] - h[k - 2], p[i] - h[k - 2]) <= 0) --k;
    h[k++] = p[i];
  }
  h.resize(k - 1);
  return h;
}

inline double segment_distance(Point p, Point a, Point b) {
  const Point e = b - a;
  const double len2 = dot(e, e);
  double t = len2 > 0 ? dot(p - a, e) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return norm(p - (a + t * e));
}

}  // namespace detail

inline LimitShape limit_shape(const std::vector<double>& theta, const std::vector<double>& rho,
                              const std::vector<double>& rho_stderr) {
  if (theta.empty() || rho.size() != theta.size()) throw invalid_argument("limit_shape needs one rho per angle");
  for (double r : rho)
    if (!(r > 0.0) || !std::isfinite(r)) throw invalid_argument("limit_shape needs every rho_hat > 0");
  LimitShape s;
  s.theta = theta;
  const std::size_t n = theta.size();
  for (std::size_t j = 0; j < n; ++j) {
    s.radius.push_back(1.0 / rho[j]);
    s.radius_stderr.push_back(j < rho_stderr.size() ? rho_stderr[j] / (rho[j] * rho[j]) : 0.0);
    s.vertices.push_back({s.radius[j] * std::cos(theta[j]), s.radius[j] * std::sin(theta[j])});
  }
  if (n >= 3) {
    const auto hull = detail::convex_hull(s.vertices);
    for (std::size_t j = 0; j < n; ++j) {
      double dmin = INFINITY;
      for (std::size_t k = 0; k < hull.size(); ++k)
        dmin = std::min(dmin, detail::segment_distance(s.vertices[j], hull[k], hull[(k + 1) % hull.size()]));
      s.convexity_defect = std::max(s.convexity_defect, dmin);
      // a vertex's defect moves with its own radius and half of each neighbour's
      const double a = s.radius_stderr[j], b = s.radius_stderr[(j + n - 1) % n], c = s.radius_stderr[(j + 1) % n];
      s.defect_stderr = std::max(s.defect_stderr, std::sqrt(a * a + (b * b + c * c) / 4.0));
    }
  }
  return s;
}

inline LimitShape limit_shape(const ShapeEstimate& est) {
  return limit_shape(est.theta_grid, est.rho_hat, est.std_error);
}

struct SandwichResult {
  double ell = 0.0;
  bool inner_ok = true;  // points in (1-eps) ell B are reached within ell
  bool outer_ok = true;  // points reached within ell lie in (1+eps) ell B
  std::vector<std::size_t> inner_witnesses, outer_witnesses;
  bool pass() const noexcept { return inner_ok && outer_ok; }
};

/// Sandwich test about the first planted point on a plane window.
template <class Metric>
std::vector<SandwichResult> as_shape_check(const Metric& m, const LimitShape& B, const std::vector<double>& ells,
                                           double eps) {
  const PointSet& ps = points_of(m);
  const Window& w = ps.window();
  if (w.is_torus()) throw invalid_argument("as_shape_check needs a plane window");
  if (ps.planted().empty()) throw invalid_argument("as_shape_check needs a planted origin");
  if (!(eps > 0.0 && eps < 1.0)) throw invalid_argument("epsilon must be in (0,1)");
  const std::size_t o = ps.planted()[0];
  const Point origin = ps[o];
  const double room = std::min({origin.x, w.width() - origin.x, origin.y, w.height() - origin.y});
  double lmax = 0.0;
  for (double l : ells) {
    if (!(l >= 0.0) || !std::isfinite(l)) throw invalid_argument("ell must be >= 0");
    lmax = std::max(lmax, l);
  }
  if (lmax * (1 + eps) * B.max_radius() > room)
    throw invalid_argument("ell*(1+eps)*max radius of B exceeds the distance from the origin to the window edge");
  const auto dist = m.distances_from(o);
  std::vector<SandwichResult> out;
  for (double l : ells) {
    SandwichResult r;
    r.ell = l;
    for (std::size_t v = 0; v < ps.size(); ++v) {
      const Point off = ps[v] - origin;
      if (B.contains(off, (1 - eps) * l) && !(dist[v] <= l)) {
        r.inner_ok = false;
        r.inner_witnesses.push_back(v);
      }
      if (dist[v] <= l && !B.contains(off, (1 + eps) * l)) {
        r.outer_ok = false;
        r.outer_witnesses.push_back(v);
      }
    }
    out.push_back(std::move(r));
  }
  return out;
}

inline void write_rho_csv(std::ostream& os, const ShapeEstimate& est) {
  os << "theta,rho_hat,std_error";
  for (double r : est.r_ladder) os << ",mean_r" << io::real(r) << ",stderr_r" << io::real(r);
  os << '\n';
  for (std::size_t j = 0; j < est.theta_grid.size(); ++j) {
    os << io::real(est.theta_grid[j]) << ',' << io::real(est.rho_hat[j]) << ',' << io::real(est.std_error[j]);
    for (std::size_t i = 0; i < est.r_ladder.size(); ++i)
      os << ',' << io::real(est.per_r_means[i][j]) << ',' << io::real(est.per_r_stderr[i][j]);
    os << '\n';
  }
}

inline void write_diag_csv(std::ostream& os, const ShapeDiagnostics& d) {
  os << "r,s_ratio,s_stderr,l2_ratio,l2_stderr,lub_ratio,lub_stderr\n";
  for (std::size_t i = 0; i < d.r_ladder.size(); ++i)
    os << io::real(d.r_ladder[i]) << ',' << io::real(d.s_ratio[i]) << ',' << io::real(d.s_stderr[i]) << ','
       << io::real(d.l2_ratio[i]) << ',' << io::real(d.l2_stderr[i]) << ',' << io::real(d.lub_ratio[i]) << ','
       << io::real(d.lub_stderr[i]) << '\n';
}

/// Plot-ready polygon: theta, 1/rho_hat.
inline void write_shape_csv(std::ostream& os, const LimitShape& s) {
  os << "theta,radius\n";
  for (std::size_t j = 0; j < s.theta.size(); ++j) os << io::real(s.theta[j]) << ',' << io::real(s.radius[j]) << '\n';
}

}  // namespace shapeline
