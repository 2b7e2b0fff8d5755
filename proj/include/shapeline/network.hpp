#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "delaunay.hpp"
#include "errors.hpp"
#include "geometry.hpp"
#include "graph.hpp"
#include "pointset.hpp"
#include "random.hpp"

namespace shapeline {

enum class VertexKind { poisson, grid, planted };

inline std::string_view to_string(VertexKind k) {
  switch (k) {
    case VertexKind::poisson: return "poisson";
    case VertexKind::grid: return "grid";
    case VertexKind::planted: return "planted";
  }
  return "poisson";
}

/// Points of a PointSet (vertices 0..n-1) plus optional extra vertices
/// (vertices n..), joined by undirected weighted edges stored once with u < v.
class SpatialNetwork {
 public:
  SpatialNetwork() : SpatialNetwork(std::make_shared<const PointSet>(), {}, {}, "empty") {}

  SpatialNetwork(std::shared_ptr<const PointSet> points, std::vector<Point> extra_vertices,
                 std::vector<NetEdge> edges, std::string model_tag)
      : points_(std::move(points)),
        extra_(std::move(extra_vertices)),
        edges_(std::move(edges)),
        tag_(std::move(model_tag)) {
    const std::size_t n = vertex_count();
    for (NetEdge& e : edges_) {
      if (e.u > e.v) std::swap(e.u, e.v);
      if (e.u == e.v) throw invalid_argument("self-loop in network");
      if (e.v >= n) throw invalid_argument("edge endpoint out of range");
      if (!(std::isfinite(e.length) && e.length > 0.0)) throw invalid_argument("edge length must be finite and > 0");
    }
    std::sort(edges_.begin(), edges_.end(),
              [](const NetEdge& a, const NetEdge& b) { return a.u < b.u || (a.u == b.u && a.v < b.v); });
    for (std::size_t i = 1; i < edges_.size(); ++i)
      if (edges_[i].u == edges_[i - 1].u && edges_[i].v == edges_[i - 1].v)
        throw invalid_argument("duplicate edge in network");
    if (tag_.empty() || tag_.find_first_of(" \t\n") != std::string::npos)
      throw invalid_argument("model tag must be a nonempty token");
  }

  const PointSet& pointset() const noexcept { return *points_; }
  std::shared_ptr<const PointSet> pointset_ptr() const noexcept { return points_; }
  const Window& window() const noexcept { return points_->window(); }
  const std::vector<Point>& extra_vertices() const noexcept { return extra_; }
  const std::vector<NetEdge>& edges() const noexcept { return edges_; }
  const std::string& model_tag() const noexcept { return tag_; }

  std::size_t point_count() const noexcept { return points_->size(); }
  std::size_t vertex_count() const noexcept { return points_->size() + extra_.size(); }

  Point position(std::size_t v) const {
    return v < points_->size() ? (*points_)[v] : extra_[v - points_->size()];
  }

  VertexKind kind(std::size_t v) const {
    if (v >= points_->size()) return VertexKind::grid;
    return points_->is_planted(v) ? VertexKind::planted : VertexKind::poisson;
  }

  double geometric_length(std::size_t u, std::size_t v) const {
    return pair_distance(window(), position(u), position(v));
  }

  bool has_edge(std::size_t u, std::size_t v) const {
    if (u > v) std::swap(u, v);
    auto it = std::lower_bound(edges_.begin(), edges_.end(), std::make_pair(u, v),
                               [](const NetEdge& e, const std::pair<std::size_t, std::size_t>& k) {
                                 return e.u < k.first || (e.u == k.first && e.v < k.second);
                               });
    return it != edges_.end() && it->u == u && it->v == v;
  }

  SpatialNetwork with_edges(std::vector<NetEdge> edges, std::string tag) const {
    return SpatialNetwork(points_, extra_, std::move(edges), std::move(tag));
  }

 private:
  std::shared_ptr<const PointSet> points_;
  std::vector<Point> extra_;
  std::vector<NetEdge> edges_;
  std::string tag_;
};

namespace detail {

inline void require_connected(const SpatialNetwork& net) {
  Adjacency adj(net.vertex_count(), net.edges());
  auto [label, sizes] = adj.components();
  if (sizes.size() > 1)
    throw std::logic_error("construction produced a disconnected " + net.model_tag() + " network (" +
                           std::to_string(sizes.size()) + " components)");
}

inline std::string fmt_param(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

// Relative margin used by the open-region emptiness tests: a witness counts
// only when it is inside by more than this fraction of |uv|^2.
inline constexpr double kEmptinessTol = 1e-12;

// Periodic Delaunay edges by replicating a margin band of periodic images,
// triangulating, and keeping edges with an endpoint in the base window.
// The margin doubles until every triangle touching the base window has its
// circumdisc inside the replicated region.
inline std::vector<std::pair<std::size_t, std::size_t>> torus_delaunay_pairs(const PointSet& ps) {
  const Window& w = ps.window();
  const std::size_t n = ps.size();
  double margin = std::min(8.0 * std::sqrt(w.area() / static_cast<double>(n)), w.min_side());
  for (;;) {
    std::vector<Point> pts = ps.points();
    std::vector<std::size_t> origin(n);
    std::iota(origin.begin(), origin.end(), std::size_t{0});
    for (int ox = -1; ox <= 1; ++ox)
      for (int oy = -1; oy <= 1; ++oy) {
        if (ox == 0 && oy == 0) continue;
        for (std::size_t i = 0; i < n; ++i) {
          const Point q{ps[i].x + ox * w.width(), ps[i].y + oy * w.height()};
          if (q.x >= -margin && q.x < w.width() + margin && q.y >= -margin && q.y < w.height() + margin) {
            pts.push_back(q);
            origin.push_back(i);
          }
        }
      }
    const auto tri = delaunay::triangulate(pts, true);
    const double lo_x = -margin, hi_x = w.width() + margin, lo_y = -margin, hi_y = w.height() + margin;
    bool certified = true;
    for (const auto& t : tri.triangles) {
      if (t[0] >= n && t[1] >= n && t[2] >= n) continue;
      const Point a = pts[t[0]], b = pts[t[1]], c = pts[t[2]];
      const Point ab = b - a, ac = c - a;
      const double d = 2.0 * cross(ab, ac);
      const Point cc{a.x + (ac.y * norm2(ab) - ab.y * norm2(ac)) / d, a.y + (ab.x * norm2(ac) - ac.x * norm2(ab)) / d};
      const double r = norm(cc - a) * (1.0 + 1e-9);
      if (cc.x - r < lo_x || cc.x + r > hi_x || cc.y - r < lo_y || cc.y + r > hi_y) {
        certified = false;
        break;
      }
    }
    if (certified) {
      std::vector<std::pair<std::size_t, std::size_t>> out;
      for (auto [a, b] : tri.edges) {
        if (a >= n && b >= n) continue;
        std::size_t u = origin[a], v = origin[b];
        if (u == v) throw degenerate_geometry_error("torus too small: a point is adjacent to its own image");
        if (u > v) std::swap(u, v);
        out.emplace_back(u, v);
      }
      std::sort(out.begin(), out.end());
      out.erase(std::unique(out.begin(), out.end()), out.end());
      return out;
    }
    if (margin >= w.min_side())
      throw degenerate_geometry_error("torus Delaunay not certified with full 3x3 replication; window too small");
    margin = std::min(2.0 * margin, w.min_side());
  }
}

// Superset of every proximity-graph edge: Delaunay edges, or all pairs for
// small torus samples.
inline std::vector<std::pair<std::size_t, std::size_t>> proximity_candidates(const PointSet& ps) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  const std::size_t n = ps.size();
  if (ps.window().is_torus()) {
    if (n < 64) {
      for (std::size_t u = 0; u < n; ++u)
        for (std::size_t v = u + 1; v < n; ++v) out.emplace_back(u, v);
      return out;
    }
    return torus_delaunay_pairs(ps);
  }
  for (auto e : delaunay::triangulate(ps.points()).edges) out.push_back(e);
  return out;
}

enum class Exclusion { lune, diameter_disc };

// True when no third point lies strictly inside the exclusion region of (u, v).
inline bool region_empty(const PointSet& ps, std::size_t u, std::size_t v, Exclusion ex) {
  const Window& w = ps.window();
  const Point uv = w.displacement(ps[u], ps[v]);
  const double len2 = norm2(uv);
  const double len = std::sqrt(len2);
  bool empty = true;
  ps.grid().for_box(ps[u], len, len, [&](std::size_t k) {
    if (!empty || k == u || k == v) return;
    const Point a = w.displacement(ps[u], ps[k]);  // witness relative to u
    const Point b = a - uv;                         // witness relative to v
    if (ex == Exclusion::lune) {
      const double lim = len2 * (1.0 - kEmptinessTol);
      if (norm2(a) < lim && norm2(b) < lim) empty = false;
    } else {
      if (2.0 * dot(a, b) < -kEmptinessTol * len2) empty = false;
    }
  });
  return empty;
}

inline SpatialNetwork build_proximity(std::shared_ptr<const PointSet> ps, Exclusion ex, const std::string& tag) {
  if (ps->size() < 2) throw empty_domain_error(tag + " needs at least 2 points");
  std::vector<NetEdge> edges;
  for (auto [u, v] : proximity_candidates(*ps))
    if (region_empty(*ps, u, v, ex)) edges.push_back({u, v, pair_distance(ps->window(), (*ps)[u], (*ps)[v])});
  SpatialNetwork net(std::move(ps), {}, std::move(edges), tag);
  require_connected(net);
  return net;
}

}  // namespace detail

/// Relative neighborhood graph: (u, v) is an edge iff no other point lies in
/// the open lune of u and v.
inline SpatialNetwork build_rng(std::shared_ptr<const PointSet> ps) {
  return detail::build_proximity(std::move(ps), detail::Exclusion::lune, "rng");
}
inline SpatialNetwork build_rng(const PointSet& ps) { return build_rng(std::make_shared<const PointSet>(ps)); }

/// Gabriel graph: (u, v) is an edge iff the open disc with diameter uv is empty.
inline SpatialNetwork build_gabriel(std::shared_ptr<const PointSet> ps) {
  return detail::build_proximity(std::move(ps), detail::Exclusion::diameter_disc, "gabriel");
}
inline SpatialNetwork build_gabriel(const PointSet& ps) { return build_gabriel(std::make_shared<const PointSet>(ps)); }

inline SpatialNetwork build_delaunay(std::shared_ptr<const PointSet> ps) {
  if (ps->size() < 3 || delaunay::all_collinear(ps->points()))
    throw degenerate_geometry_error("Delaunay triangulation needs 3 non-collinear points");
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  if (ps->window().is_torus()) {
    pairs = detail::torus_delaunay_pairs(*ps);
  } else {
    pairs = delaunay::triangulate(ps->points()).edges;
  }
  std::vector<NetEdge> edges;
  edges.reserve(pairs.size());
  for (auto [u, v] : pairs) edges.push_back({u, v, pair_distance(ps->window(), (*ps)[u], (*ps)[v])});
  SpatialNetwork net(std::move(ps), {}, std::move(edges), "delaunay");
  detail::require_connected(net);
  return net;
}
inline SpatialNetwork build_delaunay(const PointSet& ps) { return build_delaunay(std::make_shared<const PointSet>(ps)); }

/// Sorted positions of a Poisson line process of rate `rate` on [0, length).
inline std::vector<double> poisson_lines(double length, double rate, Engine& eng) {
  std::vector<double> lines(poisson(eng, rate * length));
  for (double& x : lines) x = uniform01(eng) * length;
  std::sort(lines.begin(), lines.end());
  lines.erase(std::unique(lines.begin(), lines.end()), lines.end());
  return lines;
}

/// Evenly spaced lines k * spacing inside [0, length).
inline std::vector<double> regular_lines(double length, double spacing, double offset = 0.0) {
  if (!(spacing > 0.0)) throw invalid_argument("line spacing must be positive");
  std::vector<double> lines;
  for (double x = offset; x < length; x = offset + spacing * static_cast<double>(lines.size())) lines.push_back(x);
  return lines;
}

namespace detail {

inline std::size_t nearest_line(const std::vector<double>& lines, double x, double side, bool periodic) {
  auto it = std::lower_bound(lines.begin(), lines.end(), x);
  std::size_t hi = static_cast<std::size_t>(it - lines.begin());
  auto gap = [&](std::size_t k) {
    const double d = std::abs(lines[k] - x);
    return periodic ? std::min(d, side - d) : d;
  };
  std::size_t best = hi < lines.size() ? hi : lines.size() - 1;
  auto consider = [&](std::size_t k) {
    const double dk = gap(k), db = gap(best);
    if (dk < db || (dk == db && k < best)) best = k;
  };
  if (hi > 0) consider(hi - 1);
  if (hi < lines.size()) consider(hi);
  if (periodic) {
    consider(0);
    consider(lines.size() - 1);
  }
  return best;
}

inline void check_lines(const std::vector<double>& lines, double side, const char* axis) {
  if (lines.empty()) throw invalid_argument(std::string("lattice needs at least one ") + axis + "-line");
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (!(lines[i] >= 0.0 && lines[i] <= side)) throw invalid_argument("lattice line outside window");
    if (i > 0 && !(lines[i] > lines[i - 1])) throw invalid_argument("lattice lines must be strictly increasing");
  }
}

}  // namespace detail

/// Grid of vertical lines at `x_lines` and horizontal lines at `y_lines`;
/// every point connects to its nearest intersection by a straight link.
inline SpatialNetwork build_lattice_net(std::shared_ptr<const PointSet> ps, const std::vector<double>& x_lines,
                                        const std::vector<double>& y_lines, std::string tag = "lattice") {
  const Window& w = ps->window();
  detail::check_lines(x_lines, w.width(), "x");
  detail::check_lines(y_lines, w.height(), "y");
  const bool periodic = w.is_torus();
  const std::size_t nx = x_lines.size(), ny = y_lines.size(), n = ps->size();
  auto node = [&](std::size_t i, std::size_t j) { return n + j * nx + i; };

  std::vector<Point> grid;
  grid.reserve(nx * ny);
  for (std::size_t j = 0; j < ny; ++j)
    for (std::size_t i = 0; i < nx; ++i) grid.push_back({x_lines[i], y_lines[j]});

  std::vector<NetEdge> edges;
  edges.reserve(2 * nx * ny + n);
  auto add_run = [&](std::size_t count, double side, const std::vector<double>& pos, auto&& vertex) {
    for (std::size_t k = 0; k + 1 < count; ++k) {
      double len = pos[k + 1] - pos[k];
      if (periodic && count == 2) len = std::min(len, side - len);
      edges.push_back({vertex(k), vertex(k + 1), len});
    }
    if (periodic && count >= 3) edges.push_back({vertex(0), vertex(count - 1), side - pos[count - 1] + pos[0]});
  };
  for (std::size_t j = 0; j < ny; ++j)
    add_run(nx, w.width(), x_lines, [&](std::size_t i) { return node(i, j); });
  for (std::size_t i = 0; i < nx; ++i)
    add_run(ny, w.height(), y_lines, [&](std::size_t j) { return node(i, j); });

  for (std::size_t p = 0; p < n; ++p) {
    const std::size_t i = detail::nearest_line(x_lines, (*ps)[p].x, w.width(), periodic);
    const std::size_t j = detail::nearest_line(y_lines, (*ps)[p].y, w.height(), periodic);
    const double len = pair_distance(w, (*ps)[p], grid[j * nx + i]);
    if (!(len > 0.0)) throw degenerate_geometry_error("point coincides with a grid intersection");
    edges.push_back({p, node(i, j), len});
  }
  SpatialNetwork net(std::move(ps), std::move(grid), std::move(edges), std::move(tag));
  detail::require_connected(net);
  return net;
}

inline SpatialNetwork build_lattice_net(const PointSet& ps, const std::vector<double>& x_lines,
                                        const std::vector<double>& y_lines) {
  return build_lattice_net(std::make_shared<const PointSet>(ps), x_lines, y_lines);
}

/// Positive i.i.d. edge-cost law.
struct CostLaw {
  enum class Kind { exponential, uniform, constant };
  Kind kind = Kind::exponential;
  double a = 1.0;  // exponential mean, uniform lower bound, or constant value
  double b = 0.0;  // uniform upper bound

  static CostLaw exponential(double mean) { return {Kind::exponential, mean, 0.0}; }
  static CostLaw uniform(double lo, double hi) { return {Kind::uniform, lo, hi}; }
  static CostLaw constant(double v) { return {Kind::constant, v, 0.0}; }

  friend bool operator==(const CostLaw&, const CostLaw&) = default;

  void validate() const {
    switch (kind) {
      case Kind::exponential:
        if (!(a > 0.0 && std::isfinite(a))) throw invalid_argument("exponential cost mean must be positive");
        break;
      case Kind::uniform:
        if (!(a > 0.0 && b > a && std::isfinite(b))) throw invalid_argument("uniform cost law needs 0 < a < b");
        break;
      case Kind::constant:
        if (!(a > 0.0 && std::isfinite(a))) throw invalid_argument("constant cost must be positive");
        break;
    }
  }

  double mean() const {
    switch (kind) {
      case Kind::exponential: return a;
      case Kind::uniform: return 0.5 * (a + b);
      case Kind::constant: return a;
    }
    return a;
  }

  double draw(Engine& eng) const {
    switch (kind) {
      case Kind::exponential: {
        double x = 0.0;
        while (!(x > 0.0)) x = shapeline::exponential(eng, a);
        return x;
      }
      case Kind::uniform: return shapeline::uniform(eng, a, b);
      case Kind::constant: return a;
    }
    return a;
  }

  std::string describe() const {
    switch (kind) {
      case Kind::exponential: return "exp(" + detail::fmt_param(a) + ")";
      case Kind::uniform: return "uniform(" + detail::fmt_param(a) + "," + detail::fmt_param(b) + ")";
      case Kind::constant: return "const(" + detail::fmt_param(a) + ")";
    }
    return "";
  }
};

struct CostRule {
  enum class Kind { euclidean, iid, power };
  Kind kind = Kind::euclidean;
  CostLaw law{};
  std::uint64_t seed = 0;
  double alpha = 1.0;

  static CostRule euclidean() { return {}; }
  static CostRule iid(CostLaw law, std::uint64_t seed) { return {Kind::iid, law, seed, 1.0}; }
  static CostRule power(double alpha) { return {Kind::power, {}, 0, alpha}; }

  friend bool operator==(const CostRule&, const CostRule&) = default;
};

/// Replaces edge lengths by costs: unchanged, i.i.d. draws (in edge order
/// from `rule.seed`), or geometric length raised to alpha.
inline SpatialNetwork apply_cost_rule(const SpatialNetwork& net, const CostRule& rule) {
  switch (rule.kind) {
    case CostRule::Kind::euclidean: return net;
    case CostRule::Kind::iid: {
      rule.law.validate();
      Engine eng = make_engine(rule.seed, stream::model, 7);
      std::vector<NetEdge> edges = net.edges();
      for (NetEdge& e : edges) e.length = rule.law.draw(eng);
      return net.with_edges(std::move(edges), net.model_tag() + "+iid:" + rule.law.describe());
    }
    case CostRule::Kind::power: {
      if (!(rule.alpha >= 1.0 && std::isfinite(rule.alpha))) throw invalid_argument("power exponent must be >= 1");
      std::vector<NetEdge> edges = net.edges();
      for (NetEdge& e : edges) e.length = std::pow(net.geometric_length(e.u, e.v), rule.alpha);
      return net.with_edges(std::move(edges), net.model_tag() + "+pow:" + detail::fmt_param(rule.alpha));
    }
  }
  return net;
}

/// Edges between all point pairs at distance <= cutoff, weighted
/// distance^alpha.
inline SpatialNetwork build_power_graph(std::shared_ptr<const PointSet> ps, double alpha, double cutoff) {
  if (ps->size() < 2) throw empty_domain_error("power model needs at least 2 points");
  if (!(alpha >= 1.0 && std::isfinite(alpha))) throw invalid_argument("power exponent must be >= 1");
  if (!(cutoff > 0.0)) throw invalid_argument("cutoff must be positive");
  const Window& w = ps->window();
  const double reach = std::min(cutoff, std::hypot(w.width(), w.height()));
  std::vector<NetEdge> edges;
  for (std::size_t u = 0; u < ps->size(); ++u) {
    ps->grid().for_box((*ps)[u], reach, reach, [&](std::size_t v) {
      if (v <= u) return;
      const double d = pair_distance(w, (*ps)[u], (*ps)[v]);
      if (d <= cutoff && d > 0.0) edges.push_back({u, v, std::pow(d, alpha)});
    });
  }
  std::string tag = "power(alpha=" + detail::fmt_param(alpha) + ",cutoff=" +
                    (std::isfinite(cutoff) ? detail::fmt_param(cutoff) : std::string("inf")) + ")";
  SpatialNetwork net(std::move(ps), {}, std::move(edges), std::move(tag));
  Adjacency adj(net.vertex_count(), net.edges());
  auto [label, sizes] = adj.components();
  if (sizes.size() > 1) {
    std::string msg = "power-model cutoff disconnects the graph; component sizes:";
    for (std::size_t s : sizes) msg += " " + std::to_string(s);
    throw disconnected_graph_error(msg, sizes);
  }
  return net;
}

/// Checks that omitted pairs could never shorten a route: for sampled pairs
/// beyond the cutoff, routed cost <= distance^alpha.
struct PowerCertificate {
  std::size_t samples_checked = 0;
  std::size_t failures = 0;
  double max_excess = 0.0;  // max of (routed - direct) / direct over failures
  bool passed() const noexcept { return failures == 0; }
};

struct PowerNetwork {
  SpatialNetwork network;
  PowerCertificate certificate;
};

inline PowerNetwork build_power_complete(std::shared_ptr<const PointSet> ps, double alpha, double cutoff,
                                         std::size_t certificate_samples = 64, std::uint64_t seed = 0) {
  SpatialNetwork net = build_power_graph(ps, alpha, cutoff);
  PowerCertificate cert;
  const Window& w = ps->window();
  const std::size_t n = ps->size();
  if (n >= 2 && certificate_samples > 0) {
    Adjacency adj(net.vertex_count(), net.edges());
    Engine eng = make_engine(seed, stream::sampling, 11);
    std::vector<double> dist;
    std::size_t attempts = 0;
    while (cert.samples_checked < certificate_samples && attempts < 64 * certificate_samples) {
      ++attempts;
      const std::size_t u = uniform_index(eng, n), v = uniform_index(eng, n);
      if (u == v) continue;
      const double d = pair_distance(w, (*ps)[u], (*ps)[v]);
      if (d <= cutoff) continue;
      const double direct = std::pow(d, alpha);
      dijkstra(adj, u, dist, direct * (1.0 + 1e-9), [&](std::size_t x) { return x == v; });
      ++cert.samples_checked;
      if (dist[v] == unreachable) {
        ++cert.failures;
        double routed = dijkstra_all(adj, u)[v];
        cert.max_excess = std::max(cert.max_excess, (routed - direct) / direct);
      }
    }
  }
  return {std::move(net), cert};
}

inline PowerNetwork build_power_complete(const PointSet& ps, double alpha, double cutoff,
                                         std::size_t certificate_samples = 64, std::uint64_t seed = 0) {
  return build_power_complete(std::make_shared<const PointSet>(ps), alpha, cutoff, certificate_samples, seed);
}

struct Band {
  double start = 0.0;
  double width = 0.0;

  friend bool operator==(const Band&, const Band&) = default;
};

inline void validate_bands(const std::vector<Band>& bands) {
  for (std::size_t k = 0; k < bands.size(); ++k) {
    if (!(bands[k].start >= 0.0 && std::isfinite(bands[k].start))) throw invalid_argument("band radius must be >= 0");
    if (!(bands[k].width > 0.0 && std::isfinite(bands[k].width))) throw invalid_argument("band width must be > 0");
    if (k > 0 && !(bands[k].start > bands[k - 1].start + bands[k - 1].width))
      throw invalid_argument("counterexample bands overlap or are not increasing");
  }
}

/// Adds a straight link between every vertex pair whose geometric distance
/// falls in one of the closed bands [start, start + width].
inline SpatialNetwork add_counterexample_links(const SpatialNetwork& net, const std::vector<Band>& bands) {
  validate_bands(bands);
  if (bands.empty()) return net;
  const double reach = bands.back().start + bands.back().width;
  const std::size_t nv = net.vertex_count();
  std::vector<Point> pos(nv);
  for (std::size_t v = 0; v < nv; ++v) pos[v] = net.position(v);
  const Window& w = net.window();
  BucketGrid grid(w, pos);

  std::vector<NetEdge> edges = net.edges();
  std::vector<NetEdge> added;
  for (std::size_t u = 0; u < nv; ++u) {
    grid.for_box(pos[u], reach, reach, [&](std::size_t v) {
      if (v <= u) return;
      const double d = pair_distance(w, pos[u], pos[v]);
      for (const Band& b : bands)
        if (d >= b.start && d <= b.start + b.width) {
          if (d > 0.0 && !net.has_edge(u, v)) added.push_back({u, v, d});
          break;
        }
    });
  }
  edges.insert(edges.end(), added.begin(), added.end());
  std::string tag = net.model_tag() + "+bands";
  for (const Band& b : bands) tag += ":" + detail::fmt_param(b.start) + "/" + detail::fmt_param(b.width);
  return net.with_edges(std::move(edges), std::move(tag));
}

}  // namespace shapeline
