#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "errors.hpp"
#include "graph.hpp"
#include "network.hpp"
#include "random.hpp"

namespace shapeline {

/// Relative tolerance for comparing route-lengths.
inline constexpr double kRouteTol = 1e-9;

/// Shortest-path oracle over an immutable network. Queries keep their working
/// memory private, so one engine may serve several threads.
class RouteEngine {
 public:
  explicit RouteEngine(SpatialNetwork net)
      : net_(std::move(net)), adj_(net_.vertex_count(), net_.edges()) {}

  const SpatialNetwork& network() const noexcept { return net_; }
  const Adjacency& adjacency() const noexcept { return adj_; }
  std::size_t vertex_count() const noexcept { return adj_.vertex_count(); }

  double route_length(std::size_t u, std::size_t v) const {
    check_vertex(u);
    check_vertex(v);
    if (u == v) return 0.0;
    std::vector<double> dist;
    dijkstra(adj_, u, dist, unreachable, [v](std::size_t x) { return x == v; });
    if (dist[v] == unreachable) throw_disconnected(u, v);
    return dist[v];
  }

  /// Distances from u to each target, from one truncated traversal.
  std::vector<double> route_lengths_from(std::size_t u, const std::vector<std::size_t>& targets) const {
    check_vertex(u);
    std::vector<char> wanted(vertex_count(), 0);
    std::size_t remaining = 0;
    for (std::size_t t : targets) {
      check_vertex(t);
      if (!wanted[t]) {
        wanted[t] = 1;
        ++remaining;
      }
    }
    std::vector<double> dist;
    if (remaining > 0)
      dijkstra(adj_, u, dist, unreachable, [&](std::size_t x) { return wanted[x] && --remaining == 0; });
    else
      dist.assign(vertex_count(), unreachable);
    std::vector<double> out;
    out.reserve(targets.size());
    for (std::size_t t : targets) {
      if (dist[t] == unreachable) throw_disconnected(u, t);
      out.push_back(dist[t]);
    }
    return out;
  }

  /// Full single-source distance vector (unreachable vertices are infinite).
  std::vector<double> distances_from(std::size_t u) const {
    check_vertex(u);
    return dijkstra_all(adj_, u);
  }

  /// Vertices at route-length at most `limit` from u, ascending.
  std::vector<std::size_t> ball(std::size_t u, double limit) const {
    check_vertex(u);
    if (!std::isfinite(limit)) throw invalid_argument("ball radius must be finite");
    std::vector<double> dist;
    dijkstra(adj_, u, dist, limit, [](std::size_t) { return false; });
    std::vector<std::size_t> out;
    for (std::size_t v = 0; v < dist.size(); ++v)
      if (dist[v] <= limit) out.push_back(v);
    return out;
  }

 private:
  void check_vertex(std::size_t v) const {
    if (v >= vertex_count()) throw invalid_argument("vertex index out of range");
  }

  [[noreturn]] void throw_disconnected(std::size_t u, std::size_t v) const {
    auto [label, sizes] = adj_.components();
    throw disconnected_graph_error("vertex " + std::to_string(v) + " (component " + std::to_string(label[v]) +
                                       ", size " + std::to_string(sizes[label[v]]) + ") unreachable from vertex " +
                                       std::to_string(u) + " (component " + std::to_string(label[u]) + ", size " +
                                       std::to_string(sizes[label[u]]) + ")",
                                   sizes);
  }

  SpatialNetwork net_;
  Adjacency adj_;
};

struct MetricViolation {
  std::size_t a = 0, b = 0, c = 0;  // c unused for pair checks
  double magnitude = 0.0;           // relative to the larger side
};

struct MetricReport {
  std::size_t samples_checked = 0;
  std::vector<MetricViolation> violations;
  double max_violation = 0.0;

  bool ok() const noexcept { return violations.empty(); }
};

namespace detail {

// Distinct random sources, reused across samples so a check costs one
// traversal per source rather than per sample.
inline std::vector<std::size_t> source_pool(std::size_t n, std::size_t want, Engine& eng) {
  std::vector<std::size_t> pool;
  if (n == 0) return pool;
  want = std::min(want, n);
  std::vector<char> used(n, 0);
  while (pool.size() < want) {
    const std::size_t v = uniform_index(eng, n);
    if (!used[v]) {
      used[v] = 1;
      pool.push_back(v);
    }
  }
  return pool;
}

}  // namespace detail

/// Samples triples (a, b, c) with a, b from a pool of random sources and c
/// uniform; reports d(a,c) > d(a,b) + d(b,c) beyond kRouteTol relative.
inline MetricReport check_triangle(const RouteEngine& eng, std::size_t n_triples, std::uint64_t seed,
                                   std::size_t pool_size = 64) {
  MetricReport rep;
  const std::size_t n = eng.vertex_count();
  if (n == 0 || n_triples == 0) return rep;
  Engine rng = make_engine(seed, stream::sampling, 1);
  const auto pool = detail::source_pool(n, pool_size, rng);
  std::vector<std::vector<double>> dist(pool.size());
  for (std::size_t k = 0; k < pool.size(); ++k) dist[k] = eng.distances_from(pool[k]);
  for (std::size_t t = 0; t < n_triples; ++t) {
    const std::size_t ia = uniform_index(rng, pool.size());
    const std::size_t ib = uniform_index(rng, pool.size());
    const std::size_t c = uniform_index(rng, n);
    const double ac = dist[ia][c], ab = dist[ia][pool[ib]], bc = dist[ib][c];
    if (ac == unreachable || ab == unreachable || bc == unreachable)
      throw disconnected_graph_error("triangle check on a disconnected network", {});
    ++rep.samples_checked;
    const double rhs = ab + bc;
    const double excess = (ac - rhs) / std::max({ac, rhs, 1e-300});
    if (excess > kRouteTol) {
      rep.violations.push_back({pool[ia], pool[ib], c, excess});
      rep.max_violation = std::max(rep.max_violation, excess);
    }
  }
  return rep;
}

/// Reports sampled pairs with d(u,v) < |u - v| beyond kRouteTol relative.
inline MetricReport check_euclid_lb(const RouteEngine& eng, std::size_t n_pairs, std::uint64_t seed,
                                    std::size_t pool_size = 64) {
  MetricReport rep;
  const std::size_t n = eng.vertex_count();
  if (n == 0 || n_pairs == 0) return rep;
  const SpatialNetwork& net = eng.network();
  Engine rng = make_engine(seed, stream::sampling, 2);
  const auto pool = detail::source_pool(n, pool_size, rng);
  std::vector<std::vector<double>> dist(pool.size());
  for (std::size_t k = 0; k < pool.size(); ++k) dist[k] = eng.distances_from(pool[k]);
  for (std::size_t t = 0; t < n_pairs; ++t) {
    const std::size_t iu = uniform_index(rng, pool.size());
    const std::size_t v = uniform_index(rng, n);
    const double d = dist[iu][v];
    if (d == unreachable) throw disconnected_graph_error("euclid check on a disconnected network", {});
    ++rep.samples_checked;
    const double e = net.geometric_length(pool[iu], v);
    const double deficit = (e - d) / std::max({e, d, 1e-300});
    if (deficit > kRouteTol) {
      rep.violations.push_back({pool[iu], v, 0, deficit});
      rep.max_violation = std::max(rep.max_violation, deficit);
    }
  }
  return rep;
}

}  // namespace shapeline
