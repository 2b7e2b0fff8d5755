#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <queue>
#include <span>
#include <utility>
#include <vector>

namespace shapeline {

struct NetEdge {
  std::size_t u = 0;
  std::size_t v = 0;
  double length = 0.0;

  friend bool operator==(const NetEdge&, const NetEdge&) = default;
};

inline constexpr double unreachable = std::numeric_limits<double>::infinity();

/// Compressed adjacency lists of an undirected weighted graph.
class Adjacency {
 public:
  Adjacency() = default;

  Adjacency(std::size_t vertex_count, std::span<const NetEdge> edges) : offsets_(vertex_count + 1, 0) {
    for (const NetEdge& e : edges) {
      ++offsets_[e.u + 1];
      ++offsets_[e.v + 1];
    }
    std::partial_sum(offsets_.begin(), offsets_.end(), offsets_.begin());
    targets_.resize(2 * edges.size());
    weights_.resize(2 * edges.size());
    std::vector<std::size_t> fill(offsets_.begin(), offsets_.end() - 1);
    for (const NetEdge& e : edges) {
      targets_[fill[e.u]] = static_cast<std::uint32_t>(e.v);
      weights_[fill[e.u]++] = e.length;
      targets_[fill[e.v]] = static_cast<std::uint32_t>(e.u);
      weights_[fill[e.v]++] = e.length;
    }
  }

  std::size_t vertex_count() const noexcept { return offsets_.empty() ? 0 : offsets_.size() - 1; }
  std::size_t degree(std::size_t v) const { return offsets_[v + 1] - offsets_[v]; }

  template <class F>
  void for_neighbors(std::size_t v, F&& f) const {
    for (std::size_t k = offsets_[v]; k < offsets_[v + 1]; ++k) f(static_cast<std::size_t>(targets_[k]), weights_[k]);
  }

  /// Component label per vertex (labels dense from 0) and component sizes.
  std::pair<std::vector<std::size_t>, std::vector<std::size_t>> components() const {
    const std::size_t n = vertex_count();
    std::vector<std::size_t> label(n, n);
    std::vector<std::size_t> sizes;
    std::vector<std::size_t> stack;
    for (std::size_t s = 0; s < n; ++s) {
      if (label[s] != n) continue;
      const std::size_t id = sizes.size();
      sizes.push_back(0);
      label[s] = id;
      stack.push_back(s);
      while (!stack.empty()) {
        const std::size_t v = stack.back();
        stack.pop_back();
        ++sizes[id];
        for_neighbors(v, [&](std::size_t w, double) {
          if (label[w] == n) {
            label[w] = id;
            stack.push_back(w);
          }
        });
      }
    }
    return {std::move(label), std::move(sizes)};
  }

 private:
  std::vector<std::size_t> offsets_;
  std::vector<std::uint32_t> targets_;
  std::vector<double> weights_;
};

/// Single-source shortest paths with a binary heap. Settles vertices in
/// order of distance and stops once the next distance exceeds `limit` or
/// `done()` returns true after a settle. `dist` is resized and overwritten;
/// unsettled vertices keep `unreachable`.
template <class Done>
void dijkstra(const Adjacency& adj, std::size_t source, std::vector<double>& dist, double limit, Done&& done) {
  dist.assign(adj.vertex_count(), unreachable);
  std::vector<double> tentative(adj.vertex_count(), unreachable);
  using Item = std::pair<double, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  tentative[source] = 0.0;
  heap.emplace(0.0, source);
  while (!heap.empty()) {
    const auto [d, v] = heap.top();
    heap.pop();
    if (dist[v] != unreachable || d > tentative[v]) continue;
    if (d > limit) break;
    dist[v] = d;
    if (done(v)) break;
    adj.for_neighbors(v, [&](std::size_t w, double len) {
      const double nd = d + len;
      if (nd < tentative[w]) {
        tentative[w] = nd;
        heap.emplace(nd, w);
      }
    });
  }
}

inline std::vector<double> dijkstra_all(const Adjacency& adj, std::size_t source) {
  std::vector<double> dist;
  dijkstra(adj, source, dist, unreachable, [](std::size_t) { return false; });
  return dist;
}

}  // namespace shapeline
