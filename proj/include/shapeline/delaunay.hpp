#pragma once

// Delaunay triangulation by divide and conquer on a quad-edge structure
// (Guibas & Stolfi), with exact predicates.

#include <algorithm>
#include <array>
#include <cstdint>
#include <numeric>
#include <span>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "geometry.hpp"
#include "predicates.hpp"

namespace shapeline::delaunay {

using Edge = std::pair<std::size_t, std::size_t>;
using Triangle = std::array<std::size_t, 3>;

struct Triangulation {
  std::vector<Edge> edges;          // u < v, sorted
  std::vector<Triangle> triangles;  // counterclockwise vertex triples
};

namespace detail {

class QuadEdgeMesh {
 public:
  using E = std::uint32_t;

  explicit QuadEdgeMesh(std::span<const Point> pts, std::size_t reserve) : pts_(pts) {
    onext_.reserve(4 * reserve);
    org_.reserve(4 * reserve);
  }

  static E rot(E e) { return (e & ~3u) | ((e + 1) & 3u); }
  static E sym(E e) { return (e & ~3u) | ((e + 2) & 3u); }
  static E invrot(E e) { return (e & ~3u) | ((e + 3) & 3u); }

  E onext(E e) const { return onext_[e]; }
  E oprev(E e) const { return rot(onext(rot(e))); }
  E lnext(E e) const { return rot(onext(invrot(e))); }
  E rprev(E e) const { return onext(sym(e)); }
  std::uint32_t org(E e) const { return org_[e]; }
  std::uint32_t dest(E e) const { return org_[sym(e)]; }
  bool alive(E e) const { return alive_[e >> 2]; }
  std::size_t quad_count() const { return alive_.size(); }

  E make_edge(std::uint32_t a, std::uint32_t b) {
    const E e = static_cast<E>(onext_.size());
    onext_.insert(onext_.end(), {e, e + 3, e + 2, e + 1});
    org_.insert(org_.end(), {a, 0, b, 0});
    alive_.push_back(true);
    return e;
  }

  void splice(E a, E b) {
    const E alpha = rot(onext(a));
    const E beta = rot(onext(b));
    std::swap(onext_[a], onext_[b]);
    std::swap(onext_[alpha], onext_[beta]);
  }

  E connect(E a, E b) {
    const E e = make_edge(dest(a), org(b));
    splice(e, lnext(a));
    splice(sym(e), b);
    return e;
  }

  void remove(E e) {
    splice(e, oprev(e));
    splice(sym(e), oprev(sym(e)));
    alive_[e >> 2] = false;
  }

  const Point& at(std::uint32_t v) const { return pts_[v]; }

  bool ccw(std::uint32_t a, std::uint32_t b, std::uint32_t c) const {
    return predicates::orient(at(a), at(b), at(c)) > 0;
  }
  bool rightof(std::uint32_t x, E e) const { return ccw(x, dest(e), org(e)); }
  bool leftof(std::uint32_t x, E e) const { return ccw(x, org(e), dest(e)); }
  bool in_circle(std::uint32_t a, std::uint32_t b, std::uint32_t c, std::uint32_t d) const {
    return predicates::incircle(at(a), at(b), at(c), at(d)) > 0;
  }

  // Triangulates order[lo, hi); returns the (ccw hull edge out of leftmost,
  // cw hull edge out of rightmost) pair.
  std::pair<E, E> build(const std::vector<std::uint32_t>& order, std::size_t lo, std::size_t hi) {
    const std::size_t n = hi - lo;
    if (n == 2) {
      const E a = make_edge(order[lo], order[lo + 1]);
      return {a, sym(a)};
    }
    if (n == 3) {
      const std::uint32_t s1 = order[lo], s2 = order[lo + 1], s3 = order[lo + 2];
      const E a = make_edge(s1, s2);
      const E b = make_edge(s2, s3);
      splice(sym(a), b);
      if (ccw(s1, s2, s3)) {
        connect(b, a);
        return {a, sym(b)};
      }
      if (ccw(s1, s3, s2)) {
        const E c = connect(b, a);
        return {sym(c), c};
      }
      return {a, sym(b)};
    }
    const std::size_t mid = lo + n / 2;
    auto [ldo, ldi] = build(order, lo, mid);
    auto [rdi, rdo] = build(order, mid, hi);

    for (;;) {
      if (leftof(org(rdi), ldi)) {
        ldi = lnext(ldi);
      } else if (rightof(org(ldi), rdi)) {
        rdi = rprev(rdi);
      } else {
        break;
      }
    }
    E basel = connect(sym(rdi), ldi);
    if (org(ldi) == org(ldo)) ldo = sym(basel);
    if (org(rdi) == org(rdo)) rdo = basel;

    auto valid = [&](E e) { return rightof(dest(e), basel); };
    for (;;) {
      E lcand = onext(sym(basel));
      if (valid(lcand)) {
        while (in_circle(dest(basel), org(basel), dest(lcand), dest(onext(lcand)))) {
          const E t = onext(lcand);
          remove(lcand);
          lcand = t;
        }
      }
      E rcand = oprev(basel);
      if (valid(rcand)) {
        while (in_circle(dest(basel), org(basel), dest(rcand), dest(oprev(rcand)))) {
          const E t = oprev(rcand);
          remove(rcand);
          rcand = t;
        }
      }
      const bool lv = valid(lcand);
      const bool rv = valid(rcand);
      if (!lv && !rv) break;
      if (!lv || (rv && in_circle(dest(lcand), org(lcand), org(rcand), dest(rcand)))) {
        basel = connect(rcand, sym(basel));
      } else {
        basel = connect(sym(basel), sym(lcand));
      }
    }
    return {ldo, rdo};
  }

 private:
  std::span<const Point> pts_;
  std::vector<E> onext_;
  std::vector<std::uint32_t> org_;
  std::vector<bool> alive_;
};

}  // namespace detail

/// Delaunay triangulation of distinct points. Collinear inputs yield the
/// path through the sorted points and no triangles.
inline Triangulation triangulate(std::span<const Point> pts, bool want_triangles = false) {
  Triangulation out;
  const std::size_t n = pts.size();
  if (n < 2) return out;
  std::vector<std::uint32_t> order(n);
  std::iota(order.begin(), order.end(), 0u);
  std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
    return pts[a].x < pts[b].x || (pts[a].x == pts[b].x && pts[a].y < pts[b].y);
  });
  for (std::size_t i = 1; i < n; ++i)
    if (pts[order[i]] == pts[order[i - 1]]) throw degenerate_geometry_error("duplicate points in triangulation input");

  detail::QuadEdgeMesh mesh(pts, 3 * n);
  mesh.build(order, 0, n);

  using E = detail::QuadEdgeMesh::E;
  for (std::size_t q = 0; q < mesh.quad_count(); ++q) {
    const E e = static_cast<E>(4 * q);
    if (!mesh.alive(e)) continue;
    std::size_t u = mesh.org(e), v = mesh.dest(e);
    if (u > v) std::swap(u, v);
    out.edges.emplace_back(u, v);
  }
  std::sort(out.edges.begin(), out.edges.end());

  if (want_triangles) {
    for (std::size_t q = 0; q < mesh.quad_count(); ++q) {
      for (E side : {E(4 * q), E(4 * q + 2)}) {
        if (!mesh.alive(side)) continue;
        const E e1 = mesh.lnext(side);
        const E e2 = mesh.lnext(e1);
        if (mesh.lnext(e2) != side) continue;
        const std::uint32_t a = mesh.org(side), b = mesh.org(e1), c = mesh.org(e2);
        // report each face once, from its smallest vertex
        if (a > b || a > c) continue;
        if (predicates::orient(pts[a], pts[b], pts[c]) <= 0) continue;  // outer face of 3 hull points
        out.triangles.push_back({a, b, c});
      }
    }
    std::sort(out.triangles.begin(), out.triangles.end());
  }
  return out;
}

/// True when every point lies on one line.
inline bool all_collinear(std::span<const Point> pts) {
  if (pts.size() < 3) return true;
  const Point a = pts[0];
  std::size_t j = 1;
  while (j < pts.size() && pts[j] == a) ++j;
  if (j == pts.size()) return true;
  const Point b = pts[j];
  for (std::size_t k = j + 1; k < pts.size(); ++k)
    if (predicates::orient(a, b, pts[k]) != 0) return false;
  return true;
}

}  // namespace shapeline::delaunay
