#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <vector>

#include "errors.hpp"
#include "geometry.hpp"
#include "random.hpp"

namespace shapeline {

/// Uniform bucket grid over a window; cell side is about one mean spacing.
class BucketGrid {
 public:
  BucketGrid() = default;

  BucketGrid(const Window& w, const std::vector<Point>& pts) : window_(w) {
    const double n = static_cast<double>(std::max<std::size_t>(pts.size(), 1));
    const double target = std::sqrt(w.area() / n);
    cols_ = static_cast<int>(std::clamp(std::floor(w.width() / target), 1.0, 4096.0));
    rows_ = static_cast<int>(std::clamp(std::floor(w.height() / target), 1.0, 4096.0));
    cell_w_ = w.width() / cols_;
    cell_h_ = w.height() / rows_;

    std::vector<std::uint32_t> count(static_cast<std::size_t>(cols_) * rows_ + 1, 0);
    std::vector<std::uint32_t> cell_of(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) {
      cell_of[i] = static_cast<std::uint32_t>(cell_index(col_of(pts[i].x), row_of(pts[i].y)));
      ++count[cell_of[i] + 1];
    }
    for (std::size_t c = 1; c < count.size(); ++c) count[c] += count[c - 1];
    start_ = count;
    items_.resize(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) items_[count[cell_of[i]]++] = static_cast<std::uint32_t>(i);
  }

  int cols() const noexcept { return cols_; }
  int rows() const noexcept { return rows_; }
  double cell_width() const noexcept { return cell_w_; }
  double cell_height() const noexcept { return cell_h_; }

  int col_of(double x) const noexcept {
    return std::clamp(static_cast<int>(std::floor(x / cell_w_)), 0, cols_ - 1);
  }
  int row_of(double y) const noexcept {
    return std::clamp(static_cast<int>(std::floor(y / cell_h_)), 0, rows_ - 1);
  }

  /// Calls f(index) for every point in cell (c, r); wraps or skips out-of-range
  /// cells depending on topology.
  template <class F>
  void for_cell(int c, int r, F&& f) const {
    if (window_.is_torus()) {
      c = ((c % cols_) + cols_) % cols_;
      r = ((r % rows_) + rows_) % rows_;
    } else if (c < 0 || c >= cols_ || r < 0 || r >= rows_) {
      return;
    }
    const std::size_t k = cell_index(c, r);
    for (std::uint32_t j = start_[k]; j < start_[k + 1]; ++j) f(static_cast<std::size_t>(items_[j]));
  }

  /// Visits every point whose cell intersects the box center +- (ex, ey).
  /// On a torus each point is visited at most once.
  template <class F>
  void for_box(Point center, double ex, double ey, F&& f) const {
    const int c0 = static_cast<int>(std::floor((center.x - ex) / cell_w_));
    const int c1 = static_cast<int>(std::floor((center.x + ex) / cell_w_));
    const int r0 = static_cast<int>(std::floor((center.y - ey) / cell_h_));
    const int r1 = static_cast<int>(std::floor((center.y + ey) / cell_h_));
    if (window_.is_torus()) {
      const int nc = std::min(c1 - c0 + 1, cols_);
      const int nr = std::min(r1 - r0 + 1, rows_);
      for (int dr = 0; dr < nr; ++dr)
        for (int dc = 0; dc < nc; ++dc) for_cell(c0 + dc, r0 + dr, f);
    } else {
      for (int r = std::max(r0, 0); r <= std::min(r1, rows_ - 1); ++r)
        for (int c = std::max(c0, 0); c <= std::min(c1, cols_ - 1); ++c) for_cell(c, r, f);
    }
  }

 private:
  std::size_t cell_index(int c, int r) const noexcept {
    return static_cast<std::size_t>(r) * static_cast<std::size_t>(cols_) + static_cast<std::size_t>(c);
  }

  Window window_{};
  int cols_ = 1;
  int rows_ = 1;
  double cell_w_ = 1.0;
  double cell_h_ = 1.0;
  std::vector<std::uint32_t> start_{0, 0};
  std::vector<std::uint32_t> items_;
};

/// One realization of the point process, possibly with planted points.
/// Immutable after construction.
class PointSet {
 public:
  PointSet() : PointSet(Window{}, {}, {}, 0) {}

  PointSet(Window window, std::vector<Point> points, std::vector<std::size_t> planted, std::uint64_t seed)
      : window_(window), points_(std::move(points)), planted_(std::move(planted)), seed_(seed) {
    for (const Point& p : points_)
      if (!window_.contains(p)) throw invalid_argument("point outside window");
    for (std::size_t i : planted_)
      if (i >= points_.size()) throw invalid_argument("planted index out of range");
    grid_ = std::make_shared<const BucketGrid>(window_, points_);
  }

  const Window& window() const noexcept { return window_; }
  const std::vector<Point>& points() const noexcept { return points_; }
  const std::vector<std::size_t>& planted() const noexcept { return planted_; }
  std::uint64_t seed() const noexcept { return seed_; }
  std::size_t size() const noexcept { return points_.size(); }
  bool empty() const noexcept { return points_.empty(); }
  const Point& operator[](std::size_t i) const { return points_[i]; }
  const BucketGrid& grid() const noexcept { return *grid_; }

  bool is_planted(std::size_t i) const {
    return std::find(planted_.begin(), planted_.end(), i) != planted_.end();
  }

  friend bool operator==(const PointSet& a, const PointSet& b) {
    return a.window_ == b.window_ && a.points_ == b.points_ && a.planted_ == b.planted_;
  }

 private:
  Window window_;
  std::vector<Point> points_;
  std::vector<std::size_t> planted_;
  std::uint64_t seed_ = 0;
  std::shared_ptr<const BucketGrid> grid_;
};

/// Homogeneous Poisson sample: N ~ Poisson(intensity * area), then N i.i.d.
/// uniform positions, all drawn from the `points` stream of `seed`.
inline PointSet sample_poisson(const Window& window, double intensity, std::uint64_t seed) {
  if (!std::isfinite(intensity) || intensity < 0.0) throw invalid_argument("intensity must be finite and >= 0");
  Engine eng = make_engine(seed, stream::points, 0);
  const std::uint64_t n = poisson(eng, intensity * window.area());
  std::vector<Point> pts;
  pts.reserve(n);
  const double xmax = std::nextafter(window.width(), 0.0);
  const double ymax = std::nextafter(window.height(), 0.0);
  for (std::uint64_t i = 0; i < n; ++i) {
    const double x = std::min(uniform01(eng) * window.width(), xmax);
    const double y = std::min(uniform01(eng) * window.height(), ymax);
    pts.push_back({x, y});
  }
  return PointSet(window, std::move(pts), {}, seed);
}

/// Appends `locations` and records their indices as planted.
inline PointSet plant_points(const PointSet& ps, const std::vector<Point>& locations) {
  for (const Point& p : locations)
    if (!ps.window().contains(p)) throw invalid_argument("planted location outside window");
  std::vector<Point> pts = ps.points();
  std::vector<std::size_t> planted = ps.planted();
  for (const Point& p : locations) {
    planted.push_back(pts.size());
    pts.push_back(p);
  }
  return PointSet(ps.window(), std::move(pts), std::move(planted), ps.seed());
}

/// Index minimizing topology-aware distance to `loc`; ties go to the smaller index.
inline std::size_t nearest_point(const PointSet& ps, Point loc) {
  if (ps.empty()) throw empty_domain_error("nearest_point on an empty point set");
  const BucketGrid& g = ps.grid();
  const Window& w = ps.window();
  const Point q = w.wrap(loc);
  const int qc = static_cast<int>(std::floor(q.x / g.cell_width()));
  const int qr = static_cast<int>(std::floor(q.y / g.cell_height()));

  double best = std::numeric_limits<double>::infinity();
  std::size_t best_i = 0;
  auto consider = [&](std::size_t i) {
    const double d = norm2(w.displacement(q, ps[i]));
    if (d < best || (d == best && i < best_i)) {
      best = d;
      best_i = i;
    }
  };
  int max_ring = std::max(g.cols(), g.rows());
  if (!w.is_torus()) max_ring += std::max(std::abs(qc), std::abs(qr)) + 1;
  const double step = std::min(g.cell_width(), g.cell_height());
  for (int ring = 0; ring <= max_ring; ++ring) {
    if (ring == 0) {
      g.for_cell(qc, qr, consider);
    } else {
      for (int c = qc - ring; c <= qc + ring; ++c) {
        g.for_cell(c, qr - ring, consider);
        g.for_cell(c, qr + ring, consider);
      }
      for (int r = qr - ring + 1; r <= qr + ring - 1; ++r) {
        g.for_cell(qc - ring, r, consider);
        g.for_cell(qc + ring, r, consider);
      }
    }
    // Every unvisited cell is at least `ring * step` away from q.
    const double reach = ring * step;
    if (best < std::numeric_limits<double>::infinity() && reach * reach > best) break;
  }
  return best_i;
}

/// Indices whose position lies in the closed region, ascending.
inline std::vector<std::size_t> points_in(const PointSet& ps, const Region& region) {
  std::vector<std::size_t> out;
  if (ps.empty()) return out;
  const Window& w = ps.window();
  ps.grid().for_box(w.wrap(region.center), region.extent_x(), region.extent_y(), [&](std::size_t i) {
    if (region.contains(w, ps[i])) out.push_back(i);
  });
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace shapeline
