#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <string_view>

#include "errors.hpp"

namespace shapeline {

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

inline Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
inline Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
inline Point operator*(double s, Point a) { return {s * a.x, s * a.y}; }
inline double dot(Point a, Point b) { return a.x * b.x + a.y * b.y; }
inline double cross(Point a, Point b) { return a.x * b.y - a.y * b.x; }
inline double norm2(Point a) { return dot(a, a); }
inline double norm(Point a) { return std::hypot(a.x, a.y); }

enum class Topology { plane, torus };

inline std::string_view to_string(Topology t) { return t == Topology::plane ? "plane" : "torus"; }

inline Topology topology_from_string(std::string_view s) {
  if (s == "plane") return Topology::plane;
  if (s == "torus") return Topology::torus;
  throw invalid_argument("unknown topology '" + std::string(s) + "'");
}

/// Simulation region [0,width) x [0,height), optionally with periodic wrap.
class Window {
 public:
  Window() = default;
  Window(double width, double height, Topology topology = Topology::torus)
      : width_(width), height_(height), topology_(topology) {
    if (!(std::isfinite(width) && std::isfinite(height) && width > 0.0 && height > 0.0))
      throw invalid_argument("window sides must be finite and positive");
  }

  double width() const noexcept { return width_; }
  double height() const noexcept { return height_; }
  Topology topology() const noexcept { return topology_; }
  bool is_torus() const noexcept { return topology_ == Topology::torus; }
  double area() const noexcept { return width_ * height_; }
  double min_side() const noexcept { return std::min(width_, height_); }
  Point center() const noexcept { return {0.5 * width_, 0.5 * height_}; }

  /// Plane windows are closed; torus windows are half-open.
  bool contains(Point p) const noexcept {
    if (!(std::isfinite(p.x) && std::isfinite(p.y))) return false;
    if (is_torus()) return p.x >= 0.0 && p.x < width_ && p.y >= 0.0 && p.y < height_;
    return p.x >= 0.0 && p.x <= width_ && p.y >= 0.0 && p.y <= height_;
  }

  /// Maps any point into the window (torus) or returns it unchanged (plane).
  Point wrap(Point p) const noexcept {
    if (!is_torus()) return p;
    return {wrap_coord(p.x, width_), wrap_coord(p.y, height_)};
  }

  /// Shortest displacement b - a, using the nearest periodic image on a torus.
  Point displacement(Point a, Point b) const noexcept {
    Point d = b - a;
    if (is_torus()) {
      d.x = nearest_image(d.x, width_);
      d.y = nearest_image(d.y, height_);
    }
    return d;
  }

  friend bool operator==(const Window&, const Window&) = default;

 private:
  static double wrap_coord(double v, double side) noexcept {
    double r = std::fmod(v, side);
    if (r < 0.0) r += side;
    if (r >= side) r = std::nextafter(side, 0.0);
    return r;
  }
  static double nearest_image(double d, double side) noexcept {
    if (d > 0.5 * side) return d - side;
    if (d < -0.5 * side) return d + side;
    return d;
  }

  double width_ = 1.0;
  double height_ = 1.0;
  Topology topology_ = Topology::torus;
};

/// Euclidean distance on the plane; minimum over periodic images on a torus.
inline double pair_distance(const Window& w, Point a, Point b) { return norm(w.displacement(a, b)); }

/// Point at polar offset (r, theta) from `origin`, wrapped into a torus window.
inline Point polar_point(const Window& w, Point origin, double r, double theta) {
  return w.wrap({origin.x + r * std::cos(theta), origin.y + r * std::sin(theta)});
}

/// Closed axis rectangle or closed disc around a center.
struct Region {
  enum class Shape { rectangle, disc };

  Shape shape = Shape::rectangle;
  Point center{};
  double half_width = 0.5;   // rectangle
  double half_height = 0.5;  // rectangle
  double radius = 0.0;       // disc

  static Region rectangle(Point c, double hw, double hh) {
    if (!(hw > 0.0 && hh > 0.0 && std::isfinite(hw) && std::isfinite(hh)))
      throw invalid_argument("rectangle half-widths must be positive");
    return {Shape::rectangle, c, hw, hh, 0.0};
  }
  static Region square(Point c, double side) { return rectangle(c, 0.5 * side, 0.5 * side); }
  static Region disc(Point c, double r) {
    if (!(r > 0.0 && std::isfinite(r))) throw invalid_argument("disc radius must be positive");
    return {Shape::disc, c, 0.0, 0.0, r};
  }

  friend bool operator==(const Region&, const Region&) = default;

  Region translated_to(Point c) const {
    Region out = *this;
    out.center = c;
    return out;
  }

  /// Half extents of the bounding box.
  double extent_x() const noexcept { return shape == Shape::disc ? radius : half_width; }
  double extent_y() const noexcept { return shape == Shape::disc ? radius : half_height; }

  double area() const noexcept {
    return shape == Shape::disc ? std::numbers::pi * radius * radius : 4.0 * half_width * half_height;
  }

  /// Membership for a displacement from the center.
  bool contains_offset(Point d) const noexcept {
    if (shape == Shape::disc) return norm2(d) <= radius * radius;
    return std::abs(d.x) <= half_width && std::abs(d.y) <= half_height;
  }

  bool contains(const Window& w, Point p) const noexcept {
    return contains_offset(w.displacement(center, p));
  }
};

}  // namespace shapeline
