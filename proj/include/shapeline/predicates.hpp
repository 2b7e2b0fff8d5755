#pragma once

// Orientation and in-circle tests with a floating-point filter and an exact
// rational fallback for the (rare) inputs the filter cannot decide.

#include <cmath>

#include <boost/multiprecision/cpp_int.hpp>

#include "geometry.hpp"

namespace shapeline::predicates {

namespace detail {

using Exact = boost::multiprecision::cpp_rational;

inline int sign_of(const Exact& v) { return v > 0 ? 1 : (v < 0 ? -1 : 0); }

inline int orient_exact(Point a, Point b, Point c) {
  const Exact ax(a.x), ay(a.y), bx(b.x), by(b.y), cx(c.x), cy(c.y);
  return sign_of((ax - cx) * (by - cy) - (ay - cy) * (bx - cx));
}

inline int incircle_exact(Point a, Point b, Point c, Point d) {
  const Exact dx(d.x), dy(d.y);
  const Exact adx = Exact(a.x) - dx, ady = Exact(a.y) - dy;
  const Exact bdx = Exact(b.x) - dx, bdy = Exact(b.y) - dy;
  const Exact cdx = Exact(c.x) - dx, cdy = Exact(c.y) - dy;
  const Exact alift = adx * adx + ady * ady;
  const Exact blift = bdx * bdx + bdy * bdy;
  const Exact clift = cdx * cdx + cdy * cdy;
  return sign_of(alift * (bdx * cdy - bdy * cdx) + blift * (cdx * ady - cdy * adx) +
                 clift * (adx * bdy - ady * bdx));
}

}  // namespace detail

/// +1 if a, b, c turn counterclockwise, -1 clockwise, 0 collinear.
inline int orient(Point a, Point b, Point c) {
  const double detleft = (a.x - c.x) * (b.y - c.y);
  const double detright = (a.y - c.y) * (b.x - c.x);
  const double det = detleft - detright;
  const double bound = 3.3306690738754716e-16 * (std::abs(detleft) + std::abs(detright));
  if (det > bound) return 1;
  if (-det > bound) return -1;
  return detail::orient_exact(a, b, c);
}

/// For counterclockwise a, b, c: +1 if d is strictly inside their
/// circumcircle, -1 if strictly outside, 0 if cocircular.
inline int incircle(Point a, Point b, Point c, Point d) {
  const double adx = a.x - d.x, ady = a.y - d.y;
  const double bdx = b.x - d.x, bdy = b.y - d.y;
  const double cdx = c.x - d.x, cdy = c.y - d.y;
  const double bdxcdy = bdx * cdy, cdxbdy = cdx * bdy;
  const double cdxady = cdx * ady, adxcdy = adx * cdy;
  const double adxbdy = adx * bdy, bdxady = bdx * ady;
  const double alift = adx * adx + ady * ady;
  const double blift = bdx * bdx + bdy * bdy;
  const double clift = cdx * cdx + cdy * cdy;
  const double det = alift * (bdxcdy - cdxbdy) + blift * (cdxady - adxcdy) + clift * (adxbdy - bdxady);
  const double permanent = (std::abs(bdxcdy) + std::abs(cdxbdy)) * alift +
                           (std::abs(cdxady) + std::abs(adxcdy)) * blift +
                           (std::abs(adxbdy) + std::abs(bdxady)) * clift;
  const double bound = 1.1102230246251577e-15 * permanent;
  if (det > bound) return 1;
  if (-det > bound) return -1;
  return detail::incircle_exact(a, b, c, d);
}

}  // namespace shapeline::predicates
