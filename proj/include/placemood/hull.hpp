#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <vector>

#include "placemood/error.hpp"
#include "placemood/geo.hpp"

namespace placemood {

/// Twice the signed area of triangle (o, a, b); positive for a counter-clockwise turn.
inline double cross(const PlanarPoint& o, const PlanarPoint& a, const PlanarPoint& b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

/// Andrew's monotone chain. Returns indices into `points` of the hull vertices in
/// counter-clockwise order starting from the lowest-x (then lowest-y) point.
/// Collinear boundary points are not retained. Duplicate coordinates collapse to
/// the first occurrence.
inline std::vector<std::size_t> convex_hull_indices(std::span<const PlanarPoint> points) {
  std::vector<std::size_t> order(points.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return points[a] < points[b]; });
  order.erase(std::unique(order.begin(), order.end(),
                          [&](std::size_t a, std::size_t b) { return points[a] == points[b]; }),
              order.end());
  if (order.size() < 3) {
    throw DegenerateGeometry("fewer than 3 distinct points");
  }

  const std::size_t n = order.size();
  std::vector<std::size_t> hull(2 * n);
  std::size_t k = 0;
  for (std::size_t i = 0; i < n; ++i) {
    while (k >= 2 && cross(points[hull[k - 2]], points[hull[k - 1]], points[order[i]]) <= 0.0) --k;
    hull[k++] = order[i];
  }
  for (std::size_t i = n - 1, lower = k + 1; i > 0; --i) {
    while (k >= lower && cross(points[hull[k - 2]], points[hull[k - 1]], points[order[i - 1]]) <= 0.0)
      --k;
    hull[k++] = order[i - 1];
  }
  hull.resize(k - 1);
  if (hull.size() < 3) {
    throw DegenerateGeometry("all points are collinear");
  }
  return hull;
}

/// Convex hull as a counter-clockwise polygon. Throws DegenerateGeometry.
inline std::vector<PlanarPoint> convex_hull(std::span<const PlanarPoint> points) {
  std::vector<PlanarPoint> out;
  for (std::size_t i : convex_hull_indices(points)) out.push_back(points[i]);
  return out;
}

/// Signed shoelace area; positive for counter-clockwise rings.
inline double polygon_area(std::span<const PlanarPoint> ring) {
  double twice = 0.0;
  for (std::size_t i = 0; i < ring.size(); ++i) {
    const auto& p = ring[i];
    const auto& q = ring[(i + 1) % ring.size()];
    twice += p.x * q.y - q.x * p.y;
  }
  return twice / 2.0;
}

/// Boundary-inclusive containment test for a counter-clockwise convex ring.
/// `tolerance` is a distance in the ring's units.
inline bool point_in_convex_polygon(const PlanarPoint& p, std::span<const PlanarPoint> ring,
                                    double tolerance = 1e-9) {
  if (ring.size() < 3) return false;
  for (std::size_t i = 0; i < ring.size(); ++i) {
    const auto& a = ring[i];
    const auto& b = ring[(i + 1) % ring.size()];
    const double len = std::hypot(b.x - a.x, b.y - a.y);
    if (len == 0.0) continue;
    if (cross(a, b, p) / len < -tolerance) return false;
  }
  return true;
}

}  // namespace placemood
