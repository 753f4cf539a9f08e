#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "placemood/dbscan.hpp"
#include "placemood/error.hpp"
#include "placemood/geo.hpp"
#include "placemood/hull.hpp"

namespace placemood {

/// DBSCAN settings for place construction. The density threshold is a share of
/// the site's photo count with an absolute floor.
struct ClusterParams {
  double eps_m = 100.0;
  double min_pts_pct = 0.01;
  std::size_t min_pts_floor = 3;

  void validate() const {
    if (!(eps_m > 0.0) || !std::isfinite(eps_m)) {
      throw std::invalid_argument("eps_m must be > 0");
    }
    if (!(min_pts_pct > 0.0 && min_pts_pct <= 1.0)) {
      throw std::invalid_argument("min_pts_pct must be in (0, 1]");
    }
    if (min_pts_floor < 3) throw std::invalid_argument("min_pts_floor must be >= 3");
  }

  /// max(floor, ceil(pct * n))
  std::size_t min_pts_for(std::size_t n_points) const {
    // Guard against 0.01 * 300 evaluating to 3.0000000000000004.
    const double raw = min_pts_pct * static_cast<double>(n_points);
    const auto scaled = static_cast<std::size_t>(std::ceil(raw - 1e-9 * std::max(1.0, raw)));
    return std::max(min_pts_floor, scaled);
  }

  friend bool operator==(const ClusterParams&, const ClusterParams&) = default;
};

/// Convex footprint part; counter-clockwise, open ring (first vertex not repeated).
struct FootprintPolygon {
  std::vector<GeoPoint> ring;

  friend bool operator==(const FootprintPolygon&, const FootprintPolygon&) = default;
};

struct Place {
  std::string site_id;
  std::vector<FootprintPolygon> footprint;
  std::vector<GeoPoint> member_points;
  std::vector<std::size_t> member_indices;  // positions in the construction input
  ClusterParams params_used;

  friend bool operator==(const Place&, const Place&) = default;
};

/// Projection used to test containment against one footprint part. Centered on the
/// vertex mean so it can be recomputed from the ring alone (e.g. after GeoJSON I/O).
inline LocalProjection polygon_projection(const FootprintPolygon& polygon) {
  return LocalProjection::centered_on(polygon.ring);
}

inline constexpr double kFootprintToleranceM = 1e-6;

inline bool point_in_polygon(const GeoPoint& p, const FootprintPolygon& polygon) {
  const auto proj = polygon_projection(polygon);
  std::vector<PlanarPoint> ring;
  ring.reserve(polygon.ring.size());
  for (const auto& v : polygon.ring) ring.push_back(proj.project(v));
  return point_in_convex_polygon(proj.project(p), ring, kFootprintToleranceM);
}

/// Boundary-inclusive test against every footprint part.
inline bool point_in_footprint(const GeoPoint& p, const Place& place) {
  return std::any_of(place.footprint.begin(), place.footprint.end(),
                     [&](const FootprintPolygon& poly) { return point_in_polygon(p, poly); });
}

/// Precomputed planar rings for repeated containment queries against one place.
class FootprintTester {
 public:
  explicit FootprintTester(const Place& place) {
    for (const auto& poly : place.footprint) {
      Part part{polygon_projection(poly), {}, 0, 0, 0, 0};
      for (const auto& v : poly.ring) part.ring.push_back(part.proj.project(v));
      auto [xmin, xmax] = std::minmax_element(part.ring.begin(), part.ring.end(),
                                              [](auto& a, auto& b) { return a.x < b.x; });
      auto [ymin, ymax] = std::minmax_element(part.ring.begin(), part.ring.end(),
                                              [](auto& a, auto& b) { return a.y < b.y; });
      part.xmin = xmin->x;
      part.xmax = xmax->x;
      part.ymin = ymin->y;
      part.ymax = ymax->y;
      parts_.push_back(std::move(part));
    }
  }

  bool contains(const GeoPoint& p) const {
    for (const auto& part : parts_) {
      const auto q = part.proj.project(p);
      const double t = kFootprintToleranceM;
      if (q.x < part.xmin - t || q.x > part.xmax + t || q.y < part.ymin - t || q.y > part.ymax + t)
        continue;
      if (point_in_convex_polygon(q, part.ring, t)) return true;
    }
    return false;
  }

 private:
  struct Part {
    LocalProjection proj;
    std::vector<PlanarPoint> ring;
    double xmin, xmax, ymin, ymax;
  };
  std::vector<Part> parts_;
};

/// Clusters the photo points of one site and wraps every non-degenerate cluster in
/// its convex hull. Throws InsufficientData when there are fewer points than the
/// floor, EmptyPlace when no cluster yields a polygon.
inline Place construct_place(std::string site_id, std::span<const GeoPoint> photo_points,
                             const ClusterParams& params) {
  params.validate();
  if (photo_points.size() < params.min_pts_floor) {
    throw InsufficientData("site " + site_id + " has " + std::to_string(photo_points.size()) +
                           " photo points, fewer than the floor of " +
                           std::to_string(params.min_pts_floor));
  }
  const std::size_t min_pts = params.min_pts_for(photo_points.size());
  const auto assignment = dbscan(photo_points, params.eps_m, min_pts);

  std::vector<std::vector<std::size_t>> clusters(static_cast<std::size_t>(assignment.cluster_count));
  for (std::size_t i = 0; i < assignment.labels.size(); ++i) {
    if (assignment.labels[i] >= 0) clusters[static_cast<std::size_t>(assignment.labels[i])].push_back(i);
  }

  Place place;
  place.site_id = std::move(site_id);
  place.params_used = params;
  for (const auto& members : clusters) {
    std::vector<GeoPoint> pts;
    pts.reserve(members.size());
    for (std::size_t i : members) pts.push_back(photo_points[i]);
    const auto proj = LocalProjection::centered_on(pts);
    std::vector<PlanarPoint> planar;
    planar.reserve(pts.size());
    for (const auto& p : pts) planar.push_back(proj.project(p));

    std::vector<std::size_t> hull;
    try {
      hull = convex_hull_indices(planar);
    } catch (const DegenerateGeometry&) {
      continue;  // collinear or coincident cluster
    }
    FootprintPolygon poly;
    for (std::size_t h : hull) poly.ring.push_back(pts[h]);
    place.footprint.push_back(std::move(poly));
    place.member_indices.insert(place.member_indices.end(), members.begin(), members.end());
  }
  if (place.footprint.empty()) {
    throw EmptyPlace("site " + place.site_id + ": no cluster at eps=" +
                     std::to_string(params.eps_m) + " m, min_pts=" + std::to_string(min_pts));
  }
  std::sort(place.member_indices.begin(), place.member_indices.end());
  for (std::size_t i : place.member_indices) place.member_points.push_back(photo_points[i]);
  return place;
}

}  // namespace placemood
