#pragma once

#include <cmath>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>

namespace placemood {

inline constexpr double kEarthRadiusM = 6'371'000.0;

inline constexpr double deg2rad(double deg) { return deg * std::numbers::pi / 180.0; }
inline constexpr double rad2deg(double rad) { return rad * 180.0 / std::numbers::pi; }

/// Wraps a longitude in degrees into (-180, 180].
inline double normalize_lon(double lon) {
  double x = std::fmod(lon, 360.0);
  if (x > 180.0) x -= 360.0;
  if (x <= -180.0) x += 360.0;
  return x;
}

/// WGS84 position in degrees. Latitude in [-90, 90], longitude in (-180, 180].
struct GeoPoint {
  double lat = 0.0;
  double lon = 0.0;

  friend bool operator==(const GeoPoint&, const GeoPoint&) = default;
};

inline bool is_valid(const GeoPoint& p) {
  return std::isfinite(p.lat) && std::isfinite(p.lon) && p.lat >= -90.0 && p.lat <= 90.0 &&
         p.lon >= -180.0 && p.lon <= 180.0;
}

/// Validates ranges and normalizes the longitude. Throws std::invalid_argument.
inline GeoPoint make_geo_point(double lat, double lon) {
  GeoPoint p{lat, lon};
  if (!is_valid(p)) {
    throw std::invalid_argument("coordinate out of range: lat=" + std::to_string(lat) +
                                " lon=" + std::to_string(lon));
  }
  p.lon = normalize_lon(lon);
  return p;
}

/// Great-circle distance in meters on a sphere of radius kEarthRadiusM.
inline double haversine_m(const GeoPoint& a, const GeoPoint& b) {
  const double phi1 = deg2rad(a.lat);
  const double phi2 = deg2rad(b.lat);
  const double dphi = phi2 - phi1;
  const double dlambda = deg2rad(b.lon - a.lon);
  const double s1 = std::sin(dphi / 2.0);
  const double s2 = std::sin(dlambda / 2.0);
  double h = s1 * s1 + std::cos(phi1) * std::cos(phi2) * s2 * s2;
  if (h > 1.0) h = 1.0;
  return 2.0 * kEarthRadiusM * std::asin(std::sqrt(h));
}

struct PlanarPoint {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const PlanarPoint&, const PlanarPoint&) = default;
  friend auto operator<=>(const PlanarPoint&, const PlanarPoint&) = default;
};

/// Equirectangular projection in meters around an origin:
/// x = R * dlon * cos(lat0), y = R * dlat.
/// The map is affine in (lon, lat), so convexity and containment are preserved.
class LocalProjection {
 public:
  explicit LocalProjection(GeoPoint origin)
      : origin_(origin), cos_lat0_(std::cos(deg2rad(origin.lat))) {}

  /// Projection centered at the arithmetic centroid of the points.
  /// Longitudes are averaged relative to the first point so antimeridian-spanning
  /// sets stay contiguous.
  static LocalProjection centered_on(std::span<const GeoPoint> points) {
    if (points.empty()) return LocalProjection(GeoPoint{});
    const double ref_lon = points.front().lon;
    double sum_lat = 0.0;
    double sum_dlon = 0.0;
    for (const auto& p : points) {
      sum_lat += p.lat;
      sum_dlon += normalize_lon(p.lon - ref_lon);
    }
    const auto n = static_cast<double>(points.size());
    return LocalProjection(GeoPoint{sum_lat / n, normalize_lon(ref_lon + sum_dlon / n)});
  }

  PlanarPoint project(const GeoPoint& p) const {
    return {kEarthRadiusM * deg2rad(normalize_lon(p.lon - origin_.lon)) * cos_lat0_,
            kEarthRadiusM * deg2rad(p.lat - origin_.lat)};
  }

  const GeoPoint& origin() const { return origin_; }

 private:
  GeoPoint origin_;
  double cos_lat0_;
};

}  // namespace placemood
