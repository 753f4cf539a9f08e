#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <numbers>
#include <span>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "placemood/geo.hpp"

namespace placemood {

struct ClusterAssignment {
  static constexpr int kNoise = -1;

  std::vector<int> labels;  // cluster id in [0, cluster_count) or kNoise
  int cluster_count = 0;

  std::size_t noise_count() const {
    return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), kNoise));
  }
};

namespace detail {

/// Radius-query index over geographic points using a lat/lon grid whose cell sizes
/// bound the haversine neighborhood from outside. Candidates are confirmed with the
/// same arithmetic as haversine_m so results agree with it bit-for-bit.
class GeoNeighborIndex {
 public:
  GeoNeighborIndex(std::span<const GeoPoint> points, double eps_m)
      : points_(points), eps_m_(eps_m) {
    phi_.reserve(points.size());
    cos_phi_.reserve(points.size());
    double cos_min = 1.0;
    for (const auto& p : points) {
      phi_.push_back(deg2rad(p.lat));
      cos_phi_.push_back(std::cos(deg2rad(p.lat)));
      cos_min = std::min(cos_min, cos_phi_.back());
    }
    const double s = std::sin(eps_m / (2.0 * kEarthRadiusM));
    h_threshold_ = s * s;

    const double angle = eps_m / kEarthRadiusM;
    lat_cell_ = std::min(angle * 1.001, std::numbers::pi);
    // hav(dlon) <= hav(eps/R) / (cos(phi1) cos(phi2)) for any neighbor pair.
    double lon_bound = std::numbers::pi;
    if (cos_min > 1e-6) {
      const double ratio = s / cos_min;
      if (ratio < 1.0) lon_bound = 2.0 * std::asin(ratio) * 1.001;
    }
    lon_cells_ = std::max<std::int64_t>(1, static_cast<std::int64_t>(
                                               std::floor(2.0 * std::numbers::pi / lon_bound)));
    lon_cell_ = 2.0 * std::numbers::pi / static_cast<double>(lon_cells_);

    for (std::size_t i = 0; i < points.size(); ++i) {
      cells_[key(lat_cell_of(i), lon_cell_of(i))].push_back(i);
    }
  }

  /// Indices j (ascending, including i) with haversine_m(points[i], points[j]) <= eps_m.
  std::vector<std::size_t> neighbors(std::size_t i) const {
    std::vector<std::size_t> out;
    const std::int64_t la = lat_cell_of(i);
    const std::int64_t lo = lon_cell_of(i);
    const std::int64_t span = lon_cells_ >= 3 ? 1 : 0;
    for (std::int64_t dla = -1; dla <= 1; ++dla) {
      if (span == 0) {
        // Few longitude cells: every cell in the row is adjacent.
        for (std::int64_t c = 0; c < lon_cells_; ++c) scan(i, key(la + dla, c), out);
        continue;
      }
      for (std::int64_t dlo = -1; dlo <= 1; ++dlo) {
        const std::int64_t c = ((lo + dlo) % lon_cells_ + lon_cells_) % lon_cells_;
        scan(i, key(la + dla, c), out);
      }
    }
    std::sort(out.begin(), out.end());
    return out;
  }

 private:
  static std::int64_t key(std::int64_t lat_cell, std::int64_t lon_cell) {
    return lat_cell * 1'000'003 + lon_cell;
  }
  std::int64_t lat_cell_of(std::size_t i) const {
    return static_cast<std::int64_t>(std::floor(phi_[i] / lat_cell_));
  }
  std::int64_t lon_cell_of(std::size_t i) const {
    const double lambda = deg2rad(points_[i].lon) + std::numbers::pi;
    auto c = static_cast<std::int64_t>(std::floor(lambda / lon_cell_));
    return std::clamp<std::int64_t>(c, 0, lon_cells_ - 1);
  }

  void scan(std::size_t i, std::int64_t k, std::vector<std::size_t>& out) const {
    auto it = cells_.find(k);
    if (it == cells_.end()) return;
    for (std::size_t j : it->second) {
      if (within(i, j)) out.push_back(j);
    }
  }

  bool within(std::size_t i, std::size_t j) const {
    const double s1 = std::sin((phi_[j] - phi_[i]) / 2.0);
    const double s2 = std::sin(deg2rad(points_[j].lon - points_[i].lon) / 2.0);
    double h = s1 * s1 + cos_phi_[i] * cos_phi_[j] * s2 * s2;
    if (std::abs(h - h_threshold_) > 1e-9 * h_threshold_) return h < h_threshold_;
    if (h > 1.0) h = 1.0;
    return 2.0 * kEarthRadiusM * std::asin(std::sqrt(h)) <= eps_m_;
  }

  std::span<const GeoPoint> points_;
  double eps_m_;
  double h_threshold_ = 0.0;
  double lat_cell_ = 0.0;
  double lon_cell_ = 0.0;
  std::int64_t lon_cells_ = 1;
  std::vector<double> phi_;
  std::vector<double> cos_phi_;
  std::unordered_map<std::int64_t, std::vector<std::size_t>> cells_;
};

}  // namespace detail

/// DBSCAN under haversine distance. A point is core when at least `min_pts`
/// points (itself included) lie within `eps_m`. Points are visited in input order
/// and clusters are grown breadth-first, so a border point reachable from several
/// clusters joins the one with the lowest id.
inline ClusterAssignment dbscan(std::span<const GeoPoint> points, double eps_m,
                                std::size_t min_pts) {
  if (!(eps_m > 0.0)) throw std::invalid_argument("dbscan: eps_m must be > 0");
  if (min_pts < 1) throw std::invalid_argument("dbscan: min_pts must be >= 1");

  constexpr int kUnvisited = -2;
  ClusterAssignment out;
  out.labels.assign(points.size(), kUnvisited);
  if (points.empty()) return out;

  const detail::GeoNeighborIndex index(points, eps_m);
  std::deque<std::size_t> frontier;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (out.labels[i] != kUnvisited) continue;
    const auto seeds = index.neighbors(i);
    if (seeds.size() < min_pts) {
      out.labels[i] = ClusterAssignment::kNoise;
      continue;
    }
    const int id = out.cluster_count++;
    out.labels[i] = id;
    auto claim = [&](std::span<const std::size_t> reached) {
      for (std::size_t q : reached) {
        if (out.labels[q] == ClusterAssignment::kNoise) {
          out.labels[q] = id;  // border point, never expanded
        } else if (out.labels[q] == kUnvisited) {
          out.labels[q] = id;
          frontier.push_back(q);
        }
      }
    };
    claim(seeds);
    while (!frontier.empty()) {
      const std::size_t q = frontier.front();
      frontier.pop_front();
      const auto more = index.neighbors(q);
      if (more.size() >= min_pts) claim(more);
    }
  }
  return out;
}

}  // namespace placemood
