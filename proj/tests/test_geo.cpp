#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>

#include "oracles.hpp"
#include "placemood/dbscan.hpp"
#include "placemood/geo.hpp"
#include "placemood/hull.hpp"
#include "placemood/place.hpp"

using namespace placemood;

namespace {

std::vector<GeoPoint> ring_of(const GeoPoint& c, std::size_t n, double radius_m, Rng& rng) {
  std::vector<GeoPoint> pts;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = radius_m * std::sqrt(rng.uniform());
    const double t = rng.uniform(0.0, 2.0 * std::numbers::pi);
    pts.push_back({c.lat + rad2deg(r * std::sin(t) / kEarthRadiusM),
                   c.lon + rad2deg(r * std::cos(t) / (kEarthRadiusM * std::cos(deg2rad(c.lat))))});
  }
  return pts;
}

}  // namespace

// ---------------------------------------------------------------------------
// haversine

TEST(Haversine, IdenticalPointsAreZero) { EXPECT_EQ(haversine_m({10, 20}, {10, 20}), 0.0); }

TEST(Haversine, OneDegreeOfEquator) {
  // R * pi / 180
  EXPECT_NEAR(haversine_m({0, 0}, {0, 1}), 111195.0, 1.0);
  EXPECT_NEAR(haversine_m({0, 0}, {0, 1}), kEarthRadiusM * std::numbers::pi / 180.0, 1e-6);
}

TEST(Haversine, HalfCircumference) {
  EXPECT_NEAR(haversine_m({0, 0}, {0, 180}), 20015087.0, 10.0);
  EXPECT_NEAR(haversine_m({90, 0}, {-90, 0}), kEarthRadiusM * std::numbers::pi, 1e-6);
}

TEST(Haversine, SymmetricNonNegativeAcrossAntimeridian) {
  Rng rng(11);
  for (int i = 0; i < 1000; ++i) {
    GeoPoint a{rng.uniform(-90, 90), rng.uniform(-180, 180)};
    GeoPoint b{rng.uniform(-90, 90), rng.uniform(-180, 180)};
    EXPECT_GE(haversine_m(a, b), 0.0);
    EXPECT_DOUBLE_EQ(haversine_m(a, b), haversine_m(b, a));
  }
  EXPECT_NEAR(haversine_m({0, 179.5}, {0, -179.5}), haversine_m({0, 0}, {0, 1}), 1e-6);
}

TEST(GeoPointTest, Validation) {
  EXPECT_THROW(make_geo_point(91, 0), std::invalid_argument);
  EXPECT_THROW(make_geo_point(0, 181), std::invalid_argument);
  EXPECT_THROW(make_geo_point(std::nan(""), 0), std::invalid_argument);
  EXPECT_EQ(make_geo_point(0, -180).lon, 180.0);
  EXPECT_EQ(normalize_lon(540.0), 180.0);
  EXPECT_EQ(normalize_lon(-190.0), 170.0);
}

TEST(Projection, MetersNearOrigin) {
  LocalProjection proj({45, 10});
  const auto p = proj.project({45, 10});
  EXPECT_EQ(p.x, 0.0);
  EXPECT_EQ(p.y, 0.0);
  const auto q = proj.project({45.001, 10.001});
  EXPECT_NEAR(q.y, kEarthRadiusM * deg2rad(0.001), 1e-9);
  EXPECT_NEAR(q.x, kEarthRadiusM * deg2rad(0.001) * std::cos(deg2rad(45)), 1e-9);
  // projected distance agrees with haversine at city scale
  EXPECT_NEAR(std::hypot(q.x, q.y), haversine_m({45, 10}, {45.001, 10.001}), 0.01);
}

TEST(Projection, CenteredAcrossAntimeridian) {
  std::vector<GeoPoint> pts = {{0, 179.9}, {0, -179.9}};
  const auto proj = LocalProjection::centered_on(pts);
  EXPECT_NEAR(std::abs(proj.origin().lon), 180.0, 1e-9);
  EXPECT_NEAR(proj.project(pts[0]).x, -proj.project(pts[1]).x, 1e-6);
}

// ---------------------------------------------------------------------------
// convex hull

TEST(Hull, SquareDropsInteriorPoint) {
  std::vector<PlanarPoint> pts = {{0, 0}, {1, 0}, {1, 1}, {0, 1}, {0.5, 0.5}};
  const auto hull = convex_hull(pts);
  EXPECT_EQ(hull, (std::vector<PlanarPoint>{{0, 0}, {1, 0}, {1, 1}, {0, 1}}));
  EXPECT_DOUBLE_EQ(polygon_area(hull), 1.0);
}

TEST(Hull, TriangleAgainstBruteForce) {
  std::vector<PlanarPoint> pts = {{0, 0}, {2, 0}, {1, 1}, {1, 0.2}};
  const auto hull = convex_hull(pts);
  EXPECT_EQ(hull, (std::vector<PlanarPoint>{{0, 0}, {2, 0}, {1, 1}}));
  std::set<std::pair<double, double>> got;
  for (const auto& p : hull) got.insert({p.x, p.y});
  EXPECT_EQ(got, oracle::hull_vertices(pts));
}

TEST(Hull, DegenerateInputs) {
  std::vector<PlanarPoint> collinear = {{0, 0}, {1, 1}, {2, 2}};
  EXPECT_THROW(convex_hull(collinear), DegenerateGeometry);
  std::vector<PlanarPoint> dupes = {{0, 0}, {0, 0}, {1, 0}, {1, 0}};
  EXPECT_THROW(convex_hull(dupes), DegenerateGeometry);
  std::vector<PlanarPoint> two = {{0, 0}, {1, 0}};
  EXPECT_THROW(convex_hull(two), DegenerateGeometry);
}

TEST(Hull, CollinearBoundaryPointsRemoved) {
  std::vector<PlanarPoint> pts = {{0, 0}, {1, 0}, {2, 0}, {2, 1}, {2, 2}, {1, 2}, {0, 2}, {0, 1}, {1, 1}};
  EXPECT_EQ(convex_hull(pts).size(), 4u);
}

TEST(Hull, RandomMatchesOracleAndIsIdempotent) {
  Rng rng(2024);
  for (int trial = 0; trial < 200; ++trial) {
    const auto pts = oracle::lattice_instance(rng, 3 + rng.below(60));
    const auto want = oracle::hull_vertices(pts);
    std::vector<PlanarPoint> hull;
    try {
      hull = convex_hull(pts);
    } catch (const DegenerateGeometry&) {
      EXPECT_LE(want.size(), 2u) << "trial " << trial;
      continue;
    }
    std::set<std::pair<double, double>> got;
    for (const auto& p : hull) got.insert({p.x, p.y});
    EXPECT_EQ(got, want) << "trial " << trial;
    EXPECT_GT(polygon_area(hull), 0.0);
    EXPECT_EQ(convex_hull(hull), hull);
    for (const auto& p : pts) EXPECT_TRUE(point_in_convex_polygon(p, hull));
  }
}

TEST(Hull, PointInPolygonBoundaryInclusive) {
  std::vector<PlanarPoint> sq = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  EXPECT_TRUE(point_in_convex_polygon({0, 0}, sq));
  EXPECT_TRUE(point_in_convex_polygon({0.5, 0}, sq));
  EXPECT_TRUE(point_in_convex_polygon({0.5, 0.5}, sq));
  EXPECT_FALSE(point_in_convex_polygon({1.01, 0.5}, sq));
  EXPECT_FALSE(point_in_convex_polygon({-1e-6, 0.5}, sq));
}

// ---------------------------------------------------------------------------
// DBSCAN

TEST(Dbscan, FiveClosePlusOneFar) {
  std::vector<GeoPoint> pts;
  for (int i = 0; i < 5; ++i) pts.push_back({40.0 + i * 1e-5, 116.0});
  pts.push_back({40.01, 116.0});
  const auto a = dbscan(pts, 50.0, 3);
  EXPECT_EQ(a.cluster_count, 1u);
  EXPECT_EQ(a.noise_count(), 1u);
  EXPECT_EQ(a.labels[5], ClusterAssignment::kNoise);
  EXPECT_EQ(a.labels, oracle::dbscan(pts, 50.0, 3));
}

TEST(Dbscan, MinPtsOneHasNoNoise) {
  Rng rng(3);
  const auto pts = oracle::blob_instance(rng, 200, {10, 10}, 2000);
  EXPECT_EQ(dbscan(pts, 30.0, 1).noise_count(), 0u);
}

TEST(Dbscan, TwoBlobsFiveKilometersApart) {
  Rng rng(8);
  auto pts = ring_of({48.0, 2.0}, 10, 30.0, rng);
  auto far = ring_of({48.045, 2.0}, 10, 30.0, rng);
  pts.insert(pts.end(), far.begin(), far.end());
  ASSERT_GT(haversine_m({48.0, 2.0}, {48.045, 2.0}), 4900.0);
  const auto a = dbscan(pts, 100.0, 4);
  EXPECT_EQ(a.cluster_count, 2u);
  EXPECT_EQ(a.labels, oracle::dbscan(pts, 100.0, 4));
}

TEST(Dbscan, EmptyAndInvalid) {
  std::vector<GeoPoint> none;
  const auto a = dbscan(none, 10.0, 3);
  EXPECT_EQ(a.cluster_count, 0u);
  EXPECT_TRUE(a.labels.empty());
  std::vector<GeoPoint> one = {{0, 0}};
  EXPECT_THROW(dbscan(one, 0.0, 3), std::invalid_argument);
  EXPECT_THROW(dbscan(one, 10.0, 0), std::invalid_argument);
}

TEST(Dbscan, MatchesOracleOnRandomInstances) {
  Rng rng(77);
  for (int trial = 0; trial < 60; ++trial) {
    const GeoPoint origin{rng.uniform(-70, 70), rng.uniform(-180, 180)};
    const auto pts = oracle::blob_instance(rng, 20 + rng.below(300), origin, 800);
    const double eps = rng.uniform(15, 150);
    const std::size_t min_pts = 1 + rng.below(12);
    const auto got = dbscan(pts, eps, min_pts);
    const auto want = oracle::dbscan(pts, eps, min_pts);
    ASSERT_EQ(got.labels, want) << "trial " << trial;
    EXPECT_EQ(got.cluster_count, static_cast<std::size_t>(*std::max_element(want.begin(), want.end()) + 1));
  }
}

TEST(Dbscan, HighLatitudeAndAntimeridian) {
  Rng rng(5);
  for (const GeoPoint origin : {GeoPoint{89.99, 0}, GeoPoint{-89.995, 120}, GeoPoint{0, 180}, GeoPoint{65, -179.999}}) {
    const auto pts = oracle::blob_instance(rng, 300, origin, 500);
    for (double eps : {20.0, 100.0}) {
      EXPECT_EQ(dbscan(pts, eps, 4).labels, oracle::dbscan(pts, eps, 4));
    }
  }
}

TEST(Dbscan, OrderInvarianceOfCoresAndNoise) {
  // Border points may legitimately change cluster under reordering; cores and
  // noise may not.
  Rng rng(101);
  for (int trial = 0; trial < 20; ++trial) {
    const auto pts = oracle::blob_instance(rng, 250, {30, 30}, 600);
    std::vector<std::size_t> perm(pts.size());
    std::iota(perm.begin(), perm.end(), 0);
    for (std::size_t i = perm.size() - 1; i > 0; --i) std::swap(perm[i], perm[rng.below(i + 1)]);
    std::vector<GeoPoint> shuffled;
    for (auto i : perm) shuffled.push_back(pts[i]);
    const auto a = dbscan(pts, 60, 5);
    const auto b = dbscan(shuffled, 60, 5);
    ASSERT_EQ(a.cluster_count, b.cluster_count);
    detail::GeoNeighborIndex index(pts, 60);
    std::map<int, int> relabel;
    for (std::size_t k = 0; k < perm.size(); ++k) {
      const auto i = perm[k];
      EXPECT_EQ(a.labels[i] == ClusterAssignment::kNoise, b.labels[k] == ClusterAssignment::kNoise);
      if (index.neighbors(i).size() >= 5) {
        auto [it, fresh] = relabel.emplace(a.labels[i], b.labels[k]);
        EXPECT_EQ(it->second, b.labels[k]);
      }
    }
  }
}

TEST(Dbscan, ShrinkingEpsNeverGrowsClusters) {
  Rng rng(19);
  for (int trial = 0; trial < 20; ++trial) {
    const auto pts = oracle::blob_instance(rng, 300, {-33, 151}, 700);
    const auto big = dbscan(pts, 120, 6);
    const auto small = dbscan(pts, 60, 6);
    std::map<int, std::set<int>> parents;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (small.labels[i] == ClusterAssignment::kNoise) continue;
      EXPECT_NE(big.labels[i], ClusterAssignment::kNoise);
      parents[small.labels[i]].insert(big.labels[i]);
    }
    // Core points of one small cluster stay together; only a border point may
    // sit in a different large cluster.
    detail::GeoNeighborIndex index(pts, 60);
    std::vector<char> core(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) core[i] = index.neighbors(i).size() >= 6;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      for (std::size_t j = i + 1; j < pts.size(); ++j) {
        if (small.labels[i] >= 0 && small.labels[i] == small.labels[j] && core[i] && core[j]) {
          EXPECT_EQ(big.labels[i], big.labels[j]);
        }
      }
    }
  }
}

TEST(Dbscan, ShrinkingEpsOnSeparatedBlobsIsSubset) {
  Rng rng(4);
  auto pts = ring_of({51.5, -0.12}, 80, 60.0, rng);
  auto b = ring_of({51.51, -0.12}, 80, 60.0, rng);
  pts.insert(pts.end(), b.begin(), b.end());
  const auto big = dbscan(pts, 80, 5);
  for (double eps : {60.0, 40.0, 20.0, 10.0}) {
    const auto small = dbscan(pts, eps, 5);
    std::map<int, std::set<int>> parents;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (small.labels[i] >= 0) parents[small.labels[i]].insert(big.labels[i]);
    }
    for (const auto& [id, ps] : parents) {
      EXPECT_EQ(ps.size(), 1u);
      EXPECT_FALSE(ps.count(ClusterAssignment::kNoise));
    }
  }
}

// ---------------------------------------------------------------------------
// places

TEST(ClusterParamsTest, MinPts) {
  ClusterParams p{100, 0.01, 3};
  EXPECT_EQ(p.min_pts_for(100), 3u);
  EXPECT_EQ(p.min_pts_for(300), 3u);
  EXPECT_EQ(p.min_pts_for(301), 4u);
  EXPECT_EQ(p.min_pts_for(1000), 10u);
  EXPECT_EQ((ClusterParams{50, 0.005, 3}.min_pts_for(2001)), 11u);
  EXPECT_THROW((ClusterParams{0, 0.01, 3}.validate()), std::invalid_argument);
  EXPECT_THROW((ClusterParams{10, 0, 3}.validate()), std::invalid_argument);
  EXPECT_THROW((ClusterParams{10, 1.5, 3}.validate()), std::invalid_argument);
  EXPECT_THROW((ClusterParams{10, 0.1, 2}.validate()), std::invalid_argument);
}

TEST(Place, OneDenseBlob) {
  Rng rng(1);
  const auto pts = ring_of({39.9, 116.4}, 100, 40.0, rng);
  const auto place = construct_place("S", pts, {100, 0.01, 3});
  ASSERT_EQ(place.footprint.size(), 1u);
  EXPECT_EQ(place.member_points.size(), 100u);
  for (const auto& p : pts) EXPECT_TRUE(point_in_footprint(p, place));
  // centroid in, far point out, vertex in
  GeoPoint c{0, 0};
  for (const auto& v : place.footprint[0].ring) {
    c.lat += v.lat / static_cast<double>(place.footprint[0].ring.size());
    c.lon += v.lon / static_cast<double>(place.footprint[0].ring.size());
  }
  EXPECT_TRUE(point_in_footprint(c, place));
  EXPECT_FALSE(point_in_footprint({39.99, 116.4}, place));
  EXPECT_TRUE(point_in_footprint(place.footprint[0].ring[0], place));
}

TEST(Place, TwoBlobsAndNoise) {
  Rng rng(2);
  auto pts = ring_of({35.0, 139.0}, 150, 50.0, rng);
  auto b = ring_of({35.005, 139.0}, 150, 50.0, rng);
  pts.insert(pts.end(), b.begin(), b.end());
  const std::vector<GeoPoint> noise = {{35.02, 139.02}, {34.98, 138.98}, {35.02, 138.98}};
  pts.insert(pts.end(), noise.begin(), noise.end());
  const auto place = construct_place("S", pts, {100, 0.01, 3});
  EXPECT_EQ(place.footprint.size(), 2u);
  EXPECT_EQ(place.member_points.size(), 300u);
  for (const auto& p : noise) EXPECT_FALSE(point_in_footprint(p, place));
}

TEST(Place, ScatteredPointsAreEmpty) {
  Rng rng(3);
  std::vector<GeoPoint> pts;
  for (int i = 0; i < 10; ++i) pts.push_back({rng.uniform(0, 0.09), rng.uniform(0, 0.09)});
  EXPECT_THROW(construct_place("S", pts, {50, 0.5, 3}), EmptyPlace);
}

TEST(Place, TooFewPoints) {
  std::vector<GeoPoint> pts = {{0, 0}, {0, 1e-5}};
  EXPECT_THROW(construct_place("S", pts, {50, 0.01, 3}), InsufficientData);
}

TEST(Place, CollinearClusterDropped) {
  std::vector<GeoPoint> line;
  for (int i = 0; i < 10; ++i) line.push_back({0.0, i * 1e-5});
  EXPECT_THROW(construct_place("S", line, {50, 0.01, 3}), EmptyPlace);
  Rng rng(5);
  auto pts = ring_of({1.0, 1.0}, 40, 30.0, rng);
  pts.insert(pts.end(), line.begin(), line.end());
  const auto place = construct_place("S", pts, {50, 0.01, 3});
  EXPECT_EQ(place.footprint.size(), 1u);
  EXPECT_EQ(place.member_points.size(), 40u);
}

TEST(Place, InvariantsOnRandomInstances) {
  Rng rng(31);
  for (int trial = 0; trial < 40; ++trial) {
    const auto pts = oracle::blob_instance(rng, 50 + rng.below(400), {rng.uniform(-60, 60), rng.uniform(-180, 180)}, 900);
    Place place;
    try {
      place = construct_place("S", pts, {rng.uniform(30, 200), rng.uniform(0.005, 0.05), 3});
    } catch (const EmptyPlace&) {
      continue;
    }
    ASSERT_EQ(place.member_points.size(), place.member_indices.size());
    for (std::size_t k = 0; k < place.member_indices.size(); ++k) {
      EXPECT_EQ(place.member_points[k], pts[place.member_indices[k]]);
      EXPECT_TRUE(point_in_footprint(place.member_points[k], place));
    }
    const FootprintTester tester(place);
    for (const auto& p : pts) EXPECT_EQ(tester.contains(p), point_in_footprint(p, place));
    for (const auto& poly : place.footprint) {
      ASSERT_GE(poly.ring.size(), 3u);
      const auto proj = polygon_projection(poly);
      std::vector<PlanarPoint> ring;
      for (const auto& v : poly.ring) ring.push_back(proj.project(v));
      EXPECT_GT(polygon_area(ring), 0.0);
      for (std::size_t i = 0; i < ring.size(); ++i) {
        EXPECT_GT(cross(ring[i], ring[(i + 1) % ring.size()], ring[(i + 2) % ring.size()]), 0.0);
      }
    }
  }
}
