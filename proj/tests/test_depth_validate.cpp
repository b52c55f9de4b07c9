#include <gtest/gtest.h>

#include <random>

#include "occ/depth.hpp"
#include "occ/validate.hpp"
#include "oracles.hpp"

using namespace occ;

TEST(HalfspaceDepth, DegenerateSinglePoint) {
  std::vector<Point> s = {{3, 4}};
  EXPECT_EQ(halfspace_depth({3, 4}, s), 1);
}

TEST(HalfspaceDepth, UnitSquareCentroid) {
  std::vector<Point> s = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  EXPECT_EQ(halfspace_depth({0.5, 0.5}, s), 2);
}

TEST(HalfspaceDepth, OutsideHullIsZero) {
  std::vector<Point> s = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  EXPECT_EQ(halfspace_depth({100, 100}, s), 0);
}

TEST(HalfspaceDepth, CollinearAndDuplicates) {
  std::vector<Point> s = {{0, 0}, {1, 0}, {2, 0}, {2, 0}, {3, 0}};
  EXPECT_EQ(halfspace_depth({2, 0}, s), oracle::halfspace_depth_bruteforce({2, 0}, s));
  EXPECT_EQ(halfspace_depth({0, 0}, s), oracle::halfspace_depth_bruteforce({0, 0}, s));
  EXPECT_EQ(halfspace_depth({1.5, 0}, s), oracle::halfspace_depth_bruteforce({1.5, 0}, s));
}

TEST(HalfspaceDepth, SweepMatchesBruteForceOnRandomSamples) {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> coord(0, 60);
  std::uniform_int_distribution<int> size(1, 100);
  for (int rep = 0; rep < 200; ++rep) {
    int n = size(rng);
    std::vector<Point> s(static_cast<std::size_t>(n));
    for (auto& p : s) p = {static_cast<double>(coord(rng)), static_cast<double>(coord(rng))};
    for (const Point& q : s) {
      ASSERT_EQ(halfspace_depth(q, s), oracle::halfspace_depth_bruteforce(q, s))
          << "rep " << rep << " at (" << q.x << "," << q.y << ")";
    }
  }
}

TEST(ConvexHull, SquareWithInterior) {
  auto hull = convex_hull({{0, 0}, {4, 0}, {4, 4}, {0, 4}, {2, 2}, {1, 3}});
  EXPECT_EQ(hull.size(), 4u);
  EXPECT_NEAR(polygon_area(hull), 16.0, 1e-12);
}

namespace {

std::vector<DepthPoint> cluster_points(int n, int cx, int cy, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> off(-3, 3);
  std::vector<DepthPoint> pts;
  for (int i = 0; i < n; ++i)
    pts.push_back({std::max(0, cx + off(rng)), std::max(0, cy + off(rng)), {}, i});
  return pts;
}

}  // namespace

TEST(Bagplot, ShortCircuitUnderThreshold) {
  std::mt19937_64 rng(1);
  auto pts = cluster_points(60, 12, 9, rng);
  auto res = bagplot_classify(pts, {});
  EXPECT_TRUE(res.short_circuited);
  for (bool f : res.outlier_flags) EXPECT_FALSE(f);
}

TEST(Bagplot, TinySampleAllClear) {
  std::mt19937_64 rng(2);
  auto pts = cluster_points(5, 500, 500, rng);  // above threshold but below min size
  auto res = bagplot_classify(pts, {});
  EXPECT_FALSE(res.short_circuited);
  EXPECT_FALSE(res.diagnostics.empty());
  for (bool f : res.outlier_flags) EXPECT_FALSE(f);
}

TEST(Bagplot, PlantedSpikeFlaggedAlone) {
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    std::mt19937_64 rng(seed);
    auto pts = cluster_points(99, 5, 5, rng);
    pts.push_back({500, 0, {}, 99});
    auto res = bagplot_classify(pts, {});
    ASSERT_EQ(res.outlier_flags.size(), 100u);
    for (int i = 0; i < 99; ++i) EXPECT_FALSE(res.outlier_flags[i]) << "seed " << seed;
    EXPECT_TRUE(res.outlier_flags[99]) << "seed " << seed;
  }
}

TEST(Bagplot, IdenticalPointsDegenerateFallback) {
  std::vector<DepthPoint> pts(10, DepthPoint{60, 60, {}, 0});
  auto res = bagplot_classify(pts, {});
  EXPECT_TRUE(res.degenerate_fallback);
  for (bool f : res.outlier_flags) EXPECT_FALSE(f);
}

TEST(Bagplot, CollinearFallbackFlagsExtremes) {
  std::vector<DepthPoint> pts;
  for (int i = 0; i < 20; ++i) pts.push_back({50 + i, 0, {}, i});
  pts.push_back({400, 0, {}, 20});
  auto res = bagplot_classify(pts, {});
  EXPECT_TRUE(res.degenerate_fallback);
  EXPECT_TRUE(res.outlier_flags.back());
  for (std::size_t i = 0; i + 1 < res.outlier_flags.size(); ++i)
    EXPECT_FALSE(res.outlier_flags[i]);
}

TEST(Bagplot, PermutationInvariant) {
  std::mt19937_64 rng(11);
  auto pts = cluster_points(40, 30, 20, rng);
  pts.push_back({300, 40, {}, 40});
  pts.push_back({10, 200, {}, 41});
  auto res1 = bagplot_classify(pts, {});
  std::vector<std::size_t> perm(pts.size());
  for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<DepthPoint> shuffled;
  for (auto i : perm) shuffled.push_back(pts[i]);
  auto res2 = bagplot_classify(shuffled, {});
  for (std::size_t i = 0; i < perm.size(); ++i)
    EXPECT_EQ(res1.outlier_flags[perm[i]], res2.outlier_flags[i]);
}

TEST(Bagplot, BagInsideFence) {
  std::mt19937_64 rng(3);
  auto pts = cluster_points(80, 20, 30, rng);
  pts.push_back({400, 10, {}, 80});
  auto res = bagplot_classify(pts, {});
  ASSERT_GE(res.fence.size(), 3u);
  for (const Point& b : res.bag) EXPECT_TRUE(point_in_convex_polygon(b, res.fence));
  // points inside the bag are never flagged
  for (std::size_t i = 0; i < pts.size(); ++i) {
    Point p{static_cast<double>(pts[i].boarded), static_cast<double>(pts[i].alighted)};
    if (point_in_convex_polygon(p, res.bag)) EXPECT_FALSE(res.outlier_flags[i]);
  }
}

TEST(VehicleOutliers, Verdicts) {
  auto make_ride = [](int boarded, int alighted) {
    Ride r;
    StopRecord s;
    s.stop_index = 1;
    s.boarded = boarded;
    s.alighted = alighted;
    r.stops.push_back(s);
    return r;
  };
  Ride zero = make_ride(0, 0), board_only = make_ride(3, 0), mixed = make_ride(2, 2);
  EXPECT_EQ(detect_vehicle_outliers({&zero}), VehicleVerdict::all_zero);
  EXPECT_EQ(detect_vehicle_outliers({&zero, &board_only}), VehicleVerdict::one_sided);
  EXPECT_EQ(detect_vehicle_outliers({&mixed, &board_only}), VehicleVerdict::ok);
}

namespace {

RouteSpec three_stop_route() {
  RouteSpec r;
  r.route = "R1";
  r.path = "P1";
  r.stops = {"A", "B", "C"};
  r.capacity[VehicleType::bus] = 80;
  return r;
}

}  // namespace

TEST(Anomalies, StatusAndDetour) {
  auto route = three_stop_route();
  Ride r;
  r.path = "P1";
  r.observed_stops = {"A", "B", "C"};
  r.statuses = {0};
  EXPECT_TRUE(detect_anomalies(r, route).empty());

  r.statuses = {0, static_cast<int>(ServiceStatus::breakdown)};
  auto codes = detect_anomalies(r, route);
  EXPECT_TRUE(codes.count(AnomalyCode::breakdown));

  Ride d;
  d.path = "P9";
  d.observed_stops = {"A", "B"};
  d.statuses = {0};
  EXPECT_TRUE(detect_anomalies(d, route).count(AnomalyCode::detour));

  Ride sub;
  sub.path = "P1";
  sub.observed_stops = {"A", "C"};  // subsequence: missing stop, not a detour
  sub.statuses = {0};
  EXPECT_TRUE(detect_anomalies(sub, route).empty());

  Ride wrong_order;
  wrong_order.path = "P1";
  wrong_order.observed_stops = {"B", "A"};
  wrong_order.statuses = {0};
  EXPECT_TRUE(detect_anomalies(wrong_order, route).count(AnomalyCode::detour));

  Ride unknown;
  unknown.path = "P1";
  unknown.observed_stops = {"A"};
  unknown.statuses = {99};
  std::vector<std::string> diag;
  EXPECT_TRUE(detect_anomalies(unknown, route, &diag).empty());
  EXPECT_EQ(diag.size(), 1u);
}

TEST(FilterRides, RulesAndBoundary) {
  ValidationConfig cfg;
  auto mk = [](double missing, double noise, bool outlier, bool anomaly) {
    Ride r;
    r.quality.missing_fraction = missing;
    r.quality.noise_fraction = noise;
    if (outlier) r.quality.outlier_stop_indices.insert(3);
    if (anomaly) r.quality.anomaly_codes.insert(AnomalyCode::depot);
    return r;
  };
  std::vector<Ride> rides = {
      mk(2.0 / 19.0, 0, false, false),  // 0.105 > 0.10 -> rejected
      mk(0.10, 0, false, false),        // boundary: kept (strict >)
      mk(0, 0.05, false, false),        // noise -> rejected
      mk(0, 0, true, false),            // outlier -> rejected
      mk(0, 0, false, true),            // anomaly -> rejected
      mk(0, 0, false, false),           // clean
  };
  auto res = filter_rides(rides, cfg);
  EXPECT_EQ(res.clean.size(), 2u);
  EXPECT_EQ(res.rejected.size(), 4u);
  EXPECT_EQ(res.clean.size() + res.rejected.size(), rides.size());
  EXPECT_EQ(res.reason_counts.at(RejectReason::missing), 1u);
  EXPECT_EQ(res.reason_counts.at(RejectReason::noise), 1u);
  EXPECT_EQ(res.reason_counts.at(RejectReason::outlier), 1u);
  EXPECT_EQ(res.reason_counts.at(RejectReason::anomaly), 1u);

  // rerunning on the clean half rejects nothing
  auto res2 = filter_rides(res.clean, cfg);
  EXPECT_TRUE(res2.rejected.empty());
}

TEST(Bagplot, ShortCircuitScaleInvariance) {
  // any geometry with max coordinate <= threshold stays unflagged
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> coord(0, 50);
  for (int rep = 0; rep < 10; ++rep) {
    std::vector<DepthPoint> pts;
    for (int i = 0; i < 30; ++i) pts.push_back({coord(rng), coord(rng), {}, i});
    auto res = bagplot_classify(pts, {});
    EXPECT_TRUE(res.short_circuited);
    for (bool f : res.outlier_flags) EXPECT_FALSE(f);
  }
}
