#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace occ {

struct Point {
  double x = 0;
  double y = 0;
  friend bool operator==(const Point&, const Point&) = default;
};

inline double cross(const Point& o, const Point& a, const Point& b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

// Tukey halfspace depth of q: the minimum, over all closed halfplanes whose
// boundary passes through q, of the number of sample points in the halfplane.
//
// Angular sweep, O(n log n) per query. The count of points in a closed
// halfplane is piecewise constant as the normal direction rotates, with
// breakpoints where the boundary line hits a sample point; minima live on the
// open arcs between breakpoints, where the closed count equals the strict
// count. We evaluate the strict count at the midpoint of every arc.
inline int halfspace_depth(const Point& q, std::span<const Point> sample) {
  int at_q = 0;
  std::vector<double> ang;
  ang.reserve(sample.size());
  for (const Point& p : sample) {
    double vx = p.x - q.x, vy = p.y - q.y;
    if (vx == 0.0 && vy == 0.0) {
      ++at_q;
      continue;
    }
    double a = std::atan2(vy, vx);
    if (a < 0) a += 2 * M_PI;
    ang.push_back(a);
  }
  const int n = static_cast<int>(ang.size());
  if (n == 0) return at_q;

  std::sort(ang.begin(), ang.end());

  // Breakpoints of the complement count: each point angle and its antipode.
  std::vector<double> brk;
  brk.reserve(2 * ang.size());
  for (double a : ang) {
    brk.push_back(a);
    double b = a + M_PI;
    if (b >= 2 * M_PI) b -= 2 * M_PI;
    brk.push_back(b);
  }
  std::sort(brk.begin(), brk.end());

  // Doubled angle array for circular range counting.
  std::vector<double> doubled(ang);
  for (double a : ang) doubled.push_back(a + 2 * M_PI);

  auto open_semicircle_count = [&](double s) {
    // #{a : s < a < s + pi}, angles modulo 2*pi
    auto lo = std::upper_bound(doubled.begin(), doubled.end(), s);
    auto hi = std::lower_bound(doubled.begin(), doubled.end(), s + M_PI);
    return static_cast<int>(hi - lo);
  };

  int max_open = 0;
  const std::size_t m = brk.size();
  for (std::size_t i = 0; i < m; ++i) {
    double b0 = brk[i];
    double b1 = (i + 1 < m) ? brk[i + 1] : brk[0] + 2 * M_PI;
    if (b1 - b0 <= 0) continue;
    double mid = 0.5 * (b0 + b1);
    if (mid >= 2 * M_PI) mid -= 2 * M_PI;
    max_open = std::max(max_open, open_semicircle_count(mid));
  }
  return at_q + (n - max_open);
}

// Monotone-chain convex hull, counter-clockwise, no repeated endpoint.
// Collinear boundary points are dropped.
inline std::vector<Point> convex_hull(std::vector<Point> pts) {
  std::sort(pts.begin(), pts.end(), [](const Point& a, const Point& b) {
    return a.x < b.x || (a.x == b.x && a.y < b.y);
  });
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  const std::size_t n = pts.size();
  if (n < 3) return pts;
  std::vector<Point> hull(2 * n);
  std::size_t k = 0;
  for (std::size_t i = 0; i < n; ++i) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  std::size_t lower = k + 1;
  for (std::size_t i = n - 1; i-- > 0;) {
    while (k >= lower && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return hull;
}

inline double polygon_area(std::span<const Point> poly) {
  double s = 0;
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Point& a = poly[i];
    const Point& b = poly[(i + 1) % n];
    s += a.x * b.y - a.y * b.x;
  }
  return 0.5 * std::fabs(s);
}

// Distance from an interior point to the polygon boundary along direction d.
// Returns 0 for degenerate polygons (< 3 vertices).
inline double ray_polygon_radius(const Point& center, double dx, double dy,
                                 std::span<const Point> poly) {
  const std::size_t n = poly.size();
  if (n == 0) return 0.0;
  if (n < 3) {
    double best = 0.0;  // degenerate hull: reach of projections onto d
    for (const Point& p : poly) {
      double t = (p.x - center.x) * dx + (p.y - center.y) * dy;
      best = std::max(best, t);
    }
    return best;
  }
  double best = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Point& a = poly[i];
    const Point& b = poly[(i + 1) % n];
    double ex = b.x - a.x, ey = b.y - a.y;
    double denom = dx * ey - dy * ex;
    if (std::fabs(denom) < 1e-300) continue;
    double wx = a.x - center.x, wy = a.y - center.y;
    double t = (wx * ey - wy * ex) / denom;   // along the ray
    double s = (wx * dy - wy * dx) / -denom;  // along the edge
    if (t >= 0 && s >= -1e-12 && s <= 1 + 1e-12) best = std::max(best, t);
  }
  return best;
}

// Point membership in a convex CCW polygon; boundary counts as inside.
inline bool point_in_convex_polygon(const Point& p, std::span<const Point> poly) {
  const std::size_t n = poly.size();
  if (n == 0) return false;
  if (n == 1) return p == poly[0];
  if (n == 2) {
    double c = cross(poly[0], poly[1], p);
    if (std::fabs(c) > 1e-9) return false;
    double t = (p.x - poly[0].x) * (poly[1].x - poly[0].x) +
               (p.y - poly[0].y) * (poly[1].y - poly[0].y);
    double len2 = (poly[1].x - poly[0].x) * (poly[1].x - poly[0].x) +
                  (poly[1].y - poly[0].y) * (poly[1].y - poly[0].y);
    return t >= -1e-9 && t <= len2 + 1e-9;
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (cross(poly[i], poly[(i + 1) % n], p) < -1e-9) return false;
  }
  return true;
}

}  // namespace occ
