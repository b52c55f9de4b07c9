#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "occ/csv.hpp"
#include "occ/depth.hpp"
#include "occ/mathutil.hpp"
#include "occ/types.hpp"

namespace occ {

struct DepthPoint {
  int boarded = 0;
  int alighted = 0;
  RideKey ride;
  int stop_index = 0;
};

struct ValidationConfig {
  int anomalous_count_threshold = 50;
  double missing_fraction_limit = 0.10;
  double fence_inflation = 3.0;
  double bag_mass = 0.5;
  // Operator-supplied extra rejection rule; disabled by default.
  std::function<bool(const Ride&)> domain_reject;
};

struct BagplotResult {
  Point depth_median;
  std::vector<Point> bag;
  std::vector<Point> fence;
  std::vector<bool> outlier_flags;
  std::vector<int> depths;
  bool short_circuited = false;
  bool degenerate_fallback = false;
  std::vector<std::string> diagnostics;
};

namespace detail {

// Star-shaped contour about `center`: radii interpolated between two nested
// hulls, then hulled again so the result is convex.
inline std::vector<Point> interpolated_contour(const Point& center,
                                               const std::vector<Point>& inner,
                                               const std::vector<Point>& outer, double lambda,
                                               double scale) {
  std::vector<double> dirs;
  auto add_dirs = [&](const std::vector<Point>& poly) {
    for (const Point& p : poly) {
      if (p.x == center.x && p.y == center.y) continue;
      dirs.push_back(std::atan2(p.y - center.y, p.x - center.x));
    }
  };
  add_dirs(inner);
  add_dirs(outer);
  for (int k = 0; k < 16; ++k) dirs.push_back(2 * M_PI * k / 16.0 - M_PI);
  std::sort(dirs.begin(), dirs.end());
  dirs.erase(std::unique(dirs.begin(), dirs.end()), dirs.end());

  std::vector<Point> contour;
  contour.reserve(dirs.size());
  for (double a : dirs) {
    double dx = std::cos(a), dy = std::sin(a);
    double r_in = inner.empty() ? 0.0 : ray_polygon_radius(center, dx, dy, inner);
    double r_out = ray_polygon_radius(center, dx, dy, outer);
    double r = (r_in + lambda * (r_out - r_in)) * scale;
    contour.push_back({center.x + r * dx, center.y + r * dy});
  }
  return convex_hull(contour);
}

}  // namespace detail

// Bagplot classification of a bivariate (boarded, alighted) sample.
//
// Short-circuits to "no outliers" when every count stays at or below the
// anomalous-count threshold. Otherwise: depth median = highest-depth sample
// point (ties -> centroid), bag = smallest depth region holding >= bag_mass of
// the sample (interpolating between consecutive depth-region hulls), fence =
// bag inflated about the depth median; points outside the fence are flagged.
// Collinear samples fall back to coordinate-wise quartile +- inflation*IQR.
inline BagplotResult bagplot_classify(const std::vector<DepthPoint>& sample,
                                      const ValidationConfig& cfg) {
  BagplotResult res;
  const std::size_t n = sample.size();
  res.outlier_flags.assign(n, false);
  if (n < 10) {
    res.diagnostics.push_back("sample below minimum size (10); all classified non-outliers");
    return res;
  }

  bool any_above = false;
  for (const auto& p : sample) {
    if (p.boarded > cfg.anomalous_count_threshold || p.alighted > cfg.anomalous_count_threshold) {
      any_above = true;
      break;
    }
  }
  if (!any_above) {
    res.short_circuited = true;
    return res;
  }

  std::vector<Point> pts(n);
  for (std::size_t i = 0; i < n; ++i)
    pts[i] = {static_cast<double>(sample[i].boarded), static_cast<double>(sample[i].alighted)};

  auto full_hull = convex_hull(pts);
  if (full_hull.size() < 3 || polygon_area(full_hull) < 1e-9) {
    // 1-D fences per coordinate
    res.degenerate_fallback = true;
    res.diagnostics.push_back("degenerate sample geometry; coordinate-wise IQR fences used");
    std::vector<double> xs(n), ys(n);
    for (std::size_t i = 0; i < n; ++i) {
      xs[i] = pts[i].x;
      ys[i] = pts[i].y;
    }
    double qx1 = quantile(xs, 0.25), qx3 = quantile(xs, 0.75);
    double qy1 = quantile(ys, 0.25), qy3 = quantile(ys, 0.75);
    double fx = cfg.fence_inflation * (qx3 - qx1), fy = cfg.fence_inflation * (qy3 - qy1);
    for (std::size_t i = 0; i < n; ++i) {
      res.outlier_flags[i] = pts[i].x < qx1 - fx || pts[i].x > qx3 + fx || pts[i].y < qy1 - fy ||
                             pts[i].y > qy3 + fy;
    }
    return res;
  }

  res.depths.resize(n);
  int max_depth = 0;
  for (std::size_t i = 0; i < n; ++i) {
    res.depths[i] = halfspace_depth(pts[i], pts);
    max_depth = std::max(max_depth, res.depths[i]);
  }

  // depth median: centroid of the deepest sample points
  double mx = 0, my = 0;
  int ties = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (res.depths[i] == max_depth) {
      mx += pts[i].x;
      my += pts[i].y;
      ++ties;
    }
  }
  res.depth_median = {mx / ties, my / ties};

  // smallest depth level whose region holds >= bag_mass of the sample
  const double target = cfg.bag_mass * static_cast<double>(n);
  auto level_points = [&](int k) {
    std::vector<Point> out;
    for (std::size_t i = 0; i < n; ++i)
      if (res.depths[i] >= k) out.push_back(pts[i]);
    return out;
  };
  int k_bag = 1;
  for (int k = max_depth; k >= 1; --k) {
    if (static_cast<double>(level_points(k).size()) >= target) {
      k_bag = k;
      break;
    }
  }
  std::vector<Point> outer_pts = level_points(k_bag);
  std::vector<Point> inner_pts = k_bag < max_depth ? level_points(k_bag + 1) : std::vector<Point>{};
  std::vector<Point> outer_hull = convex_hull(outer_pts);
  std::vector<Point> inner_hull = convex_hull(inner_pts);
  if (inner_hull.size() < 3) inner_hull.clear();

  double n_out = static_cast<double>(outer_pts.size());
  double n_in = static_cast<double>(inner_pts.size());
  double lambda = n_out > n_in ? (target - n_in) / (n_out - n_in) : 1.0;
  lambda = std::clamp(lambda, 0.0, 1.0);

  res.bag = detail::interpolated_contour(res.depth_median, inner_hull, outer_hull, lambda, 1.0);
  res.fence = detail::interpolated_contour(res.depth_median, inner_hull, outer_hull, lambda,
                                           cfg.fence_inflation);
  for (std::size_t i = 0; i < n; ++i)
    res.outlier_flags[i] = !point_in_convex_polygon(pts[i], res.fence);
  return res;
}

enum class VehicleVerdict { ok, all_zero, one_sided };

inline const char* vehicle_verdict_name(VehicleVerdict v) {
  switch (v) {
    case VehicleVerdict::ok: return "ok";
    case VehicleVerdict::all_zero: return "all_zero";
    case VehicleVerdict::one_sided: return "one_sided";
  }
  return "?";
}

// Vehicle-day screen: counters silent on both flows, or silent on exactly one
// flow while the other keeps registering, across every ride and stop.
inline VehicleVerdict detect_vehicle_outliers(const std::vector<const Ride*>& vehicle_day_rides) {
  bool any_boarded = false, any_alighted = false;
  for (const Ride* r : vehicle_day_rides) {
    for (const StopRecord& s : r->stops) {
      if (s.boarded > 0) any_boarded = true;
      if (s.alighted > 0) any_alighted = true;
    }
  }
  if (!any_boarded && !any_alighted) return VehicleVerdict::all_zero;
  if (any_boarded != any_alighted) return VehicleVerdict::one_sided;
  return VehicleVerdict::ok;
}

struct VehicleDayReport {
  std::string vehicle;
  CalDate date;
  VehicleVerdict verdict = VehicleVerdict::ok;
};

inline std::vector<VehicleDayReport> vehicle_day_screen(const std::vector<Ride>& rides) {
  std::map<std::pair<std::string, CalDate>, std::vector<const Ride*>> groups;
  for (const Ride& r : rides) groups[{r.vehicle, r.key.date}].push_back(&r);
  std::vector<VehicleDayReport> out;
  out.reserve(groups.size());
  for (const auto& [k, v] : groups)
    out.push_back({k.first, k.second, detect_vehicle_outliers(v)});
  return out;
}

// Status- and timetable-based anomaly codes for one ride.
inline std::set<AnomalyCode> detect_anomalies(const Ride& ride, const RouteSpec& timetable,
                                              std::vector<std::string>* diagnostics = nullptr) {
  std::set<AnomalyCode> codes;
  for (int s : ride.statuses) {
    switch (s) {
      case static_cast<int>(ServiceStatus::in_transit): break;
      case static_cast<int>(ServiceStatus::depot): codes.insert(AnomalyCode::depot); break;
      case static_cast<int>(ServiceStatus::breakdown): codes.insert(AnomalyCode::breakdown); break;
      case static_cast<int>(ServiceStatus::interrupted):
        codes.insert(AnomalyCode::interrupted);
        break;
      default:
        if (diagnostics)
          diagnostics->push_back("unknown status code " + std::to_string(s) + " on ride " +
                                 ride.key.str());
    }
  }
  bool detour = ride.diverted;
  if (!ride.path.empty() && !timetable.path.empty() && ride.path != timetable.path) detour = true;
  // observed stop ids must form a subsequence of the scheduled sequence
  std::vector<std::string> observed;
  for (const std::string& s : ride.observed_stops)
    if (observed.empty() || observed.back() != s) observed.push_back(s);
  std::size_t j = 0;
  for (const std::string& s : observed) {
    while (j < timetable.stops.size() && timetable.stops[j] != s) ++j;
    if (j == timetable.stops.size()) {
      detour = true;
      break;
    }
    ++j;
  }
  if (detour) codes.insert(AnomalyCode::detour);
  return codes;
}

// Builds per-stop bivariate samples across rides and writes fence-outlier
// flags back into each ride's quality block.
inline std::map<int, BagplotResult> apply_stop_outlier_flags(std::vector<Ride>& rides,
                                                             const ValidationConfig& cfg) {
  std::map<int, std::vector<DepthPoint>> samples;
  std::map<int, std::vector<Ride*>> owners;
  for (Ride& r : rides) {
    for (const StopRecord& s : r.stops) {
      if (!s.observed) continue;
      samples[s.stop_index].push_back({s.boarded, s.alighted, r.key, s.stop_index});
      owners[s.stop_index].push_back(&r);
    }
  }
  std::map<int, BagplotResult> results;
  for (auto& [stop_idx, sample] : samples) {
    BagplotResult res = bagplot_classify(sample, cfg);
    auto& own = owners[stop_idx];
    for (std::size_t i = 0; i < sample.size(); ++i)
      if (res.outlier_flags[i]) own[i]->quality.outlier_stop_indices.insert(stop_idx);
    results.emplace(stop_idx, std::move(res));
  }
  return results;
}

inline void annotate_anomalies(std::vector<Ride>& rides, const RouteSpec& timetable) {
  for (Ride& r : rides)
    r.quality.anomaly_codes = detect_anomalies(r, timetable, &r.diagnostics);
}

enum class RejectReason { missing, noise, outlier, anomaly, domain_rule };

inline const char* reject_reason_name(RejectReason r) {
  switch (r) {
    case RejectReason::missing: return "missing";
    case RejectReason::noise: return "noise";
    case RejectReason::outlier: return "outlier";
    case RejectReason::anomaly: return "anomaly";
    case RejectReason::domain_rule: return "domain_rule";
  }
  return "?";
}

struct RejectedRide {
  RideKey key;
  std::vector<RejectReason> reasons;
};

struct FilterResult {
  std::vector<Ride> clean;
  std::vector<RejectedRide> rejected;
  std::map<RejectReason, std::size_t> reason_counts;  // a ride may count under several
  std::size_t total_input = 0;
};

// Ride filter: reject incomplete rides above the missing limit and any ride
// with a noisy, outlier, or anomalous observation.
inline FilterResult filter_rides(const std::vector<Ride>& rides, const ValidationConfig& cfg) {
  FilterResult out;
  out.total_input = rides.size();
  for (const Ride& r : rides) {
    std::vector<RejectReason> reasons;
    if (r.quality.missing_fraction > cfg.missing_fraction_limit)
      reasons.push_back(RejectReason::missing);
    if (r.quality.noise_fraction > 0) reasons.push_back(RejectReason::noise);
    if (!r.quality.outlier_stop_indices.empty()) reasons.push_back(RejectReason::outlier);
    if (!r.quality.anomaly_codes.empty()) reasons.push_back(RejectReason::anomaly);
    if (cfg.domain_reject && cfg.domain_reject(r)) reasons.push_back(RejectReason::domain_rule);
    if (reasons.empty()) {
      out.clean.push_back(r);
    } else {
      for (RejectReason reason : reasons) ++out.reason_counts[reason];
      out.rejected.push_back({r.key, std::move(reasons)});
    }
  }
  return out;
}

inline void write_rejection_csv(std::ostream& os, const FilterResult& fr) {
  CsvWriter w(os, {"date", "route", "table", "ride", "direction", "reasons"});
  for (const RejectedRide& r : fr.rejected) {
    std::string reasons;
    for (std::size_t i = 0; i < r.reasons.size(); ++i) {
      if (i) reasons += '+';
      reasons += reject_reason_name(r.reasons[i]);
    }
    w.write_row({format_date(r.key.date), r.key.route, std::to_string(r.key.table_no),
                 std::to_string(r.key.ride_no), std::to_string(static_cast<int>(r.key.direction)),
                 reasons});
  }
}

inline nlohmann::json rejection_summary_json(const FilterResult& fr) {
  nlohmann::json j;
  j["total_rides"] = fr.total_input;
  j["clean_rides"] = fr.clean.size();
  j["rejected_rides"] = fr.rejected.size();
  nlohmann::json per;
  for (const auto& [reason, count] : fr.reason_counts) {
    nlohmann::json e;
    e["count"] = count;
    e["percent_of_rides"] =
        fr.total_input ? 100.0 * static_cast<double>(count) / static_cast<double>(fr.total_input)
                       : 0.0;
    per[reject_reason_name(reason)] = e;
  }
  j["per_reason"] = per;
  return j;
}

}  // namespace occ
