#pragma once

#include <algorithm>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "occ/aggregate.hpp"
#include "occ/csv.hpp"
#include "occ/glmm.hpp"
#include "occ/gmerf.hpp"

namespace occ {

struct RideProbabilityProfile {
  int ride_id = 0;
  std::vector<double> prob;  // per segment, 1..N_s
  double min_probability = 1.0;
};

struct ProfileResult {
  std::vector<RideProbabilityProfile> profiles;
  std::vector<std::string> diagnostics;  // rides excluded for missing segments
};

// Per-ride probability profiles from row-level predictions. A ride is fully
// undercrowded at level p iff its minimum segment probability is >= p.
inline ProfileResult profile_rides(const std::vector<SegmentObservation>& obs,
                                   const std::vector<double>& prob) {
  if (obs.size() != prob.size())
    throw Error(ErrorKind::internal, "observations/probability size mismatch");
  int n_seg = 0;
  for (const auto& o : obs) n_seg = std::max(n_seg, o.segment);
  std::map<int, std::map<int, double>> by_ride;
  for (std::size_t i = 0; i < obs.size(); ++i) by_ride[obs[i].ride_id][obs[i].segment] = prob[i];

  ProfileResult out;
  for (const auto& [ride_id, segs] : by_ride) {
    if (static_cast<int>(segs.size()) != n_seg) {
      out.diagnostics.push_back("ride " + std::to_string(ride_id) + " has " +
                                std::to_string(segs.size()) + " of " + std::to_string(n_seg) +
                                " segments; excluded");
      continue;
    }
    RideProbabilityProfile pr;
    pr.ride_id = ride_id;
    pr.prob.reserve(segs.size());
    for (const auto& [seg, p] : segs) {
      pr.prob.push_back(p);
      pr.min_probability = std::min(pr.min_probability, p);
    }
    out.profiles.push_back(std::move(pr));
  }
  return out;
}

struct LevelCurve {
  std::vector<double> p;
  std::vector<long long> count;  // fully undercrowded rides at each level
};

inline std::vector<double> default_level_grid() {
  std::vector<double> g;
  for (int k = 0; k <= 200; ++k) g.push_back(k * 0.005);
  return g;
}

inline LevelCurve level_curve(const std::vector<RideProbabilityProfile>& profiles,
                              const std::vector<double>& grid) {
  LevelCurve c;
  for (double p : grid) {
    long long n = 0;
    for (const auto& pr : profiles)
      if (pr.min_probability >= p) ++n;
    c.p.push_back(p);
    c.count.push_back(n);
  }
  return c;
}

struct DistributionReport {
  double level = 0;
  long long n_p = 0;
  std::map<int, long long> by_time_slot;
  std::map<DayType, long long> by_day_type;
  std::map<int, long long> by_week;
  std::map<int, long long> by_month;  // the week table's calendar-month variant
};

// Temporal distribution of the fully undercrowded rides at level p.
inline DistributionReport distribution_report(const std::vector<RideProbabilityProfile>& profiles,
                                              double p,
                                              const std::vector<SegmentObservation>& obs) {
  struct RideMeta {
    int slot;
    DayType day;
    int week;
    int month;
  };
  std::map<int, RideMeta> meta;
  for (const auto& o : obs)
    meta[o.ride_id] = {o.time_slot, o.day_type, o.week_number, o.date.m};

  DistributionReport rep;
  rep.level = p;
  for (const auto& pr : profiles) {
    if (pr.min_probability < p) continue;
    ++rep.n_p;
    auto it = meta.find(pr.ride_id);
    if (it == meta.end()) continue;
    ++rep.by_time_slot[it->second.slot];
    ++rep.by_day_type[it->second.day];
    ++rep.by_week[it->second.week];
    ++rep.by_month[it->second.month];
  }
  return rep;
}

// Scenario rows share covariates and vary only the segment (and its z).
struct Scenario {
  double time_slot = 12;
  double week = 1;
  DayType day_type = DayType::working;
  Season season = Season::summer;
  std::array<double, 5> weather{};  // canonical kWeatherColumns order
};

inline CovariateRow scenario_row(const Scenario& sc) {
  CovariateRow r;
  r.time_slot = sc.time_slot;
  r.week_number = sc.week;
  r.day_type = sc.day_type;
  r.season = sc.season;
  r.weather = sc.weather;
  return r;
}

inline std::vector<double> scenario_predict(const GlmmFit& fit, const FeatureTransform& t,
                                            const Scenario& sc) {
  Eigen::RowVectorXd x = encode_covariate_row(scenario_row(sc), t);
  std::vector<double> out;
  out.reserve(fit.group_ids.size());
  for (std::size_t j = 0; j < fit.group_ids.size(); ++j) {
    double eta = fit.beta[0] + x.dot(fit.beta.tail(fit.beta.size() - 1)) +
                 fit.z[static_cast<Eigen::Index>(j)];
    out.push_back(logistic(eta));
  }
  return out;
}

inline std::vector<double> scenario_predict(const GmerfFit& fit, const FeatureTransform& t,
                                            const Scenario& sc) {
  Eigen::RowVectorXd x = encode_covariate_row(scenario_row(sc), t);
  double f = fit.forest.predict(x);
  std::vector<double> out;
  out.reserve(fit.group_ids.size());
  for (std::size_t j = 0; j < fit.group_ids.size(); ++j)
    out.push_back(logistic(f + fit.z[static_cast<Eigen::Index>(j)]));
  return out;
}

inline void write_level_curve_csv(std::ostream& os, const LevelCurve& c) {
  CsvWriter w(os, {"p", "fully_undercrowded_rides"});
  for (std::size_t i = 0; i < c.p.size(); ++i)
    w.write_row({format_double(c.p[i]), std::to_string(c.count[i])});
}

inline void write_distribution_csv(std::ostream& os, const DistributionReport& rep) {
  CsvWriter w(os, {"grouping", "value", "count"});
  for (const auto& [k, v] : rep.by_time_slot)
    w.write_row({"time_slot", std::to_string(k), std::to_string(v)});
  for (const auto& [k, v] : rep.by_day_type)
    w.write_row({"day_type", day_type_name(k), std::to_string(v)});
  for (const auto& [k, v] : rep.by_week)
    w.write_row({"week", std::to_string(k), std::to_string(v)});
  for (const auto& [k, v] : rep.by_month)
    w.write_row({"month", std::to_string(k), std::to_string(v)});
}

inline nlohmann::json distribution_json(const DistributionReport& rep) {
  nlohmann::json j;
  j["level"] = rep.level;
  j["n_p"] = rep.n_p;
  nlohmann::json slots, days, weeks, months;
  for (const auto& [k, v] : rep.by_time_slot) slots[std::to_string(k)] = v;
  for (const auto& [k, v] : rep.by_day_type) days[day_type_name(k)] = v;
  for (const auto& [k, v] : rep.by_week) weeks[std::to_string(k)] = v;
  for (const auto& [k, v] : rep.by_month) months[std::to_string(k)] = v;
  j["by_time_slot"] = slots;
  j["by_day_type"] = days;
  j["by_week"] = weeks;
  j["by_month"] = months;
  return j;
}

}  // namespace occ
