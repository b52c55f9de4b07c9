#pragma once

#include <algorithm>
#include <istream>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "occ/csv.hpp"
#include "occ/types.hpp"

namespace occ {

struct SlotIndex {
  CalDate date;
  int slot = 0;  // hour of day, 0..23

  friend bool operator==(const SlotIndex&, const SlotIndex&) = default;
  friend bool operator<(const SlotIndex& a, const SlotIndex& b) {
    return a.date < b.date || (a.date == b.date && a.slot < b.slot);
  }
};

// Virtual ride pooling everything that ran in one hourly slot of one date.
struct AggregateRide {
  int id = 0;
  SlotIndex slot;
  long long capacity = 0;       // sum of source-ride capacities, constant over segments
  std::vector<long long> occupancy;  // per segment, 1..N_s stored 0-based
  int n_source_rides = 0;
};

struct ThresholdConfig {
  double c_low = 0.01;
  std::optional<double> c_high;  // overcrowding hook, unused by the undercrowding label
};

struct SegmentObservation {
  int ride_id = 0;  // aggregate ride id
  CalDate date;
  int time_slot = 0;
  int segment = 0;  // 1..N_s
  int y = 0;
  double load_factor = 0;
  int week_number = 0;
  DayType day_type = DayType::working;
  Season season = Season::summer;
  double temperature = 0;
  double wind_speed = 0;
  double cloud_coverage = 0;
  double humidity = 0;
  double rain = 0;

  friend bool operator==(const SegmentObservation&, const SegmentObservation&) = default;
};

// Eq-style slot pooling: one aggregate ride per (date, slot) that saw at
// least one source ride. Slot assignment uses the departure timestamp at the
// first stop; rides crossing the hour boundary stay in their departure slot.
inline std::vector<AggregateRide> aggregate_rides(const std::vector<Ride>& rides,
                                                  const RouteSpec& route) {
  const int n_seg = route.n_segments();
  std::map<SlotIndex, AggregateRide> groups;
  for (const Ride& r : rides) {
    if (static_cast<int>(r.stops.size()) != n_seg + 1)
      throw Error(ErrorKind::degenerate,
                  "ride " + r.key.str() + " has " + std::to_string(r.stops.size()) +
                      " stops, route expects " + std::to_string(n_seg + 1));
    EpochSeconds dep = r.departure_time();
    SlotIndex slot{timestamp_date(dep), timestamp_hour(dep)};
    AggregateRide& agg = groups[slot];
    if (agg.n_source_rides == 0) {
      agg.slot = slot;
      agg.occupancy.assign(n_seg, 0);
    }
    agg.capacity += r.capacity;
    for (int j = 0; j < n_seg; ++j) agg.occupancy[j] += r.stops[j].onboard_after;
    ++agg.n_source_rides;
  }
  std::vector<AggregateRide> out;
  out.reserve(groups.size());
  int id = 0;
  for (auto& [slot, agg] : groups) {
    agg.id = ++id;
    out.push_back(std::move(agg));
  }
  return out;
}

inline double load_factor(const AggregateRide& agg, int segment) {
  return static_cast<double>(agg.occupancy.at(segment - 1)) / static_cast<double>(agg.capacity);
}

// 1 iff the load factor is at or below the undercrowding threshold.
inline int label_undercrowding(double lf, const ThresholdConfig& cfg) {
  return lf <= cfg.c_low ? 1 : 0;
}

// Joins hourly aggregates with weather and service-calendar covariates,
// emitting one row per (aggregate ride, segment).
inline std::vector<SegmentObservation> join_covariates(
    const std::vector<AggregateRide>& aggregates, const std::vector<WeatherRecord>& weather,
    const std::vector<CalendarRecord>& calendar, const ThresholdConfig& cfg) {
  std::map<CalDate, const WeatherRecord*> wx;
  for (const auto& w : weather) wx[w.date] = &w;
  std::map<CalDate, const CalendarRecord*> cal;
  for (const auto& c : calendar) cal[c.date] = &c;

  std::vector<SegmentObservation> out;
  for (const AggregateRide& agg : aggregates) {
    auto w = wx.find(agg.slot.date);
    if (w == wx.end())
      throw Error(ErrorKind::coverage,
                  "no weather record for " + format_date(agg.slot.date));
    auto c = cal.find(agg.slot.date);
    if (c == cal.end())
      throw Error(ErrorKind::coverage,
                  "no calendar record for " + format_date(agg.slot.date));
    const int n_seg = static_cast<int>(agg.occupancy.size());
    for (int j = 1; j <= n_seg; ++j) {
      SegmentObservation o;
      o.ride_id = agg.id;
      o.date = agg.slot.date;
      o.time_slot = agg.slot.slot;
      o.segment = j;
      o.load_factor = load_factor(agg, j);
      o.y = label_undercrowding(o.load_factor, cfg);
      o.week_number = c->second->week_number;
      o.day_type = c->second->day_type;
      o.season = c->second->season;
      o.temperature = w->second->temperature;
      o.wind_speed = w->second->wind_speed;
      o.cloud_coverage = w->second->cloud_coverage;
      o.humidity = w->second->humidity;
      o.rain = w->second->rain;
      out.push_back(o);
    }
  }
  return out;
}

// Canonical flat interchange format consumed by the model stages.
inline void write_observations_csv(std::ostream& os, const std::vector<SegmentObservation>& obs) {
  CsvWriter w(os, {"ride_id", "date", "time_slot", "segment", "y", "load_factor", "week_number",
                   "day_type", "season", "temperature", "wind_speed", "cloud_coverage", "humidity",
                   "rain"});
  for (const auto& o : obs) {
    w.write_row({std::to_string(o.ride_id), format_date(o.date), std::to_string(o.time_slot),
                 std::to_string(o.segment), std::to_string(o.y), format_double(o.load_factor),
                 std::to_string(o.week_number), day_type_name(o.day_type), season_name(o.season),
                 format_double(o.temperature), format_double(o.wind_speed),
                 format_double(o.cloud_coverage), format_double(o.humidity),
                 format_double(o.rain)});
  }
}

inline std::vector<SegmentObservation> read_observations_csv(std::istream& is, char delim = ',') {
  CsvReader r(is, delim);
  const std::size_t c_id = r.column("ride_id"), c_date = r.column("date"),
                    c_slot = r.column("time_slot"), c_seg = r.column("segment"),
                    c_y = r.column("y"), c_lf = r.column("load_factor"),
                    c_wk = r.column("week_number"), c_dt = r.column("day_type"),
                    c_se = r.column("season"), c_t = r.column("temperature"),
                    c_w = r.column("wind_speed"), c_c = r.column("cloud_coverage"),
                    c_h = r.column("humidity"), c_rn = r.column("rain");
  std::vector<SegmentObservation> out;
  while (auto row = r.next()) {
    SegmentObservation o;
    o.ride_id = static_cast<int>(parse_int((*row)[c_id]));
    o.date = parse_date((*row)[c_date]);
    o.time_slot = static_cast<int>(parse_int((*row)[c_slot]));
    o.segment = static_cast<int>(parse_int((*row)[c_seg]));
    o.y = static_cast<int>(parse_int((*row)[c_y]));
    o.load_factor = parse_double((*row)[c_lf]);
    o.week_number = static_cast<int>(parse_int((*row)[c_wk]));
    o.day_type = parse_day_type((*row)[c_dt]);
    o.season = parse_season((*row)[c_se]);
    o.temperature = parse_double((*row)[c_t]);
    o.wind_speed = parse_double((*row)[c_w]);
    o.cloud_coverage = parse_double((*row)[c_c]);
    o.humidity = parse_double((*row)[c_h]);
    o.rain = parse_double((*row)[c_rn]);
    out.push_back(o);
  }
  return out;
}

}  // namespace occ
