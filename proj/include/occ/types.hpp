#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "occ/common.hpp"
#include "occ/dates.hpp"

namespace occ {

enum class Direction : int { outbound = 0, inbound = 1, not_in_transit = 2 };
enum class VehicleType : int { tram = 0, bus = 1, missing = 2 };
enum class ApcInfoType : int { none = 0, per_stop = 2, cumulative = 7 };

// Service status codes carried by the AVL stream. The raw feed uses small
// integers; anything outside this table is kept verbatim and reported as a
// diagnostic during anomaly detection.
enum class ServiceStatus : int { in_transit = 0, depot = 1, breakdown = 2, interrupted = 3 };

enum class DayType : int { working = 0, strike = 1, saturday = 2, holiday = 3 };
enum class Season : int { summer = 0, winter = 1 };
enum class AnomalyCode : int { depot = 0, breakdown = 1, interrupted = 2, detour = 3 };

inline const char* day_type_name(DayType d) {
  switch (d) {
    case DayType::working: return "working";
    case DayType::strike: return "strike";
    case DayType::saturday: return "saturday";
    case DayType::holiday: return "holiday";
  }
  return "?";
}

inline DayType parse_day_type(const std::string& s) {
  if (s == "working") return DayType::working;
  if (s == "strike") return DayType::strike;
  if (s == "saturday") return DayType::saturday;
  if (s == "holiday") return DayType::holiday;
  throw Error(ErrorKind::schema, "unknown day type '" + s + "'");
}

inline const char* season_name(Season s) { return s == Season::summer ? "summer" : "winter"; }

inline Season parse_season(const std::string& s) {
  if (s == "summer") return Season::summer;
  if (s == "winter") return Season::winter;
  throw Error(ErrorKind::schema, "unknown season '" + s + "'");
}

inline const char* anomaly_name(AnomalyCode a) {
  switch (a) {
    case AnomalyCode::depot: return "depot";
    case AnomalyCode::breakdown: return "breakdown";
    case AnomalyCode::interrupted: return "interrupted";
    case AnomalyCode::detour: return "detour";
  }
  return "?";
}

// One APC/AVL system message.
struct RawSignal {
  CalDate date;
  std::string route;
  int table_no = 0;
  int ride_no = 0;
  Direction direction = Direction::outbound;
  std::string vehicle;
  VehicleType vehicle_type = VehicleType::bus;
  std::string path;
  EpochSeconds timestamp = 0;
  bool noise = false;
  int status = 0;
  std::optional<std::string> diverted_route;
  std::string stop;
  ApcInfoType apc_info_type = ApcInfoType::none;
  std::optional<int> inf1;  // on-board (type 7)
  std::optional<int> inf2;  // boarding (type 2) / cumulative boarding (type 7)
  std::optional<int> inf3;  // alighting (type 2) / cumulative alighting (type 7)
};

struct RideKey {
  CalDate date;
  std::string route;
  int table_no = 0;
  int ride_no = 0;
  Direction direction = Direction::outbound;

  friend bool operator==(const RideKey&, const RideKey&) = default;
  friend bool operator<(const RideKey& a, const RideKey& b) {
    return std::tie(a.date, a.route, a.table_no, a.ride_no, a.direction) <
           std::tie(b.date, b.route, b.table_no, b.ride_no, b.direction);
  }

  std::string str() const {
    return format_date(date) + "/" + route + "/t" + std::to_string(table_no) + "/r" +
           std::to_string(ride_no) + "/d" + std::to_string(static_cast<int>(direction));
  }
};

struct StopRecord {
  int stop_index = 0;  // 1-based position along the route
  std::string stop_id;
  int boarded = 0;
  int alighted = 0;
  int onboard_after = 0;
  EpochSeconds timestamp = 0;
  bool observed = true;  // false when no signal covered this stop
};

struct QualityFlags {
  double noise_fraction = 0.0;
  double missing_fraction = 0.0;
  std::set<int> outlier_stop_indices;
  std::set<AnomalyCode> anomaly_codes;
};

struct Ride {
  RideKey key;
  std::string vehicle;
  VehicleType vehicle_type = VehicleType::bus;
  std::string path;
  int capacity = 0;  // passenger places, seats + standing
  std::vector<StopRecord> stops;
  QualityFlags quality;
  std::set<int> statuses;                  // distinct service-status codes seen
  std::vector<std::string> observed_stops; // stop ids in signal order (detour check)
  bool diverted = false;                   // any signal carried a diverted-route id
  std::vector<std::string> diagnostics;

  EpochSeconds departure_time() const {
    return stops.empty() ? 0 : stops.front().timestamp;
  }
};

struct WeatherRecord {
  CalDate date;
  double temperature = 0;     // degC
  double wind_speed = 0;      // km/h
  double cloud_coverage = 0;  // %
  double humidity = 0;        // %
  double rain = 0;            // mm

  friend bool operator==(const WeatherRecord&, const WeatherRecord&) = default;
};

struct CalendarRecord {
  CalDate date;
  DayType day_type = DayType::working;
  Season season = Season::summer;
  int week_number = 0;  // week of the first study date = 1

  friend bool operator==(const CalendarRecord&, const CalendarRecord&) = default;
};

// Expected stop sequence of a route variant plus the capacity lookup.
struct RouteSpec {
  std::string route;
  std::string path;
  std::vector<std::string> stops;  // ordered, e.g. 19 stops -> 18 segments
  std::map<VehicleType, int> capacity;

  int n_stops() const { return static_cast<int>(stops.size()); }
  int n_segments() const { return n_stops() - 1; }

  int stop_index(const std::string& stop_id) const {  // 1-based, 0 if unknown
    for (std::size_t i = 0; i < stops.size(); ++i)
      if (stops[i] == stop_id) return static_cast<int>(i) + 1;
    return 0;
  }

  int capacity_for(VehicleType vt) const {
    auto it = capacity.find(vt);
    if (it == capacity.end())
      throw Error(ErrorKind::config, "no capacity configured for vehicle type " +
                                         std::to_string(static_cast<int>(vt)));
    return it->second;
  }
};

}  // namespace occ
