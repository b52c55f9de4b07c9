#pragma once

#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "occ/csv.hpp"
#include "occ/types.hpp"

namespace occ {

// Column mapping for the signal stream. Defaults follow the documented schema;
// override names when a feed uses different headers.
struct SignalSchema {
  char delimiter = ',';
  std::string date = "date";
  std::string route = "route";
  std::string table_no = "table";
  std::string ride_no = "ride";
  std::string direction = "direction";
  std::string vehicle = "vehicle";
  std::string vehicle_type = "vehicle_type";
  std::string path = "path";
  std::string timestamp = "timestamp";
  std::string noise = "noise";
  std::string status = "status";
  std::string diverted_route = "diverted_route";
  std::string stop = "stop";
  std::string apc_info_type = "apc_info_type";
  std::string inf1 = "inf1";
  std::string inf2 = "inf2";
  std::string inf3 = "inf3";
};

struct ParseDiagnostic {
  std::size_t line_no = 0;
  std::string message;
};

struct ParseResult {
  std::vector<RawSignal> signals;
  std::vector<ParseDiagnostic> diagnostics;
};

namespace detail {

inline std::optional<int> opt_count(const std::string& cell, const char* what) {
  if (cell.empty()) return std::nullopt;
  int v = static_cast<int>(parse_int(cell));
  if (v < 0) throw Error(ErrorKind::schema, std::string(what) + " is negative");
  return v;
}

}  // namespace detail

// Parses the raw signal stream. In lenient mode malformed rows become
// line-numbered diagnostics; in strict mode the first bad row aborts the file.
inline ParseResult parse_signals(std::istream& in, const SignalSchema& schema,
                                 bool strict = false) {
  ParseResult out;
  CsvReader r(in, schema.delimiter);
  // fail fast on missing mandatory columns
  const std::size_t c_date = r.column(schema.date), c_route = r.column(schema.route),
                    c_table = r.column(schema.table_no), c_ride = r.column(schema.ride_no),
                    c_dir = r.column(schema.direction), c_veh = r.column(schema.vehicle),
                    c_vt = r.column(schema.vehicle_type), c_path = r.column(schema.path),
                    c_ts = r.column(schema.timestamp), c_noise = r.column(schema.noise),
                    c_status = r.column(schema.status), c_stop = r.column(schema.stop),
                    c_apc = r.column(schema.apc_info_type), c_i1 = r.column(schema.inf1),
                    c_i2 = r.column(schema.inf2), c_i3 = r.column(schema.inf3);
  const bool has_div = r.has_column(schema.diverted_route);
  const std::size_t c_div = has_div ? r.column(schema.diverted_route) : 0;

  while (auto row_opt = r.next()) {
    const auto& row = *row_opt;
    try {
      if (row.size() < r.header().size())
        throw Error(ErrorKind::schema, "row has " + std::to_string(row.size()) +
                                           " cells, expected " +
                                           std::to_string(r.header().size()));
      RawSignal s;
      s.date = parse_date(row[c_date]);
      s.route = row[c_route];
      s.table_no = static_cast<int>(parse_int(row[c_table]));
      s.ride_no = static_cast<int>(parse_int(row[c_ride]));
      int dir = static_cast<int>(parse_int(row[c_dir]));
      if (dir < 0 || dir > 2) throw Error(ErrorKind::schema, "unknown direction code");
      s.direction = static_cast<Direction>(dir);
      s.vehicle = row[c_veh];
      int vt = static_cast<int>(parse_int(row[c_vt]));
      if (vt < 0 || vt > 2) throw Error(ErrorKind::schema, "unknown vehicle type code");
      s.vehicle_type = static_cast<VehicleType>(vt);
      s.path = row[c_path];
      s.timestamp = parse_timestamp(row[c_ts]);
      s.noise = parse_int(row[c_noise]) != 0;
      s.status = static_cast<int>(parse_int(row[c_status]));
      if (has_div && !row[c_div].empty()) s.diverted_route = row[c_div];
      s.stop = row[c_stop];
      int apc = static_cast<int>(parse_int(row[c_apc]));
      if (apc != 0 && apc != 2 && apc != 7)
        throw Error(ErrorKind::schema, "unknown apc_info_type code " + std::to_string(apc));
      s.apc_info_type = static_cast<ApcInfoType>(apc);
      s.inf1 = detail::opt_count(row[c_i1], "inf1");
      s.inf2 = detail::opt_count(row[c_i2], "inf2");
      s.inf3 = detail::opt_count(row[c_i3], "inf3");

      switch (s.apc_info_type) {
        case ApcInfoType::none:
          if (s.inf1 || s.inf2 || s.inf3)
            throw Error(ErrorKind::schema, "counts present without info type");
          break;
        case ApcInfoType::per_stop:
          if (s.inf1) throw Error(ErrorKind::schema, "inf1 present for per-stop info type");
          if (!s.inf2 || !s.inf3)
            throw Error(ErrorKind::schema, "per-stop signal missing inf2/inf3");
          break;
        case ApcInfoType::cumulative:
          if (!s.inf2 || !s.inf3)
            throw Error(ErrorKind::schema, "cumulative signal missing inf2/inf3");
          break;
      }
      if (timestamp_date(s.timestamp) != s.date)
        throw Error(ErrorKind::schema, "timestamp outside the record's date");
      out.signals.push_back(std::move(s));
    } catch (const Error& e) {
      if (strict)
        throw Error(ErrorKind::schema,
                    "line " + std::to_string(r.line_no()) + ": " + e.what());
      out.diagnostics.push_back({r.line_no(), e.what()});
    }
  }
  return out;
}

inline void write_signals_csv(std::ostream& os, const std::vector<RawSignal>& signals,
                              const SignalSchema& schema = {}) {
  CsvWriter w(os,
              {schema.date, schema.route, schema.table_no, schema.ride_no, schema.direction,
               schema.vehicle, schema.vehicle_type, schema.path, schema.timestamp, schema.noise,
               schema.status, schema.diverted_route, schema.stop, schema.apc_info_type,
               schema.inf1, schema.inf2, schema.inf3},
              schema.delimiter);
  auto opt = [](const std::optional<int>& v) { return v ? std::to_string(*v) : std::string{}; };
  for (const RawSignal& s : signals) {
    w.write_row({format_date(s.date), s.route, std::to_string(s.table_no),
                 std::to_string(s.ride_no), std::to_string(static_cast<int>(s.direction)),
                 s.vehicle, std::to_string(static_cast<int>(s.vehicle_type)), s.path,
                 format_timestamp(s.timestamp), s.noise ? "1" : "0", std::to_string(s.status),
                 s.diverted_route.value_or(""), s.stop,
                 std::to_string(static_cast<int>(s.apc_info_type)), opt(s.inf1), opt(s.inf2),
                 opt(s.inf3)});
  }
}

// Rebuilds one-row-per-stop ride records from grouped signals.
//
// Per-stop counts come from first differences of cumulative counters (type 7)
// or directly (type 2). Multiple signals at one stop collapse to the last
// non-noise signal. Stops with no signal stay in the record with zero flow so
// the on-board chain and segment count remain well defined; their share feeds
// missing_fraction. Non-monotone cumulative counters mark the stop as an
// outlier candidate instead of being repaired.
inline std::vector<Ride> reconstruct_rides(const std::vector<RawSignal>& signals,
                                           const RouteSpec& route_spec) {
  std::map<RideKey, std::vector<const RawSignal*>> groups;
  for (const RawSignal& s : signals) {
    groups[RideKey{s.date, s.route, s.table_no, s.ride_no, s.direction}].push_back(&s);
  }

  std::vector<Ride> rides;
  rides.reserve(groups.size());
  const int n_stops = route_spec.n_stops();

  for (auto& [key, sigs] : groups) {
    std::stable_sort(sigs.begin(), sigs.end(),
                     [](const RawSignal* a, const RawSignal* b) {
                       return a->timestamp < b->timestamp;
                     });
    Ride ride;
    ride.key = key;
    ride.vehicle = sigs.front()->vehicle;
    ride.vehicle_type = sigs.front()->vehicle_type;
    ride.path = sigs.front()->path;
    ride.capacity = route_spec.capacity_for(ride.vehicle_type);

    int noisy = 0;
    std::map<int, const RawSignal*> kept;  // stop_index -> chosen signal
    for (const RawSignal* s : sigs) {
      if (s->noise) ++noisy;
      ride.statuses.insert(s->status);
      if (s->diverted_route) ride.diverted = true;
      ride.observed_stops.push_back(s->stop);
      int idx = route_spec.stop_index(s->stop);
      if (idx == 0) {
        ride.diagnostics.push_back("signal at unknown stop '" + s->stop + "'");
        continue;
      }
      auto it = kept.find(idx);
      // last non-noise signal wins; noise only replaces noise
      if (it == kept.end() || !s->noise || it->second->noise) kept[idx] = s;
    }
    ride.quality.noise_fraction = sigs.empty() ? 0.0
                                               : static_cast<double>(noisy) /
                                                     static_cast<double>(sigs.size());

    // cumulative baselines for type-7 differencing
    int cum_board_prev = 0, cum_alight_prev = 0;
    int onboard = 0;
    int missing = 0;
    std::vector<StopRecord> stops(n_stops);
    for (int idx = 1; idx <= n_stops; ++idx) {
      StopRecord& rec = stops[idx - 1];
      rec.stop_index = idx;
      rec.stop_id = route_spec.stops[idx - 1];
      auto it = kept.find(idx);
      if (it == kept.end()) {
        rec.observed = false;
        rec.boarded = 0;
        rec.alighted = 0;
        ++missing;
      } else {
        const RawSignal* s = it->second;
        rec.observed = true;
        rec.timestamp = s->timestamp;
        switch (s->apc_info_type) {
          case ApcInfoType::per_stop:
            rec.boarded = s->inf2.value_or(0);
            rec.alighted = s->inf3.value_or(0);
            break;
          case ApcInfoType::cumulative: {
            int cb = s->inf2.value_or(0), ca = s->inf3.value_or(0);
            if (cb < cum_board_prev || ca < cum_alight_prev) {
              ride.quality.outlier_stop_indices.insert(idx);
              ride.diagnostics.push_back("non-monotone cumulative counter at stop " +
                                         std::to_string(idx));
            }
            rec.boarded = std::max(cb - cum_board_prev, 0);
            rec.alighted = std::max(ca - cum_alight_prev, 0);
            cum_board_prev = std::max(cb, cum_board_prev);
            cum_alight_prev = std::max(ca, cum_alight_prev);
            break;
          }
          case ApcInfoType::none:
            rec.boarded = 0;
            rec.alighted = 0;
            break;
        }
      }
      onboard += rec.boarded - rec.alighted;
      if (onboard < 0) {
        ride.diagnostics.push_back("negative on-board count clipped at stop " +
                                   std::to_string(idx));
        onboard = 0;
      }
      rec.onboard_after = onboard;
    }
    ride.quality.missing_fraction =
        static_cast<double>(missing) / static_cast<double>(n_stops);

    // timestamps for unobserved stops: interpolate between observed neighbours
    int prev_obs = -1;
    for (int i = 0; i < n_stops; ++i) {
      if (!stops[i].observed) continue;
      if (prev_obs >= 0 && i - prev_obs > 1) {
        EpochSeconds t0 = stops[prev_obs].timestamp, t1 = stops[i].timestamp;
        for (int k = prev_obs + 1; k < i; ++k)
          stops[k].timestamp =
              t0 + (t1 - t0) * static_cast<EpochSeconds>(k - prev_obs) /
                       static_cast<EpochSeconds>(i - prev_obs);
      } else if (prev_obs < 0) {
        for (int k = 0; k < i; ++k) stops[k].timestamp = stops[i].timestamp;
      }
      prev_obs = i;
    }
    if (prev_obs >= 0)
      for (int k = prev_obs + 1; k < n_stops; ++k) stops[k].timestamp = stops[prev_obs].timestamp;

    ride.stops = std::move(stops);
    rides.push_back(std::move(ride));
  }
  return rides;
}

namespace detail {

inline std::vector<WeatherRecord> parse_weather_csv(std::istream& in, char delim) {
  CsvReader r(in, delim);
  const std::size_t c_date = r.column("date"), c_t = r.column("temperature"),
                    c_w = r.column("wind_speed"), c_c = r.column("cloud_coverage"),
                    c_h = r.column("humidity"), c_r = r.column("rain");
  std::vector<WeatherRecord> out;
  while (auto row = r.next()) {
    WeatherRecord w;
    w.date = parse_date((*row)[c_date]);
    w.temperature = parse_double((*row)[c_t]);
    w.wind_speed = parse_double((*row)[c_w]);
    w.cloud_coverage = parse_double((*row)[c_c]);
    w.humidity = parse_double((*row)[c_h]);
    w.rain = parse_double((*row)[c_r]);
    if (w.cloud_coverage < 0 || w.cloud_coverage > 100 || w.humidity < 0 || w.humidity > 100 ||
        w.rain < 0)
      throw Error(ErrorKind::schema,
                  "weather record out of range on " + format_date(w.date));
    out.push_back(w);
  }
  return out;
}

inline void check_weather_coverage(const std::vector<WeatherRecord>& recs, const CalDate& first,
                                   const CalDate& last) {
  std::map<CalDate, int> seen;
  for (const auto& r : recs) ++seen[r.date];
  std::string gaps;
  for (std::int64_t d = days_from_civil(first); d <= days_from_civil(last); ++d) {
    CalDate c = civil_from_days(d);
    if (!seen.count(c)) {
      if (!gaps.empty()) gaps += ", ";
      gaps += format_date(c);
    }
  }
  if (!gaps.empty())
    throw Error(ErrorKind::coverage, "weather coverage gaps: " + gaps);
  for (const auto& [date, count] : seen)
    if (count > 1)
      throw Error(ErrorKind::schema, "duplicate weather record on " + format_date(date));
}

}  // namespace detail

struct WeatherEndpoint {
  std::string host;         // e.g. "archive.example.org" or "localhost"
  int port = 80;
  std::string path_format;  // printf-style with %s lat, %s lon, %s start, %s end
  std::string latitude = "45.46";
  std::string longitude = "9.19";
  std::string cache_dir;    // responses cached here for offline re-runs
};

// File-mode weather loader: exactly one record per date in [first, last].
inline std::vector<WeatherRecord> load_weather(std::istream& in, const CalDate& first,
                                               const CalDate& last, char delim = ',') {
  auto recs = detail::parse_weather_csv(in, delim);
  detail::check_weather_coverage(recs, first, last);
  std::vector<WeatherRecord> out;
  for (const auto& r : recs)
    if (r.date >= first && r.date <= last) out.push_back(r);
  std::sort(out.begin(), out.end(),
            [](const WeatherRecord& a, const WeatherRecord& b) { return a.date < b.date; });
  return out;
}

inline std::vector<WeatherRecord> load_weather_file(const std::string& path, const CalDate& first,
                                                    const CalDate& last, char delim = ',') {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::config, "cannot open weather file '" + path + "'");
  return load_weather(in, first, last, delim);
}

// Endpoint mode lives in occ/weather_http.hpp (load_weather_endpoint) so only
// translation units that actually fetch pay for the HTTP client.

// Calendar loader; week numbers are anchored so the week starting at the
// earliest date in the file is week 1.
inline std::vector<CalendarRecord> load_calendar(std::istream& in, char delim = ',') {
  CsvReader r(in, delim);
  const std::size_t c_date = r.column("date"), c_dt = r.column("day_type"),
                    c_season = r.column("season");
  std::vector<CalendarRecord> out;
  std::map<CalDate, int> seen;
  for (auto row = r.next(); row; row = r.next()) {
    CalendarRecord c;
    c.date = parse_date((*row)[c_date]);
    c.day_type = parse_day_type((*row)[c_dt]);
    c.season = parse_season((*row)[c_season]);
    if (++seen[c.date] > 1)
      throw Error(ErrorKind::schema, "duplicate calendar date " + format_date(c.date));
    out.push_back(c);
  }
  if (out.empty()) return out;
  std::sort(out.begin(), out.end(),
            [](const CalendarRecord& a, const CalendarRecord& b) { return a.date < b.date; });
  const std::int64_t anchor = days_from_civil(out.front().date);
  for (auto& c : out)
    c.week_number = static_cast<int>((days_from_civil(c.date) - anchor) / 7) + 1;
  return out;
}

inline std::vector<CalendarRecord> load_calendar_file(const std::string& path, char delim = ',') {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::config, "cannot open calendar file '" + path + "'");
  return load_calendar(in, delim);
}

inline void write_weather_csv(std::ostream& os, const std::vector<WeatherRecord>& recs) {
  CsvWriter w(os, {"date", "temperature", "wind_speed", "cloud_coverage", "humidity", "rain"});
  for (const auto& r : recs)
    w.write_row({format_date(r.date), format_double(r.temperature), format_double(r.wind_speed),
                 format_double(r.cloud_coverage), format_double(r.humidity),
                 format_double(r.rain)});
}

inline void write_calendar_csv(std::ostream& os, const std::vector<CalendarRecord>& recs) {
  CsvWriter w(os, {"date", "day_type", "season"});
  for (const auto& r : recs)
    w.write_row({format_date(r.date), day_type_name(r.day_type), season_name(r.season)});
}

}  // namespace occ
