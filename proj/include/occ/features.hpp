#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "occ/aggregate.hpp"
#include "occ/types.hpp"

namespace occ {

inline const std::array<std::string, 5> kWeatherColumns = {
    "temperature", "wind_speed", "cloud_coverage", "humidity", "rain"};

inline const char* weather_label(const std::string& col) {
  if (col == "temperature") return "Temperature";
  if (col == "wind_speed") return "WindSpeed";
  if (col == "cloud_coverage") return "CloudCoverage";
  if (col == "humidity") return "RelativeHumidity";
  if (col == "rain") return "Precipitation";
  return "?";
}

inline double weather_value(const SegmentObservation& o, const std::string& col) {
  if (col == "temperature") return o.temperature;
  if (col == "wind_speed") return o.wind_speed;
  if (col == "cloud_coverage") return o.cloud_coverage;
  if (col == "humidity") return o.humidity;
  if (col == "rain") return o.rain;
  throw Error(ErrorKind::config, "unknown weather column '" + col + "'");
}

struct ModelSpec {
  int degree_slot = 5;  // D_s, search range 0..10
  int degree_week = 3;  // D_w, search range 0..6
  DayType day_type_baseline = DayType::working;
  bool interact_slot_day = true;
  bool interact_day_week = true;
  bool include_season = false;
  std::vector<std::string> weather_columns = {"rain", "wind_speed"};

  static ModelSpec glmm_default() { return {}; }

  // All Table-2 style inputs: every weather factor plus the season flag.
  static ModelSpec gmerf_default() {
    ModelSpec s;
    s.include_season = true;
    s.weather_columns = {"temperature", "wind_speed", "cloud_coverage", "humidity", "rain"};
    return s;
  }
};

enum class TermKind { slot_poly, week_poly, day_dummy, season_dummy, weather, slot_x_day, day_x_week };

struct ColumnMeta {
  TermKind kind;
  int degree = 0;       // polynomial degree for slot/week terms
  DayType day = DayType::working;
  std::string weather;  // weather column name, when kind == weather
};

// Everything needed to encode new rows exactly like the training rows.
struct FeatureTransform {
  double slot_min = 0, slot_max = 1;
  double week_min = 0, week_max = 1;
  std::array<double, 5> weather_means{};  // reference values for marginal effects
  std::vector<ColumnMeta> columns;        // active columns after zero-column pruning

  double map_slot(double v) const {
    return slot_max > slot_min ? (v - slot_min) / (slot_max - slot_min) : 0.0;
  }
  double map_week(double v) const {
    return week_max > week_min ? (v - week_min) / (week_max - week_min) : 0.0;
  }
};

struct DesignMatrix {
  Eigen::MatrixXd X;            // no intercept column; the solver adds one
  Eigen::VectorXd y;
  std::vector<int> group;       // segment id per row (1..N_s)
  std::vector<int> ride_id;     // aggregate ride id per row
  FeatureTransform transform;
  ModelSpec spec;

  int n_rows() const { return static_cast<int>(X.rows()); }
  int n_cols() const { return static_cast<int>(X.cols()); }
};

namespace detail {

inline std::vector<DayType> dummy_days(const ModelSpec& spec) {
  std::vector<DayType> out;
  for (DayType d : {DayType::saturday, DayType::holiday, DayType::strike, DayType::working})
    if (d != spec.day_type_baseline) out.push_back(d);
  // keep Table-style order: Saturdays, Holidays, Strikedays (then working if not baseline)
  return out;
}

inline std::vector<ColumnMeta> full_column_set(const ModelSpec& spec) {
  std::vector<ColumnMeta> cols;
  auto days = dummy_days(spec);
  for (DayType d : days) cols.push_back({TermKind::day_dummy, 0, d, {}});
  for (int k = 1; k <= spec.degree_slot; ++k) cols.push_back({TermKind::slot_poly, k});
  for (int k = 1; k <= spec.degree_week; ++k) cols.push_back({TermKind::week_poly, k});
  for (const std::string& w : spec.weather_columns) {
    bool known = false;
    for (const auto& k : kWeatherColumns) known |= (k == w);
    if (!known) throw Error(ErrorKind::config, "unknown weather column '" + w + "'");
    cols.push_back({TermKind::weather, 0, DayType::working, w});
  }
  if (spec.include_season) cols.push_back({TermKind::season_dummy});
  if (spec.interact_slot_day)
    for (DayType d : days)
      for (int k = 1; k <= spec.degree_slot; ++k) cols.push_back({TermKind::slot_x_day, k, d, {}});
  if (spec.interact_day_week)
    for (int k = 1; k <= spec.degree_week; ++k)
      for (DayType d : days) cols.push_back({TermKind::day_x_week, k, d, {}});
  return cols;
}

inline double column_value(const ColumnMeta& c, const SegmentObservation& o,
                           const FeatureTransform& t) {
  switch (c.kind) {
    case TermKind::slot_poly:
      return std::pow(t.map_slot(o.time_slot), c.degree);
    case TermKind::week_poly:
      return std::pow(t.map_week(o.week_number), c.degree);
    case TermKind::day_dummy:
      return o.day_type == c.day ? 1.0 : 0.0;
    case TermKind::season_dummy:
      return o.season == Season::winter ? 1.0 : 0.0;
    case TermKind::weather:
      return weather_value(o, c.weather);
    case TermKind::slot_x_day:
      return o.day_type == c.day ? std::pow(t.map_slot(o.time_slot), c.degree) : 0.0;
    case TermKind::day_x_week:
      return o.day_type == c.day ? std::pow(t.map_week(o.week_number), c.degree) : 0.0;
  }
  return 0.0;
}

}  // namespace detail

inline std::string column_label(const ColumnMeta& c) {
  auto day_label = [](DayType d) -> std::string {
    switch (d) {
      case DayType::working: return "Working days";
      case DayType::saturday: return "Saturdays";
      case DayType::holiday: return "Holidays";
      case DayType::strike: return "Strikedays";
    }
    return "?";
  };
  switch (c.kind) {
    case TermKind::slot_poly: return "Time slot [^" + std::to_string(c.degree) + "]";
    case TermKind::week_poly: return "Week [^" + std::to_string(c.degree) + "]";
    case TermKind::day_dummy: return "Day type [" + day_label(c.day) + "]";
    case TermKind::season_dummy: return "Season [Winter]";
    case TermKind::weather: return weather_label(c.weather);
    case TermKind::slot_x_day:
      return "Time slot [^" + std::to_string(c.degree) + "] * Day type [" + day_label(c.day) + "]";
    case TermKind::day_x_week:
      return "Day type [" + day_label(c.day) + "] * Week [^" + std::to_string(c.degree) + "]";
  }
  return "?";
}

// Encode rows with an existing transform (the training transform for test or
// scenario rows).
inline Eigen::MatrixXd encode_rows(const std::vector<SegmentObservation>& obs,
                                   const FeatureTransform& t) {
  Eigen::MatrixXd X(static_cast<Eigen::Index>(obs.size()),
                    static_cast<Eigen::Index>(t.columns.size()));
  for (std::size_t i = 0; i < obs.size(); ++i)
    for (std::size_t j = 0; j < t.columns.size(); ++j)
      X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          detail::column_value(t.columns[j], obs[i], t);
  return X;
}

// Build the fixed-effects design: affinely mapped polynomial bases, day-type
// dummies against the baseline, weather columns, and the two interaction
// families. Identically-zero columns (e.g. a day type absent from the data)
// are pruned and the pruning is recorded in the transform.
inline DesignMatrix build_design(const std::vector<SegmentObservation>& obs,
                                 const ModelSpec& spec) {
  if (obs.empty()) throw Error(ErrorKind::degenerate, "no observations to encode");
  DesignMatrix d;
  d.spec = spec;

  FeatureTransform& t = d.transform;
  t.slot_min = t.slot_max = obs.front().time_slot;
  t.week_min = t.week_max = obs.front().week_number;
  for (const auto& o : obs) {
    t.slot_min = std::min(t.slot_min, static_cast<double>(o.time_slot));
    t.slot_max = std::max(t.slot_max, static_cast<double>(o.time_slot));
    t.week_min = std::min(t.week_min, static_cast<double>(o.week_number));
    t.week_max = std::max(t.week_max, static_cast<double>(o.week_number));
  }
  for (std::size_t w = 0; w < kWeatherColumns.size(); ++w) {
    double s = 0;
    for (const auto& o : obs) s += weather_value(o, kWeatherColumns[w]);
    t.weather_means[w] = s / static_cast<double>(obs.size());
  }

  auto cols = detail::full_column_set(spec);
  // prune identically-zero columns
  t.columns.clear();
  for (const auto& c : cols) {
    bool any = false;
    for (const auto& o : obs)
      if (detail::column_value(c, o, t) != 0.0) {
        any = true;
        break;
      }
    if (any) t.columns.push_back(c);
  }

  d.X = encode_rows(obs, t);
  d.y.resize(static_cast<Eigen::Index>(obs.size()));
  d.group.resize(obs.size());
  d.ride_id.resize(obs.size());
  for (std::size_t i = 0; i < obs.size(); ++i) {
    d.y[static_cast<Eigen::Index>(i)] = obs[i].y;
    d.group[i] = obs[i].segment;
    d.ride_id[i] = obs[i].ride_id;
  }
  return d;
}

// Human-readable term table in Table-4 row style, one label per design column.
inline std::vector<std::string> describe_columns(const DesignMatrix& d) {
  std::vector<std::string> out;
  out.reserve(d.transform.columns.size());
  for (const auto& c : d.transform.columns) out.push_back(column_label(c));
  return out;
}

}  // namespace occ
