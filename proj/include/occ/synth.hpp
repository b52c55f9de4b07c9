#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "occ/aggregate.hpp"
#include "occ/features.hpp"
#include "occ/ingest.hpp"
#include "occ/mathutil.hpp"
#include "occ/types.hpp"

namespace occ {

struct NonlinearDescriptor {
  enum class Kind { none, xor_slot_week, threshold_slot_day };
  Kind kind = Kind::none;
  double base = -1.0;
  double amplitude = 3.0;
  double slot_cut = 0.5;  // on the [0,1]-mapped scale
  double week_cut = 0.5;
};

struct FaultRates {
  double noise = 0;             // per ride
  double missing = 0;           // per ride
  double all_zero_vehicle = 0;  // per vehicle-day
  double one_sided_vehicle = 0; // per vehicle-day
  double spike = 0;             // per ride
  double anomaly = 0;           // per ride
};

struct SynthScenario {
  CalDate start_date{2022, 6, 6};
  int n_dates = 28;
  int slot_lo = 6;
  int slot_hi = 21;
  double rides_per_slot_mean = 1.5;  // realized as 1..3 source rides
  int n_segments = 18;
  int capacity_tram = 180;
  int capacity_bus = 80;
  int n_vehicles = 6;
  ApcInfoType signal_type = ApcInfoType::cumulative;
  double c_low = 0.01;

  // Eq-5 style truth for model-mode generation
  ModelSpec model_spec;
  std::vector<double> beta;       // intercept first, aligned with the encoded design
  double sigma_z2 = 1.0;
  std::vector<double> segment_z;  // explicit intercepts; empty -> drawn N(0, sigma_z2)
  NonlinearDescriptor nonlinear;

  FaultRates faults;
  std::uint64_t seed = 0;
};

struct FaultLabels {
  std::set<RideKey> noise_rides;
  std::set<RideKey> missing_rides;
  std::map<std::string, std::set<std::string>> all_zero_vehicle_days;   // vehicle -> dates
  std::map<std::string, std::set<std::string>> one_sided_vehicle_days;  // vehicle -> dates
  std::set<std::pair<std::string, int>> spike_stops;  // (ride key string, stop_index)
  std::set<RideKey> anomaly_rides;
};

struct SimulatedWorld {
  RouteSpec route;
  std::vector<RawSignal> signals;
  std::vector<WeatherRecord> weather;
  std::vector<CalendarRecord> calendar;
  std::vector<Ride> rides_truth;  // pre-fault physical rides
  std::vector<SegmentObservation> expected_observations;  // zero-fault pipeline output
  FaultLabels faults;
};

struct SynthTruth {
  std::vector<double> z;  // per segment 1..N_s
  std::vector<double> eta;
  std::vector<double> beta;
  FeatureTransform transform;
};

namespace synth_detail {

struct DayInfo {
  CalDate date;
  DayType day_type;
  Season season;
  int week_number;
  WeatherRecord weather;
};

// Weekly day-type cycle with a sparse strike override, seasonal-sinusoid
// weather with AR(1) noise.
inline std::vector<DayInfo> build_days(const SynthScenario& sc, std::mt19937_64& rng) {
  std::vector<DayInfo> days;
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  double ar_t = 0, ar_c = 0, ar_h = 0, ar_w = 0;
  for (int d = 0; d < sc.n_dates; ++d) {
    DayInfo day;
    day.date = add_days(sc.start_date, d);
    int wd = d % 7;
    if (wd == 5)
      day.day_type = DayType::saturday;
    else if (wd == 6)
      day.day_type = DayType::holiday;
    else
      day.day_type = d % 23 == 11 ? DayType::strike : DayType::working;
    day.season = d < sc.n_dates / 2 ? Season::summer : Season::winter;
    day.week_number = d / 7 + 1;

    ar_t = 0.7 * ar_t + gauss(rng);
    ar_c = 0.6 * ar_c + gauss(rng);
    ar_h = 0.6 * ar_h + gauss(rng);
    ar_w = 0.5 * ar_w + gauss(rng);
    WeatherRecord w;
    w.date = day.date;
    w.temperature = 20.0 + 9.0 * std::cos(2.0 * M_PI * d / 365.0) + 2.0 * ar_t;
    w.wind_speed = std::max(0.4, 6.0 + 2.5 * ar_w);
    w.cloud_coverage = std::clamp(35.0 + 25.0 * ar_c, 0.0, 100.0);
    w.humidity = std::clamp(64.0 + 14.0 * ar_h, 21.0, 100.0);
    w.rain = unif(rng) < 0.12 ? std::min(8.2, -1.5 * std::log(unif(rng) + 1e-12)) : 0.0;
    day.weather = w;
    days.push_back(day);
  }
  return days;
}

inline SegmentObservation base_observation(const DayInfo& day, int slot, int segment) {
  SegmentObservation o;
  o.date = day.date;
  o.time_slot = slot;
  o.segment = segment;
  o.week_number = day.week_number;
  o.day_type = day.day_type;
  o.season = day.season;
  o.temperature = day.weather.temperature;
  o.wind_speed = day.weather.wind_speed;
  o.cloud_coverage = day.weather.cloud_coverage;
  o.humidity = day.weather.humidity;
  o.rain = day.weather.rain;
  return o;
}

}  // namespace synth_detail

// Model-mode generator: covariates plus Bernoulli responses drawn from the
// mixed-logit truth (or the nonlinear descriptor). The load_factor column is
// filled consistently with the sampled label but carries no physical meaning.
inline std::pair<std::vector<SegmentObservation>, SynthTruth> generate_observations(
    const SynthScenario& sc) {
  std::mt19937_64 rng(sc.seed);
  auto days = synth_detail::build_days(sc, rng);

  std::vector<SegmentObservation> obs;
  int ride_id = 0;
  for (const auto& day : days) {
    for (int slot = sc.slot_lo; slot <= sc.slot_hi; ++slot) {
      ++ride_id;
      for (int j = 1; j <= sc.n_segments; ++j) {
        SegmentObservation o = synth_detail::base_observation(day, slot, j);
        o.ride_id = ride_id;
        obs.push_back(o);
      }
    }
  }

  SynthTruth truth;
  truth.z.resize(sc.n_segments);
  if (!sc.segment_z.empty()) {
    if (static_cast<int>(sc.segment_z.size()) != sc.n_segments)
      throw Error(ErrorKind::config, "segment_z length must equal n_segments");
    truth.z = sc.segment_z;
  } else {
    std::normal_distribution<double> gz(0.0, std::sqrt(std::max(sc.sigma_z2, 0.0)));
    for (auto& z : truth.z) z = sc.sigma_z2 > 0 ? gz(rng) : 0.0;
  }

  std::uniform_real_distribution<double> unif(0.0, 1.0);
  truth.eta.resize(obs.size());
  if (sc.nonlinear.kind == NonlinearDescriptor::Kind::none) {
    DesignMatrix d = build_design(obs, sc.model_spec);
    truth.transform = d.transform;
    if (static_cast<Eigen::Index>(sc.beta.size()) != d.X.cols() + 1)
      throw Error(ErrorKind::config,
                  "beta has " + std::to_string(sc.beta.size()) + " entries, design needs " +
                      std::to_string(d.X.cols() + 1) + " (intercept + columns)");
    truth.beta = sc.beta;
    for (std::size_t i = 0; i < obs.size(); ++i) {
      double eta = sc.beta[0];
      for (Eigen::Index c = 0; c < d.X.cols(); ++c)
        eta += sc.beta[static_cast<std::size_t>(c) + 1] * d.X(static_cast<Eigen::Index>(i), c);
      eta += truth.z[obs[i].segment - 1];
      truth.eta[i] = eta;
    }
  } else {
    double slot_min = sc.slot_lo, slot_max = sc.slot_hi;
    double week_min = 1, week_max = days.back().week_number;
    truth.transform.slot_min = slot_min;
    truth.transform.slot_max = slot_max;
    truth.transform.week_min = week_min;
    truth.transform.week_max = week_max;
    for (std::size_t i = 0; i < obs.size(); ++i) {
      const auto& o = obs[i];
      double sm = slot_max > slot_min ? (o.time_slot - slot_min) / (slot_max - slot_min) : 0.0;
      double wm = week_max > week_min ? (o.week_number - week_min) / (week_max - week_min) : 0.0;
      double f = sc.nonlinear.base;
      if (sc.nonlinear.kind == NonlinearDescriptor::Kind::xor_slot_week) {
        bool a = sm > sc.nonlinear.slot_cut, b = wm > sc.nonlinear.week_cut;
        if (a != b) f += sc.nonlinear.amplitude;
      } else {  // threshold_slot_day
        if (sm > sc.nonlinear.slot_cut && o.day_type == DayType::holiday)
          f += sc.nonlinear.amplitude;
      }
      truth.eta[i] = f + truth.z[o.segment - 1];
    }
  }

  for (std::size_t i = 0; i < obs.size(); ++i) {
    obs[i].y = unif(rng) < logistic(truth.eta[i]) ? 1 : 0;
    obs[i].load_factor = obs[i].y ? sc.c_low * 0.5 : sc.c_low * 5.0;
  }
  return {std::move(obs), std::move(truth)};
}

// Physical-mode simulation: per-ride stop flows rendered as an APC/AVL signal
// stream, with configured fault classes injected and labelled. The expected
// observations are derived with plain sums so pipeline runs can be checked
// against an independent path.
inline SimulatedWorld simulate_world(const SynthScenario& sc) {
  std::mt19937_64 rng(sc.seed);
  SimulatedWorld world;

  world.route.route = "R90";
  world.route.path = "P1";
  for (int s = 1; s <= sc.n_segments + 1; ++s)
    world.route.stops.push_back("S" + std::to_string(s));
  world.route.capacity[VehicleType::tram] = sc.capacity_tram;
  world.route.capacity[VehicleType::bus] = sc.capacity_bus;
  world.route.capacity[VehicleType::missing] = sc.capacity_bus;

  auto days = synth_detail::build_days(sc, rng);
  for (const auto& d : days) {
    world.weather.push_back(d.weather);
    world.calendar.push_back({d.date, d.day_type, d.season, d.week_number});
  }

  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const int n_stops = sc.n_segments + 1;

  struct PhysicalRide {
    Ride ride;
    bool faulty = false;  // any fault that perturbs this ride's signals
  };
  std::vector<PhysicalRide> physical;

  int table_no = 0;
  for (const auto& day : days) {
    // vehicles rotate within the day; types alternate tram/bus
    int vehicle_cursor = 0;
    for (int slot = sc.slot_lo; slot <= sc.slot_hi; ++slot) {
      double mean_extra = std::clamp(sc.rides_per_slot_mean - 1.0, 0.0, 2.0);
      int k = 1 + (unif(rng) < mean_extra * 0.6 ? 1 : 0) + (unif(rng) < mean_extra * 0.2 ? 1 : 0);
      for (int ri = 0; ri < k; ++ri) {
        ++table_no;
        int vid = vehicle_cursor++ % sc.n_vehicles;
        PhysicalRide pr;
        Ride& ride = pr.ride;
        ride.key = {day.date, world.route.route, table_no % 97, table_no, Direction::outbound};
        ride.vehicle = "V" + std::to_string(vid + 1);
        ride.vehicle_type = vid % 2 == 0 ? VehicleType::bus : VehicleType::tram;
        ride.path = world.route.path;
        ride.capacity = world.route.capacity_for(ride.vehicle_type);

        // demand level shapes undercrowding: quiet early/late hours and holidays
        double hour_factor = 0.25 + 0.75 * std::exp(-0.5 * std::pow((slot - 13.0) / 4.0, 2.0));
        double day_factor = day.day_type == DayType::working ? 1.0 : 0.35;
        double lambda = 6.0 * hour_factor * day_factor;

        int minute = static_cast<int>(unif(rng) * 40.0);
        int onboard = 0;
        std::poisson_distribution<int> board_dist(lambda);
        for (int s = 1; s <= n_stops; ++s) {
          StopRecord rec;
          rec.stop_index = s;
          rec.stop_id = world.route.stops[s - 1];
          rec.timestamp = make_timestamp(day.date, slot, minute, 0) + (s - 1) * 110;
          if (s < n_stops) {
            rec.boarded = std::min(board_dist(rng), 30);
            double leave_p = 0.10 + 0.55 * static_cast<double>(s) / n_stops;
            rec.alighted = 0;
            for (int pass = 0; pass < onboard; ++pass)
              if (unif(rng) < leave_p) ++rec.alighted;
          } else {
            rec.boarded = 0;
            rec.alighted = onboard;  // terminal: everyone alights
          }
          onboard += rec.boarded - rec.alighted;
          rec.onboard_after = onboard;
          ride.stops.push_back(rec);
        }
        physical.push_back(std::move(pr));
      }
    }
  }

  // vehicle-day fault selection
  std::map<std::pair<std::string, std::string>, int> vehicle_day_fault;  // 0 none, 1 zero, 2 onesided
  {
    std::set<std::pair<std::string, std::string>> vds;
    for (const auto& pr : physical)
      vds.insert({pr.ride.vehicle, format_date(pr.ride.key.date)});
    for (const auto& vd : vds) {
      double u = unif(rng);
      if (u < sc.faults.all_zero_vehicle) {
        vehicle_day_fault[vd] = 1;
        world.faults.all_zero_vehicle_days[vd.first].insert(vd.second);
      } else if (u < sc.faults.all_zero_vehicle + sc.faults.one_sided_vehicle) {
        vehicle_day_fault[vd] = 2;
        world.faults.one_sided_vehicle_days[vd.first].insert(vd.second);
      }
    }
  }

  // render signals with fault injection
  for (auto& pr : physical) {
    Ride& ride = pr.ride;
    world.rides_truth.push_back(ride);

    int vdf = 0;
    auto vf = vehicle_day_fault.find({ride.vehicle, format_date(ride.key.date)});
    if (vf != vehicle_day_fault.end()) vdf = vf->second;

    bool noise_fault = unif(rng) < sc.faults.noise;
    bool missing_fault = unif(rng) < sc.faults.missing;
    bool spike_fault = unif(rng) < sc.faults.spike;
    bool anomaly_fault = unif(rng) < sc.faults.anomaly;

    std::set<int> dropped;
    if (missing_fault) {
      // drop enough interior stops to exceed the default 10% missing limit
      int need = static_cast<int>(std::floor(0.10 * n_stops)) + 1;
      while (static_cast<int>(dropped.size()) < std::min(need, n_stops - 2))
        dropped.insert(2 + static_cast<int>(unif(rng) * (n_stops - 2)));
      world.faults.missing_rides.insert(ride.key);
    }
    int spike_stop = 0;
    if (spike_fault) {
      spike_stop = 2 + static_cast<int>(unif(rng) * (n_stops - 2));
      while (dropped.count(spike_stop))
        spike_stop = 2 + static_cast<int>(unif(rng) * (n_stops - 2));
      world.faults.spike_stops.insert({ride.key.str(), spike_stop});
    }
    int noise_stop = 0;
    if (noise_fault) {
      noise_stop = 1 + static_cast<int>(unif(rng) * n_stops);
      while (dropped.count(noise_stop))
        noise_stop = 1 + static_cast<int>(unif(rng) * n_stops);
      world.faults.noise_rides.insert(ride.key);
    }
    int anomaly_kind = anomaly_fault ? 1 + static_cast<int>(unif(rng) * 4.0) : 0;
    if (anomaly_kind > 4) anomaly_kind = 4;
    if (anomaly_fault) world.faults.anomaly_rides.insert(ride.key);

    int cum_board = 0, cum_alight = 0;
    for (const StopRecord& s : ride.stops) {
      if (dropped.count(s.stop_index)) continue;
      RawSignal sig;
      sig.date = ride.key.date;
      sig.route = ride.key.route;
      sig.table_no = ride.key.table_no;
      sig.ride_no = ride.key.ride_no;
      sig.direction = ride.key.direction;
      sig.vehicle = ride.vehicle;
      sig.vehicle_type = ride.vehicle_type;
      sig.path = anomaly_kind == 4 ? "P-DIV" : ride.path;
      sig.timestamp = s.timestamp;
      sig.noise = s.stop_index == noise_stop;
      sig.status = 0;
      if (anomaly_kind >= 1 && anomaly_kind <= 3 && s.stop_index == 1) sig.status = anomaly_kind;
      sig.stop = s.stop_id;

      int boarded = s.boarded, alighted = s.alighted;
      if (vdf == 1) {
        boarded = 0;
        alighted = 0;
      } else if (vdf == 2) {
        alighted = 0;
      }
      if (s.stop_index == spike_stop) boarded += 500;

      cum_board += boarded;
      cum_alight += alighted;
      sig.apc_info_type = sc.signal_type;
      if (sc.signal_type == ApcInfoType::cumulative) {
        sig.inf1 = std::max(cum_board - cum_alight, 0);
        sig.inf2 = cum_board;
        sig.inf3 = cum_alight;
      } else {
        sig.inf2 = boarded;
        sig.inf3 = alighted;
      }
      world.signals.push_back(std::move(sig));
    }
  }

  // expected zero-fault observations: independent sums over (date, slot)
  struct Agg {
    long long capacity = 0;
    std::vector<long long> occ;
  };
  std::map<std::pair<std::string, int>, Agg> agg;  // (date string, slot) keeps date ordering
  std::map<std::string, const synth_detail::DayInfo*> day_lookup;
  for (const auto& d : days) day_lookup[format_date(d.date)] = &d;
  for (const auto& pr : physical) {
    const Ride& r = pr.ride;
    auto key = std::pair{format_date(r.key.date), timestamp_hour(r.departure_time())};
    Agg& a = agg[key];
    if (a.occ.empty()) a.occ.assign(sc.n_segments, 0);
    a.capacity += r.capacity;
    for (int j = 0; j < sc.n_segments; ++j) a.occ[j] += r.stops[j].onboard_after;
  }
  int ride_id = 0;
  for (const auto& [key, a] : agg) {
    ++ride_id;
    const auto* day = day_lookup.at(key.first);
    for (int j = 1; j <= sc.n_segments; ++j) {
      SegmentObservation o = synth_detail::base_observation(*day, key.second, j);
      o.ride_id = ride_id;
      o.load_factor = static_cast<double>(a.occ[j - 1]) / static_cast<double>(a.capacity);
      o.y = o.load_factor <= sc.c_low ? 1 : 0;
      world.expected_observations.push_back(o);
    }
  }
  return world;
}

// The raw signal stream with injected faults and their ground-truth labels.
inline std::pair<std::vector<RawSignal>, FaultLabels> emit_signals(const SynthScenario& sc) {
  SimulatedWorld w = simulate_world(sc);
  return {std::move(w.signals), std::move(w.faults)};
}

inline nlohmann::json scenario_to_json(const SynthScenario& sc) {
  nlohmann::json j;
  j["start_date"] = format_date(sc.start_date);
  j["n_dates"] = sc.n_dates;
  j["slot_lo"] = sc.slot_lo;
  j["slot_hi"] = sc.slot_hi;
  j["rides_per_slot_mean"] = sc.rides_per_slot_mean;
  j["n_segments"] = sc.n_segments;
  j["capacity_tram"] = sc.capacity_tram;
  j["capacity_bus"] = sc.capacity_bus;
  j["n_vehicles"] = sc.n_vehicles;
  j["signal_type"] = static_cast<int>(sc.signal_type);
  j["c_low"] = sc.c_low;
  j["sigma_z2"] = sc.sigma_z2;
  j["beta"] = sc.beta;
  j["segment_z"] = sc.segment_z;
  j["seed"] = sc.seed;
  j["faults"] = {{"noise", sc.faults.noise},
                 {"missing", sc.faults.missing},
                 {"all_zero_vehicle", sc.faults.all_zero_vehicle},
                 {"one_sided_vehicle", sc.faults.one_sided_vehicle},
                 {"spike", sc.faults.spike},
                 {"anomaly", sc.faults.anomaly}};
  j["model"] = {{"degree_slot", sc.model_spec.degree_slot},
                {"degree_week", sc.model_spec.degree_week},
                {"interact_slot_day", sc.model_spec.interact_slot_day},
                {"interact_day_week", sc.model_spec.interact_day_week},
                {"include_season", sc.model_spec.include_season},
                {"weather_columns", sc.model_spec.weather_columns}};
  return j;
}

inline SynthScenario scenario_from_json(const nlohmann::json& j) {
  SynthScenario sc;
  if (j.contains("start_date")) sc.start_date = parse_date(j["start_date"].get<std::string>());
  sc.n_dates = j.value("n_dates", sc.n_dates);
  sc.slot_lo = j.value("slot_lo", sc.slot_lo);
  sc.slot_hi = j.value("slot_hi", sc.slot_hi);
  sc.rides_per_slot_mean = j.value("rides_per_slot_mean", sc.rides_per_slot_mean);
  sc.n_segments = j.value("n_segments", sc.n_segments);
  sc.capacity_tram = j.value("capacity_tram", sc.capacity_tram);
  sc.capacity_bus = j.value("capacity_bus", sc.capacity_bus);
  sc.n_vehicles = j.value("n_vehicles", sc.n_vehicles);
  if (j.contains("signal_type"))
    sc.signal_type = static_cast<ApcInfoType>(j["signal_type"].get<int>());
  sc.c_low = j.value("c_low", sc.c_low);
  sc.sigma_z2 = j.value("sigma_z2", sc.sigma_z2);
  if (j.contains("beta")) sc.beta = j["beta"].get<std::vector<double>>();
  if (j.contains("segment_z")) sc.segment_z = j["segment_z"].get<std::vector<double>>();
  sc.seed = j.value("seed", sc.seed);
  if (j.contains("faults")) {
    const auto& f = j["faults"];
    sc.faults.noise = f.value("noise", 0.0);
    sc.faults.missing = f.value("missing", 0.0);
    sc.faults.all_zero_vehicle = f.value("all_zero_vehicle", 0.0);
    sc.faults.one_sided_vehicle = f.value("one_sided_vehicle", 0.0);
    sc.faults.spike = f.value("spike", 0.0);
    sc.faults.anomaly = f.value("anomaly", 0.0);
  }
  if (j.contains("model")) {
    const auto& m = j["model"];
    sc.model_spec.degree_slot = m.value("degree_slot", sc.model_spec.degree_slot);
    sc.model_spec.degree_week = m.value("degree_week", sc.model_spec.degree_week);
    sc.model_spec.interact_slot_day =
        m.value("interact_slot_day", sc.model_spec.interact_slot_day);
    sc.model_spec.interact_day_week =
        m.value("interact_day_week", sc.model_spec.interact_day_week);
    sc.model_spec.include_season = m.value("include_season", sc.model_spec.include_season);
    if (m.contains("weather_columns"))
      sc.model_spec.weather_columns = m["weather_columns"].get<std::vector<std::string>>();
  }
  return sc;
}

inline void write_route_spec_json(std::ostream& os, const RouteSpec& r) {
  nlohmann::json j;
  j["route"] = r.route;
  j["path"] = r.path;
  j["stops"] = r.stops;
  j["capacity"] = {{"tram", r.capacity.count(VehicleType::tram) ? r.capacity.at(VehicleType::tram) : 0},
                   {"bus", r.capacity.count(VehicleType::bus) ? r.capacity.at(VehicleType::bus) : 0},
                   {"missing",
                    r.capacity.count(VehicleType::missing) ? r.capacity.at(VehicleType::missing) : 0}};
  os << j.dump(2) << '\n';
}

inline RouteSpec read_route_spec_json(std::istream& is) {
  nlohmann::json j;
  is >> j;
  RouteSpec r;
  r.route = j.value("route", "");
  r.path = j.value("path", "");
  r.stops = j["stops"].get<std::vector<std::string>>();
  if (j.contains("capacity")) {
    r.capacity[VehicleType::tram] = j["capacity"].value("tram", 0);
    r.capacity[VehicleType::bus] = j["capacity"].value("bus", 0);
    r.capacity[VehicleType::missing] = j["capacity"].value("missing", 0);
  }
  return r;
}

}  // namespace occ
