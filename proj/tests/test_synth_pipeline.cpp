#include <gtest/gtest.h>

#include <sstream>

#include "occ/aggregate.hpp"
#include "occ/ingest.hpp"
#include "occ/synth.hpp"
#include "occ/validate.hpp"

using namespace occ;

namespace {

// signals -> rides -> quality flags -> filter -> aggregate -> observations
std::pair<std::vector<SegmentObservation>, FilterResult> run_pipeline(
    const SimulatedWorld& world, const ValidationConfig& vcfg, const ThresholdConfig& tcfg) {
  std::ostringstream sig_csv;
  write_signals_csv(sig_csv, world.signals);
  std::istringstream sig_in(sig_csv.str());
  auto parsed = parse_signals(sig_in, {});
  EXPECT_TRUE(parsed.diagnostics.empty());

  auto rides = reconstruct_rides(parsed.signals, world.route);
  apply_stop_outlier_flags(rides, vcfg);
  annotate_anomalies(rides, world.route);
  auto filtered = filter_rides(rides, vcfg);

  std::ostringstream wx_csv, cal_csv;
  write_weather_csv(wx_csv, world.weather);
  write_calendar_csv(cal_csv, world.calendar);
  std::istringstream wx_in(wx_csv.str()), cal_in(cal_csv.str());
  auto wx = load_weather(wx_in, world.weather.front().date, world.weather.back().date);
  auto cal = load_calendar(cal_in);

  auto aggs = aggregate_rides(filtered.clean, world.route);
  auto obs = join_covariates(aggs, wx, cal, tcfg);
  return {std::move(obs), std::move(filtered)};
}

}  // namespace

TEST(Synth, DeterministicGeneration) {
  SynthScenario sc;
  sc.n_dates = 7;
  sc.seed = 99;
  sc.model_spec.degree_slot = 1;
  sc.model_spec.degree_week = 1;
  sc.model_spec.weather_columns = {"rain"};
  sc.model_spec.interact_slot_day = false;
  sc.model_spec.interact_day_week = false;
  sc.beta = {0.0, 0.5, -0.2, 0.1, 0.2, 0.3, 0.05};
  auto [obs1, truth1] = generate_observations(sc);
  auto [obs2, truth2] = generate_observations(sc);
  ASSERT_EQ(obs1.size(), obs2.size());
  for (std::size_t i = 0; i < obs1.size(); ++i) ASSERT_EQ(obs1[i], obs2[i]);
  EXPECT_EQ(truth1.z, truth2.z);

  SimulatedWorld w1 = simulate_world(sc);
  SimulatedWorld w2 = simulate_world(sc);
  ASSERT_EQ(w1.signals.size(), w2.signals.size());
  std::ostringstream a, b;
  write_signals_csv(a, w1.signals);
  write_signals_csv(b, w2.signals);
  EXPECT_EQ(a.str(), b.str());
}

TEST(Synth, NullModelMeanNearHalf) {
  SynthScenario sc;
  sc.n_dates = 21;
  sc.sigma_z2 = 0.0;
  sc.model_spec.degree_slot = 0;
  sc.model_spec.degree_week = 0;
  sc.model_spec.interact_slot_day = false;
  sc.model_spec.interact_day_week = false;
  sc.model_spec.weather_columns.clear();
  sc.beta = {0.0, 0.0, 0.0, 0.0};  // intercept + 3 day dummies
  sc.seed = 5;
  auto [obs, truth] = generate_observations(sc);
  double mean = 0;
  for (const auto& o : obs) mean += o.y;
  mean /= static_cast<double>(obs.size());
  double n = static_cast<double>(obs.size());
  EXPECT_NEAR(mean, 0.5, 3.0 / std::sqrt(n));
}

TEST(Synth, PlantedSegmentInterceptRaisesItsRate) {
  SynthScenario sc;
  sc.n_dates = 28;
  sc.n_segments = 18;
  sc.model_spec.degree_slot = 0;
  sc.model_spec.degree_week = 0;
  sc.model_spec.interact_slot_day = false;
  sc.model_spec.interact_day_week = false;
  sc.model_spec.weather_columns.clear();
  sc.beta = {-1.0, 0.0, 0.0, 0.0};
  sc.segment_z.assign(18, 0.0);
  sc.segment_z[17] = 2.0;
  sc.seed = 17;
  auto [obs, truth] = generate_observations(sc);
  std::array<double, 18> rate{}, count{};
  for (const auto& o : obs) {
    rate[o.segment - 1] += o.y;
    count[o.segment - 1] += 1;
  }
  for (int j = 0; j < 18; ++j) rate[j] /= count[j];
  int argmax = 0;
  for (int j = 1; j < 18; ++j)
    if (rate[j] > rate[argmax]) argmax = j;
  EXPECT_EQ(argmax, 17);
}

TEST(Pipeline, IdentityAtZeroFaults) {
  SynthScenario sc;
  sc.n_dates = 14;
  sc.seed = 123;
  SimulatedWorld world = simulate_world(sc);
  ASSERT_GE(world.expected_observations.size(), 3000u);

  auto [obs, filtered] = run_pipeline(world, {}, ThresholdConfig{sc.c_low, {}});
  EXPECT_TRUE(filtered.rejected.empty());
  ASSERT_EQ(obs.size(), world.expected_observations.size());
  for (std::size_t i = 0; i < obs.size(); ++i) {
    ASSERT_EQ(obs[i], world.expected_observations[i]) << "row " << i;
  }
}

TEST(Pipeline, RoundTripThroughRideEmission) {
  // reconstruct_rides(emit_signals(ride)) == ride for defect-free rides
  SynthScenario sc;
  sc.n_dates = 3;
  sc.seed = 7;
  SimulatedWorld world = simulate_world(sc);
  std::ostringstream sig_csv;
  write_signals_csv(sig_csv, world.signals);
  std::istringstream sig_in(sig_csv.str());
  auto parsed = parse_signals(sig_in, {});
  auto rides = reconstruct_rides(parsed.signals, world.route);
  ASSERT_EQ(rides.size(), world.rides_truth.size());

  std::map<RideKey, const Ride*> truth;
  for (const auto& r : world.rides_truth) truth[r.key] = &r;
  for (const auto& r : rides) {
    const Ride* t = truth.at(r.key);
    ASSERT_EQ(r.stops.size(), t->stops.size());
    EXPECT_EQ(r.capacity, t->capacity);
    for (std::size_t s = 0; s < r.stops.size(); ++s) {
      EXPECT_EQ(r.stops[s].boarded, t->stops[s].boarded);
      EXPECT_EQ(r.stops[s].alighted, t->stops[s].alighted);
      EXPECT_EQ(r.stops[s].onboard_after, t->stops[s].onboard_after);
      EXPECT_EQ(r.stops[s].timestamp, t->stops[s].timestamp);
    }
  }
}

TEST(Pipeline, TypeSevenBoardedSumEqualsFinalCumulative) {
  SynthScenario sc;
  sc.n_dates = 2;
  sc.seed = 31;
  SimulatedWorld world = simulate_world(sc);
  std::map<RideKey, std::pair<int, int>> final_cum;  // (final inf2, sum of diffs)
  std::map<RideKey, int> last_seen;
  for (const auto& s : world.signals) {
    RideKey k{s.date, s.route, s.table_no, s.ride_no, s.direction};
    final_cum[k].first = std::max(final_cum[k].first, s.inf2.value_or(0));
  }
  auto rides = reconstruct_rides(world.signals, world.route);
  for (const auto& r : rides) {
    int sum = 0;
    for (const auto& st : r.stops) sum += st.boarded;
    EXPECT_EQ(sum, final_cum.at(r.key).first);
  }
}

TEST(Pipeline, InjectedNoiseCountsMatchLabels) {
  SynthScenario sc;
  sc.n_dates = 14;
  sc.seed = 77;
  sc.faults.noise = 0.05;
  SimulatedWorld world = simulate_world(sc);
  ASSERT_FALSE(world.faults.noise_rides.empty());

  auto rides = reconstruct_rides(world.signals, world.route);
  ValidationConfig vcfg;
  apply_stop_outlier_flags(rides, vcfg);
  annotate_anomalies(rides, world.route);
  auto filtered = filter_rides(rides, vcfg);
  EXPECT_EQ(filtered.reason_counts[RejectReason::noise], world.faults.noise_rides.size());
  for (const auto& rej : filtered.rejected) {
    bool is_noise = false;
    for (auto why : rej.reasons) is_noise |= why == RejectReason::noise;
    EXPECT_EQ(is_noise, world.faults.noise_rides.count(rej.key) > 0);
  }
}

TEST(Pipeline, InjectedMissingRejected) {
  SynthScenario sc;
  sc.n_dates = 10;
  sc.seed = 78;
  sc.faults.missing = 0.08;
  SimulatedWorld world = simulate_world(sc);
  ASSERT_FALSE(world.faults.missing_rides.empty());
  auto rides = reconstruct_rides(world.signals, world.route);
  auto filtered = filter_rides(rides, {});
  EXPECT_EQ(filtered.reason_counts[RejectReason::missing], world.faults.missing_rides.size());
}

TEST(Pipeline, InjectedSpikeFlaggedByBagplot) {
  SynthScenario sc;
  sc.n_dates = 10;
  sc.seed = 79;
  sc.faults.spike = 0.03;
  SimulatedWorld world = simulate_world(sc);
  ASSERT_FALSE(world.faults.spike_stops.empty());
  auto rides = reconstruct_rides(world.signals, world.route);
  apply_stop_outlier_flags(rides, {});
  std::set<std::pair<std::string, int>> flagged;
  for (const auto& r : rides)
    for (int s : r.quality.outlier_stop_indices) flagged.insert({r.key.str(), s});
  EXPECT_EQ(flagged, world.faults.spike_stops);
}

TEST(Pipeline, InjectedVehicleFaultsDetected) {
  SynthScenario sc;
  sc.n_dates = 12;
  sc.seed = 80;
  sc.faults.all_zero_vehicle = 0.06;
  sc.faults.one_sided_vehicle = 0.06;
  SimulatedWorld world = simulate_world(sc);
  ASSERT_FALSE(world.faults.all_zero_vehicle_days.empty());
  ASSERT_FALSE(world.faults.one_sided_vehicle_days.empty());
  auto rides = reconstruct_rides(world.signals, world.route);
  auto reports = vehicle_day_screen(rides);
  std::map<std::string, std::set<std::string>> zero, onesided;
  for (const auto& rep : reports) {
    if (rep.verdict == VehicleVerdict::all_zero)
      zero[rep.vehicle].insert(format_date(rep.date));
    if (rep.verdict == VehicleVerdict::one_sided)
      onesided[rep.vehicle].insert(format_date(rep.date));
  }
  EXPECT_EQ(zero, world.faults.all_zero_vehicle_days);
  EXPECT_EQ(onesided, world.faults.one_sided_vehicle_days);
}

TEST(Pipeline, InjectedAnomaliesRejectWholeRides) {
  SynthScenario sc;
  sc.n_dates = 10;
  sc.seed = 81;
  sc.faults.anomaly = 0.05;
  SimulatedWorld world = simulate_world(sc);
  ASSERT_FALSE(world.faults.anomaly_rides.empty());
  auto rides = reconstruct_rides(world.signals, world.route);
  annotate_anomalies(rides, world.route);
  auto filtered = filter_rides(rides, {});
  EXPECT_EQ(filtered.reason_counts[RejectReason::anomaly], world.faults.anomaly_rides.size());
}

TEST(Synth, ScenarioJsonRoundTrip) {
  SynthScenario sc;
  sc.n_dates = 9;
  sc.beta = {1.0, -2.0};
  sc.faults.spike = 0.25;
  sc.model_spec.degree_slot = 4;
  sc.seed = 2024;
  auto j = scenario_to_json(sc);
  SynthScenario back = scenario_from_json(j);
  EXPECT_EQ(back.n_dates, 9);
  EXPECT_EQ(back.beta, sc.beta);
  EXPECT_DOUBLE_EQ(back.faults.spike, 0.25);
  EXPECT_EQ(back.model_spec.degree_slot, 4);
  EXPECT_EQ(back.seed, 2024u);
}
