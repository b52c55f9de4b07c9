#include <gtest/gtest.h>

#include <sstream>

#include "occ/aggregate.hpp"

using namespace occ;

namespace {

RouteSpec route3() {
  RouteSpec r;
  r.route = "R90";
  r.path = "P1";
  r.stops = {"S1", "S2", "S3"};
  r.capacity[VehicleType::bus] = 80;
  return r;
}

Ride make_ride(const CalDate& date, int hour, int minute, int capacity,
               std::vector<int> onboard) {
  Ride r;
  r.key = {date, "R90", 1, minute, Direction::outbound};
  r.capacity = capacity;
  for (std::size_t s = 0; s < onboard.size() + 1; ++s) {
    StopRecord rec;
    rec.stop_index = static_cast<int>(s) + 1;
    rec.timestamp = make_timestamp(date, hour, minute + static_cast<int>(s));
    rec.onboard_after = s < onboard.size() ? onboard[s] : 0;
    r.stops.push_back(rec);
  }
  return r;
}

}  // namespace

TEST(Aggregate, SumsCapacityAndOccupancy) {
  CalDate d{2022, 6, 6};
  std::vector<Ride> rides = {make_ride(d, 7, 0, 80, {12, 7}), make_ride(d, 7, 20, 80, {3, 12}),
                             make_ride(d, 9, 5, 80, {1, 1})};
  auto aggs = aggregate_rides(rides, route3());
  ASSERT_EQ(aggs.size(), 2u);
  const AggregateRide& a7 = aggs[0];
  EXPECT_EQ(a7.slot.slot, 7);
  EXPECT_EQ(a7.capacity, 160);
  EXPECT_EQ(a7.occupancy[0], 15);
  EXPECT_EQ(a7.occupancy[1], 19);
  EXPECT_EQ(a7.n_source_rides, 2);
  EXPECT_EQ(aggs[1].slot.slot, 9);
  EXPECT_EQ(aggs[1].n_source_rides, 1);
}

TEST(Aggregate, EmptySlotsAbsent) {
  CalDate d{2022, 6, 6};
  auto aggs = aggregate_rides({make_ride(d, 7, 0, 80, {1, 2})}, route3());
  EXPECT_EQ(aggs.size(), 1u);  // only one (slot, date) combination emitted
}

TEST(Aggregate, WrongSegmentCountIsError) {
  CalDate d{2022, 6, 6};
  Ride bad = make_ride(d, 7, 0, 80, {1});  // 2 stops, route expects 3
  EXPECT_THROW(aggregate_rides({bad}, route3()), Error);
}

TEST(Aggregate, ConservationOverDay) {
  CalDate d{2022, 6, 6};
  std::vector<Ride> rides;
  long long cap_sum = 0, occ0 = 0;
  for (int i = 0; i < 17; ++i) {
    rides.push_back(make_ride(d, 6 + i % 5, i, 80, {i, 2 * i}));
    cap_sum += 80;
    occ0 += i;
  }
  auto aggs = aggregate_rides(rides, route3());
  long long agg_cap = 0, agg_occ0 = 0;
  for (const auto& a : aggs) {
    agg_cap += a.capacity;
    agg_occ0 += a.occupancy[0];
  }
  EXPECT_EQ(agg_cap, cap_sum);
  EXPECT_EQ(agg_occ0, occ0);
}

TEST(Aggregate, OrderInvariance) {
  CalDate d{2022, 6, 6};
  std::vector<Ride> rides = {make_ride(d, 7, 0, 80, {12, 7}), make_ride(d, 7, 20, 90, {3, 12}),
                             make_ride(d, 8, 5, 80, {1, 1})};
  auto a1 = aggregate_rides(rides, route3());
  std::reverse(rides.begin(), rides.end());
  auto a2 = aggregate_rides(rides, route3());
  ASSERT_EQ(a1.size(), a2.size());
  for (std::size_t i = 0; i < a1.size(); ++i) {
    EXPECT_EQ(a1[i].capacity, a2[i].capacity);
    EXPECT_EQ(a1[i].occupancy, a2[i].occupancy);
    EXPECT_EQ(a1[i].id, a2[i].id);
  }
}

TEST(LoadFactor, RatioAndLabel) {
  AggregateRide a;
  a.capacity = 160;
  a.occupancy = {0, 16, 1};
  EXPECT_DOUBLE_EQ(load_factor(a, 1), 0.0);
  EXPECT_DOUBLE_EQ(load_factor(a, 2), 0.1);
  EXPECT_DOUBLE_EQ(load_factor(a, 3), 0.00625);
  ThresholdConfig cfg;
  EXPECT_EQ(label_undercrowding(load_factor(a, 3), cfg), 1);
  EXPECT_EQ(label_undercrowding(0.01, cfg), 1);  // boundary inclusive
  EXPECT_EQ(label_undercrowding(0.0100001, cfg), 0);
  EXPECT_EQ(label_undercrowding(0.0, cfg), 1);
}

TEST(LabelMonotoneInThreshold, RaisingThresholdNeverFlipsOneToZero) {
  for (double lf : {0.0, 0.005, 0.01, 0.02, 0.2}) {
    ThresholdConfig lo{0.01, {}};
    ThresholdConfig hi{0.05, {}};
    if (label_undercrowding(lf, lo) == 1) EXPECT_EQ(label_undercrowding(lf, hi), 1);
  }
}

TEST(JoinCovariates, RowsAndErrors) {
  CalDate d{2022, 6, 6};
  auto aggs = aggregate_rides({make_ride(d, 7, 0, 80, {12, 1})}, route3());
  std::vector<WeatherRecord> wx = {{d, 21.5, 5.0, 30.0, 60.0, 0.0}};
  std::vector<CalendarRecord> cal = {{d, DayType::working, Season::summer, 1}};
  auto obs = join_covariates(aggs, wx, cal, {});
  ASSERT_EQ(obs.size(), 2u);
  EXPECT_EQ(obs[0].segment, 1);
  EXPECT_EQ(obs[1].segment, 2);
  EXPECT_EQ(obs[0].time_slot, 7);
  EXPECT_EQ(obs[0].week_number, 1);
  EXPECT_DOUBLE_EQ(obs[0].temperature, 21.5);
  EXPECT_EQ(obs[0].y, 0);
  EXPECT_EQ(obs[1].y, 0);  // 1/80 = 0.0125 > 0.01
  EXPECT_DOUBLE_EQ(obs[1].load_factor, 1.0 / 80.0);

  EXPECT_THROW(join_covariates(aggs, {}, cal, {}), Error);
  EXPECT_THROW(join_covariates(aggs, wx, {}, {}), Error);
}

TEST(ObservationsCsv, RoundTrip) {
  CalDate d{2022, 6, 6};
  auto aggs = aggregate_rides({make_ride(d, 7, 0, 80, {12, 1})}, route3());
  std::vector<WeatherRecord> wx = {{d, 21.5123456789, 5.25, 33.3, 60.01, 0.1}};
  std::vector<CalendarRecord> cal = {{d, DayType::saturday, Season::winter, 3}};
  auto obs = join_covariates(aggs, wx, cal, {});
  std::ostringstream os;
  write_observations_csv(os, obs);
  std::istringstream is(os.str());
  auto back = read_observations_csv(is);
  ASSERT_EQ(back.size(), obs.size());
  for (std::size_t i = 0; i < obs.size(); ++i) EXPECT_EQ(back[i], obs[i]);
}
