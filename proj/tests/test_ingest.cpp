#include <gtest/gtest.h>

#include <sstream>

#include "occ/ingest.hpp"

using namespace occ;

namespace {

const char* kHeader =
    "date,route,table,ride,direction,vehicle,vehicle_type,path,timestamp,noise,status,"
    "diverted_route,stop,apc_info_type,inf1,inf2,inf3\n";

std::string row(const std::string& stop, const std::string& ts, int apc, const std::string& i1,
                const std::string& i2, const std::string& i3, int noise = 0,
                int status = 0) {
  return "2022-06-06,R90,5,101,0,V1,1,P1," + ts + "," + std::to_string(noise) + "," +
         std::to_string(status) + "," + stop + "," + std::to_string(apc) + "," + i1 + "," + i2 +
         "," + i3 + "\n";
}

RouteSpec four_stop_route() {
  RouteSpec r;
  r.route = "R90";
  r.path = "P1";
  r.stops = {"S1", "S2", "S3", "S4"};
  r.capacity[VehicleType::bus] = 80;
  r.capacity[VehicleType::tram] = 180;
  return r;
}

}  // namespace

TEST(ParseSignals, PerStopMapping) {
  std::istringstream in(std::string(kHeader) + row("S1", "2022-06-06 07:00:00", 2, "", "3", "1"));
  auto res = parse_signals(in, {});
  ASSERT_EQ(res.signals.size(), 1u);
  EXPECT_TRUE(res.diagnostics.empty());
  const RawSignal& s = res.signals[0];
  EXPECT_EQ(s.apc_info_type, ApcInfoType::per_stop);
  EXPECT_EQ(s.inf2.value(), 3);
  EXPECT_EQ(s.inf3.value(), 1);
}

TEST(ParseSignals, CountsWithoutInfoTypeIsRecordError) {
  std::istringstream in(std::string(kHeader) + row("S1", "2022-06-06 07:00:00", 0, "", "3", ""));
  auto res = parse_signals(in, {});
  EXPECT_TRUE(res.signals.empty());
  ASSERT_EQ(res.diagnostics.size(), 1u);
  EXPECT_NE(res.diagnostics[0].message.find("counts present"), std::string::npos);
}

TEST(ParseSignals, LenientSkipsStrictThrows) {
  std::string body(kHeader);
  for (int i = 0; i < 9; ++i)
    body += row("S1", "2022-06-06 07:0" + std::to_string(i) + ":00", 2, "", "2", "1");
  body += "2022-06-06,R90,5,101,9,V1,1,P1,2022-06-06 07:09:00,0,0,,S1,2,,2,1\n";  // bad direction
  {
    std::istringstream in(body);
    auto res = parse_signals(in, {}, /*strict=*/false);
    EXPECT_EQ(res.signals.size(), 9u);
    ASSERT_EQ(res.diagnostics.size(), 1u);
    EXPECT_EQ(res.diagnostics[0].line_no, 11u);
  }
  {
    std::istringstream in(body);
    EXPECT_THROW(parse_signals(in, {}, /*strict=*/true), Error);
  }
}

TEST(ParseSignals, MissingMandatoryColumnIsFileError) {
  std::istringstream in("date,route\n2022-06-06,R90\n");
  EXPECT_THROW(parse_signals(in, {}), Error);
}

TEST(ParseSignals, TimestampOutsideDateIsRecordError) {
  std::istringstream in(std::string(kHeader) + row("S1", "2022-06-07 07:00:00", 2, "", "1", "1"));
  auto res = parse_signals(in, {});
  EXPECT_TRUE(res.signals.empty());
  EXPECT_EQ(res.diagnostics.size(), 1u);
}

TEST(ParseSignals, WriteReadRoundTrip) {
  std::istringstream in(std::string(kHeader) +
                        row("S1", "2022-06-06 07:00:00", 7, "4", "4", "0") +
                        row("S2", "2022-06-06 07:02:00", 7, "6", "7", "1", 1, 2));
  auto res = parse_signals(in, {});
  ASSERT_EQ(res.signals.size(), 2u);
  std::ostringstream out;
  write_signals_csv(out, res.signals);
  std::istringstream in2(out.str());
  auto res2 = parse_signals(in2, {});
  ASSERT_EQ(res2.signals.size(), 2u);
  EXPECT_EQ(res2.signals[1].timestamp, res.signals[1].timestamp);
  EXPECT_EQ(res2.signals[1].noise, true);
  EXPECT_EQ(res2.signals[1].status, 2);
  EXPECT_EQ(res2.signals[1].inf2.value(), 7);
}

TEST(ReconstructRides, CumulativeFirstDifferences) {
  std::string body(kHeader);
  // cumulative boarding [0,4,4,9], alighting [0,0,2,9]
  body += row("S1", "2022-06-06 07:00:00", 7, "0", "0", "0");
  body += row("S2", "2022-06-06 07:02:00", 7, "4", "4", "0");
  body += row("S3", "2022-06-06 07:04:00", 7, "2", "4", "2");
  body += row("S4", "2022-06-06 07:06:00", 7, "0", "9", "9");
  std::istringstream in(body);
  auto res = parse_signals(in, {});
  auto rides = reconstruct_rides(res.signals, four_stop_route());
  ASSERT_EQ(rides.size(), 1u);
  const Ride& r = rides[0];
  ASSERT_EQ(r.stops.size(), 4u);
  EXPECT_EQ(r.stops[0].boarded, 0);
  EXPECT_EQ(r.stops[1].boarded, 4);
  EXPECT_EQ(r.stops[2].boarded, 0);
  EXPECT_EQ(r.stops[3].boarded, 5);
  EXPECT_EQ(r.stops[2].alighted, 2);
  EXPECT_EQ(r.stops[3].onboard_after, 0);
  EXPECT_EQ(r.capacity, 80);
  EXPECT_DOUBLE_EQ(r.quality.missing_fraction, 0.0);
  EXPECT_DOUBLE_EQ(r.quality.noise_fraction, 0.0);
}

TEST(ReconstructRides, MissingStopsAndNoiseFractions) {
  std::string body(kHeader);
  body += row("S1", "2022-06-06 07:00:00", 2, "", "5", "0");
  body += row("S3", "2022-06-06 07:04:00", 2, "", "0", "3", /*noise=*/1);
  std::istringstream in(body);
  auto res = parse_signals(in, {});
  auto rides = reconstruct_rides(res.signals, four_stop_route());
  ASSERT_EQ(rides.size(), 1u);
  const Ride& r = rides[0];
  EXPECT_DOUBLE_EQ(r.quality.missing_fraction, 2.0 / 4.0);
  EXPECT_DOUBLE_EQ(r.quality.noise_fraction, 0.5);
  ASSERT_EQ(r.stops.size(), 4u);
  EXPECT_FALSE(r.stops[1].observed);
  EXPECT_EQ(r.stops[1].boarded, 0);
}

TEST(ReconstructRides, LastNonNoiseSignalWins) {
  std::string body(kHeader);
  body += row("S1", "2022-06-06 07:00:00", 2, "", "2", "0");
  body += row("S1", "2022-06-06 07:00:30", 2, "", "5", "0");
  body += row("S1", "2022-06-06 07:00:45", 2, "", "9", "0", /*noise=*/1);
  std::istringstream in(body);
  auto res = parse_signals(in, {});
  auto rides = reconstruct_rides(res.signals, four_stop_route());
  ASSERT_EQ(rides.size(), 1u);
  EXPECT_EQ(rides[0].stops[0].boarded, 5);  // latest non-noise
  EXPECT_DOUBLE_EQ(rides[0].quality.noise_fraction, 1.0 / 3.0);
}

TEST(ReconstructRides, NonMonotoneCumulativeFlagsOutlierCandidate) {
  std::string body(kHeader);
  body += row("S1", "2022-06-06 07:00:00", 7, "5", "5", "0");
  body += row("S2", "2022-06-06 07:02:00", 7, "2", "2", "0");  // cumulative drops
  std::istringstream in(body);
  auto res = parse_signals(in, {});
  auto rides = reconstruct_rides(res.signals, four_stop_route());
  ASSERT_EQ(rides.size(), 1u);
  EXPECT_TRUE(rides[0].quality.outlier_stop_indices.count(2));
  EXPECT_EQ(rides[0].stops[1].boarded, 0);  // clamped, not repaired
}

TEST(ReconstructRides, NegativeOnboardClippedWithDiagnostic) {
  std::string body(kHeader);
  body += row("S1", "2022-06-06 07:00:00", 2, "", "1", "0");
  body += row("S2", "2022-06-06 07:02:00", 2, "", "0", "5");  // more alight than aboard
  std::istringstream in(body);
  auto res = parse_signals(in, {});
  auto rides = reconstruct_rides(res.signals, four_stop_route());
  ASSERT_EQ(rides.size(), 1u);
  EXPECT_EQ(rides[0].stops[1].onboard_after, 0);
  bool found = false;
  for (const auto& d : rides[0].diagnostics)
    if (d.find("clipped") != std::string::npos) found = true;
  EXPECT_TRUE(found);
}

TEST(LoadWeather, CoverageAndGaps) {
  std::string body = "date,temperature,wind_speed,cloud_coverage,humidity,rain\n";
  for (int d = 0; d < 5; ++d) {
    if (d == 3) continue;  // gap
    body += format_date(add_days({2022, 6, 6}, d)) + ",20,5,30,60,0\n";
  }
  std::istringstream bad(body);
  try {
    load_weather(bad, {2022, 6, 6}, {2022, 6, 10});
    FAIL() << "expected coverage error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::coverage);
    EXPECT_NE(std::string(e.what()).find("2022-06-09"), std::string::npos);
  }

  std::string full = "date,temperature,wind_speed,cloud_coverage,humidity,rain\n";
  for (int d = 0; d < 5; ++d) full += format_date(add_days({2022, 6, 6}, d)) + ",20,5,30,60,0\n";
  std::istringstream ok(full);
  auto recs = load_weather(ok, {2022, 6, 6}, {2022, 6, 10});
  EXPECT_EQ(recs.size(), 5u);
}

TEST(LoadCalendar, WeekNumbersAnchored) {
  std::string body = "date,day_type,season\n";
  body += "2022-06-06,working,summer\n";
  body += "2022-06-13,working,summer\n";
  body += "2022-12-04,holiday,winter\n";
  std::istringstream in(body);
  auto recs = load_calendar(in);
  ASSERT_EQ(recs.size(), 3u);
  EXPECT_EQ(recs[0].week_number, 1);
  EXPECT_EQ(recs[1].week_number, 2);
  EXPECT_EQ(recs[2].week_number, 26);
}

TEST(LoadCalendar, DuplicateDateIsError) {
  std::istringstream in("date,day_type,season\n2022-06-06,working,summer\n2022-06-06,holiday,summer\n");
  EXPECT_THROW(load_calendar(in), Error);
}
