#include <gtest/gtest.h>

#include <sstream>

#include "occ/csv.hpp"
#include "occ/dates.hpp"
#include "occ/mathutil.hpp"
#include "occ/toml.hpp"

using namespace occ;

TEST(Dates, RoundTripAndArithmetic) {
  CalDate d{2022, 6, 6};
  EXPECT_EQ(format_date(d), "2022-06-06");
  EXPECT_EQ(parse_date("2022-12-04"), (CalDate{2022, 12, 4}));
  EXPECT_EQ(add_days(d, 181), (CalDate{2022, 12, 4}));
  EXPECT_EQ(days_from_civil(CalDate{2022, 12, 4}) - days_from_civil(d), 181);
}

TEST(Dates, TimestampPieces) {
  EpochSeconds t = make_timestamp(CalDate{2022, 6, 6}, 7, 30, 15);
  EXPECT_EQ(timestamp_date(t), (CalDate{2022, 6, 6}));
  EXPECT_EQ(timestamp_hour(t), 7);
  EXPECT_EQ(format_timestamp(t), "2022-06-06 07:30:15");
  EXPECT_EQ(parse_timestamp("2022-06-06 07:30:15"), t);
}

TEST(Csv, SplitAndEscape) {
  auto cells = split_csv_row("a,\"b,c\",\"d\"\"e\",f", ',');
  ASSERT_EQ(cells.size(), 4u);
  EXPECT_EQ(cells[1], "b,c");
  EXPECT_EQ(cells[2], "d\"e");
  EXPECT_EQ(csv_escape("x,y", ','), "\"x,y\"");
  EXPECT_EQ(csv_escape("plain", ','), "plain");
}

TEST(Csv, DoubleRoundTrip) {
  for (double v : {0.1, 1.0 / 3.0, 1e-17, 123456.789, -0.005, 2.2250738585072014e-308}) {
    EXPECT_EQ(parse_double(format_double(v)), v);
  }
}

TEST(Csv, ReaderHeaderErrors) {
  std::istringstream in("a,b\n1,2\n");
  CsvReader r(in);
  EXPECT_TRUE(r.has_column("a"));
  EXPECT_THROW(r.column("missing"), Error);
  auto row = r.next();
  ASSERT_TRUE(row.has_value());
  EXPECT_EQ((*row)[1], "2");
  EXPECT_FALSE(r.next().has_value());
}

TEST(MathUtil, NormalQuantileMatchesCdf) {
  for (double p : {0.001, 0.025, 0.05, 0.5, 0.95, 0.975, 0.999}) {
    double x = normal_quantile(p);
    EXPECT_NEAR(normal_cdf(x), p, 1e-12);
  }
  EXPECT_NEAR(normal_quantile(0.975), 1.959963984540054, 1e-9);
}

TEST(MathUtil, LogisticIdentities) {
  EXPECT_DOUBLE_EQ(logistic(0.0), 0.5);
  EXPECT_NEAR(logistic(logit(0.3)), 0.3, 1e-14);
  EXPECT_NEAR(log1pexp(50.0), 50.0, 1e-12);
}

TEST(Toml, ParsesSubset) {
  std::istringstream in(R"(
# run config
seed = 42
fraction = 0.7
strict = true
name = "hello world"

[paths]
signals = "sig.csv"
cols = ["a", "b", "c"]
)");
  auto t = toml::parse(in);
  EXPECT_EQ(t.get_int("seed"), 42);
  EXPECT_DOUBLE_EQ(t.get_double("fraction"), 0.7);
  EXPECT_TRUE(t.get_bool("strict"));
  EXPECT_EQ(t.get_string("name"), "hello world");
  EXPECT_EQ(t.get_string("paths.signals"), "sig.csv");
  ASSERT_EQ(t.get_array("paths.cols").size(), 3u);
  EXPECT_EQ(t.get_array("paths.cols")[2], "c");
}

TEST(Toml, CanonicalDumpIsStable) {
  std::istringstream in1("b = 2\na = 1\n");
  std::istringstream in2("a = 1\nb = 2\n");
  EXPECT_EQ(toml::parse(in1).canonical(), toml::parse(in2).canonical());
}
