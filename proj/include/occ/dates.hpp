#pragma once

#include <cstdint>
#include <cstdio>
#include <string>
#include <tuple>

#include "occ/common.hpp"

namespace occ {

// Calendar date, no timezone. Arithmetic via days-from-civil (Hinnant's algorithm).
struct CalDate {
  int y = 1970;
  int m = 1;
  int d = 1;

  friend bool operator==(const CalDate&, const CalDate&) = default;
  friend auto operator<=>(const CalDate& a, const CalDate& b) {
    return std::tie(a.y, a.m, a.d) <=> std::tie(b.y, b.m, b.d);
  }
};

inline std::int64_t days_from_civil(const CalDate& c) {
  int y = c.y - (c.m <= 2);
  int era = (y >= 0 ? y : y - 399) / 400;
  unsigned yoe = static_cast<unsigned>(y - era * 400);
  unsigned doy = (153u * (static_cast<unsigned>(c.m) + (c.m > 2 ? -3 : 9)) + 2) / 5 +
                 static_cast<unsigned>(c.d) - 1;
  unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097LL + static_cast<std::int64_t>(doe) - 719468;
}

inline CalDate civil_from_days(std::int64_t z) {
  z += 719468;
  std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  unsigned doe = static_cast<unsigned>(z - era * 146097);
  unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
  unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  unsigned mp = (5 * doy + 2) / 153;
  unsigned d = doy - (153 * mp + 2) / 5 + 1;
  unsigned m = mp + (mp < 10 ? 3 : -9);
  return CalDate{static_cast<int>(y + (m <= 2)), static_cast<int>(m), static_cast<int>(d)};
}

inline CalDate add_days(const CalDate& c, std::int64_t n) {
  return civil_from_days(days_from_civil(c) + n);
}

inline std::string format_date(const CalDate& c) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", c.y, c.m, c.d);
  return buf;
}

inline CalDate parse_date(const std::string& s) {
  int y, m, d;
  if (std::sscanf(s.c_str(), "%d-%d-%d", &y, &m, &d) != 3 || m < 1 || m > 12 || d < 1 || d > 31)
    throw Error(ErrorKind::schema, "bad date: '" + s + "' (want YYYY-MM-DD)");
  return CalDate{y, m, d};
}

// Naive local datetime as seconds since epoch (no timezone handling anywhere).
using EpochSeconds = std::int64_t;

inline EpochSeconds make_timestamp(const CalDate& c, int hour, int minute = 0, int second = 0) {
  return days_from_civil(c) * 86400 + hour * 3600 + minute * 60 + second;
}

inline CalDate timestamp_date(EpochSeconds t) {
  std::int64_t days = t / 86400;
  if (t < 0 && t % 86400 != 0) --days;
  return civil_from_days(days);
}

inline int timestamp_hour(EpochSeconds t) {
  std::int64_t sod = t - days_from_civil(timestamp_date(t)) * 86400;
  return static_cast<int>(sod / 3600);
}

inline std::string format_timestamp(EpochSeconds t) {
  CalDate c = timestamp_date(t);
  std::int64_t sod = t - days_from_civil(c) * 86400;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02d %02lld:%02lld:%02lld", c.y, c.m, c.d,
                static_cast<long long>(sod / 3600), static_cast<long long>((sod / 60) % 60),
                static_cast<long long>(sod % 60));
  return buf;
}

inline EpochSeconds parse_timestamp(const std::string& s) {
  int y, mo, d, h, mi, se;
  if (std::sscanf(s.c_str(), "%d-%d-%d %d:%d:%d", &y, &mo, &d, &h, &mi, &se) != 6)
    throw Error(ErrorKind::schema, "bad timestamp: '" + s + "' (want YYYY-MM-DD HH:MM:SS)");
  return make_timestamp(CalDate{y, mo, d}, h, mi, se);
}

}  // namespace occ
