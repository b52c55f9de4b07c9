#pragma once

// HTTP archive mode for the weather loader. Separate header so only the CLI
// and the endpoint tests pay for cpp-httplib.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <httplib.h>

#include "occ/ingest.hpp"
#include "occ/mathutil.hpp"

namespace occ {

inline std::string weather_request_path(const WeatherEndpoint& ep, const CalDate& first,
                                        const CalDate& last) {
  std::string fmt = ep.path_format.empty()
                        ? "/v1/archive?latitude=%s&longitude=%s&start_date=%s&end_date=%s"
                        : ep.path_format;
  char buf[512];
  std::snprintf(buf, sizeof buf, fmt.c_str(), ep.latitude.c_str(), ep.longitude.c_str(),
                format_date(first).c_str(), format_date(last).c_str());
  return buf;
}

inline std::filesystem::path weather_cache_file(const WeatherEndpoint& ep, const CalDate& first,
                                                const CalDate& last) {
  std::string key = ep.host + ":" + std::to_string(ep.port) + weather_request_path(ep, first, last);
  char name[32];
  std::snprintf(name, sizeof name, "wx_%016llx.csv",
                static_cast<unsigned long long>(fnv1a64(key)));
  return std::filesystem::path(ep.cache_dir.empty() ? "." : ep.cache_dir) / name;
}

// Fetches daily records from the archive endpoint (same CSV columns as file
// mode). The response body is cached; a warm cache is served without touching
// the network, so re-runs are reproducible offline.
inline std::vector<WeatherRecord> load_weather_endpoint(const WeatherEndpoint& ep,
                                                        const CalDate& first,
                                                        const CalDate& last) {
  const auto cache = weather_cache_file(ep, first, last);
  std::string body;
  if (std::filesystem::exists(cache)) {
    std::ifstream in(cache);
    std::stringstream ss;
    ss << in.rdbuf();
    body = ss.str();
  } else {
    httplib::Client cli(ep.host, ep.port);
    cli.set_connection_timeout(10);
    auto res = cli.Get(weather_request_path(ep, first, last));
    if (!res || res->status != 200)
      throw Error(ErrorKind::coverage,
                  "weather endpoint unreachable and no cache at " + cache.string());
    body = res->body;
    std::filesystem::create_directories(cache.parent_path());
    std::ofstream out(cache);
    out << body;
  }
  std::istringstream in(body);
  auto recs = detail::parse_weather_csv(in, ',');
  detail::check_weather_coverage(recs, first, last);
  return recs;
}

}  // namespace occ
