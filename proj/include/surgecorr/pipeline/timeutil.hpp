#pragma once

#include "surgecorr/core.hpp"

#include <chrono>
#include <cstdio>
#include <string>
#include <string_view>

namespace surgecorr::pipeline {

using TimePoint = std::chrono::sys_seconds;
using Hours = std::chrono::hours;

/// Parses "YYYY-MM-DDTHH:MM:SSZ" (the trailing Z and the seconds field are optional).
inline TimePoint parse_utc(std::string_view text) {
  std::string s(text);
  int Y = 0, M = 0, D = 0, h = 0, m = 0, sec = 0;
  char sep = 0;
  int consumed = 0;
  const int n = std::sscanf(s.c_str(), "%4d-%2d-%2d%c%2d:%2d:%2d%n", &Y, &M, &D, &sep, &h, &m, &sec, &consumed);
  if (n < 6 || (sep != 'T' && sep != ' ')) {
    consumed = 0;
    if (std::sscanf(s.c_str(), "%4d-%2d-%2d%c%2d:%2d%n", &Y, &M, &D, &sep, &h, &m, &consumed) < 6 ||
        (sep != 'T' && sep != ' '))
      throw Error("bad timestamp '" + s + "'");
    sec = 0;
  }
  std::string_view rest = std::string_view(s).substr(static_cast<std::size_t>(consumed));
  if (!(rest.empty() || rest == "Z" || rest == "+00:00")) throw Error("timestamp '" + s + "' is not UTC");

  using namespace std::chrono;
  const year_month_day ymd{year{Y}, month{static_cast<unsigned>(M)}, day{static_cast<unsigned>(D)}};
  if (!ymd.ok() || h < 0 || h > 23 || m < 0 || m > 59 || sec < 0 || sec > 59)
    throw Error("bad timestamp '" + s + "'");
  return sys_days{ymd} + hours{h} + minutes{m} + seconds{sec};
}

inline std::string format_utc(TimePoint tp) {
  using namespace std::chrono;
  const auto day_point = floor<days>(tp);
  const year_month_day ymd{day_point};
  const hh_mm_ss hms{tp - day_point};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<int>(hms.hours().count()), static_cast<int>(hms.minutes().count()),
                static_cast<int>(hms.seconds().count()));
  return buf;
}

}  // namespace surgecorr::pipeline
