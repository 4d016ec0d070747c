#pragma once

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <functional>
#include <string>
#include <string_view>

#include "roma/error.hpp"

namespace roma {

/// Unix seconds source. Injected everywhere a timestamp is recorded so runs
/// can be replayed byte-for-byte.
using Clock = std::function<std::int64_t()>;

inline std::int64_t system_now() {
  return std::chrono::duration_cast<std::chrono::seconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

inline Clock system_clock() { return &system_now; }

inline Clock fixed_clock(std::int64_t t) {
  return [t] { return t; };
}

/// "YYYY-MM-DDTHH:MM:SSZ"
inline std::string format_utc(std::int64_t unix_seconds) {
  std::time_t t = static_cast<std::time_t>(unix_seconds);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[96];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02dZ", tm.tm_year + 1900,
                tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec);
  return buf;
}

inline std::int64_t parse_utc(std::string_view text) {
  int y, mo, d, h, mi, s;
  char tail = 0;
  std::string buf(text);
  if (text.size() != 20 ||
      std::sscanf(buf.c_str(), "%4d-%2d-%2dT%2d:%2d:%2d%c", &y, &mo, &d, &h, &mi, &s, &tail) != 7 ||
      tail != 'Z' || mo < 1 || mo > 12 || d < 1 || d > 31 || h > 23 || mi > 59 || s > 60) {
    fail(ErrorKind::kValidation, "expected UTC timestamp YYYY-MM-DDTHH:MM:SSZ, got '" + buf + "'");
  }
  std::tm tm{};
  tm.tm_year = y - 1900;
  tm.tm_mon = mo - 1;
  tm.tm_mday = d;
  tm.tm_hour = h;
  tm.tm_min = mi;
  tm.tm_sec = s;
  const std::int64_t out = timegm(&tm);
  if (format_utc(out) != text) {
    fail(ErrorKind::kValidation, "not a valid calendar timestamp: '" + buf + "'");
  }
  return out;
}

}  // namespace roma
