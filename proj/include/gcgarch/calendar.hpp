#pragma once

#include <cstdio>
#include <string>
#include <vector>

#include "gcgarch/error.hpp"

namespace gcg {

// Days since 1970-01-01 of a proleptic Gregorian date (Hinnant's algorithm).
constexpr long days_from_civil(int y, int m, int d) {
  y -= m <= 2;
  const long era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153u * (m + (m > 2 ? -3 : 9)) + 2u) / 5u + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<long>(doe) - 719468;
}

struct CivilDate {
  int y = 0;
  int m = 0;
  int d = 0;
};

constexpr CivilDate civil_from_days(long z) {
  z += 719468;
  const long era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const long y = static_cast<long>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  const unsigned d = doy - (153 * mp + 2) / 5 + 1;
  const unsigned m = mp + (mp < 10 ? 3 : -9);
  return {static_cast<int>(y + (m <= 2)), static_cast<int>(m), static_cast<int>(d)};
}

// 0 = Monday .. 6 = Sunday.
constexpr int weekday(long days) { return static_cast<int>(((days % 7) + 10) % 7); }

inline bool is_weekend(long days) { return weekday(days) >= 5; }

inline std::string iso_date(long days) {
  const CivilDate c = civil_from_days(days);
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", c.y % 10000, c.m % 100, c.d % 100);
  return buf;
}

// Parses yyyy-mm-dd to a day count; rejects malformed or non-calendar dates.
inline long parse_iso_date(const std::string& s) {
  int y = 0, m = 0, d = 0;
  char tail = '\0';
  if (std::sscanf(s.c_str(), "%4d-%2d-%2d%c", &y, &m, &d, &tail) != 3 || s.size() != 10) {
    throw Error(Error::Code::parse, "parse_iso_date: expected yyyy-mm-dd, got '" + s + "'");
  }
  if (m < 1 || m > 12 || d < 1 || d > 31) {
    throw Error(Error::Code::parse, "parse_iso_date: month or day out of range in '" + s + "'");
  }
  const long days = days_from_civil(y, m, d);
  const CivilDate back = civil_from_days(days);
  if (back.y != y || back.m != m || back.d != d) {
    throw Error(Error::Code::parse, "parse_iso_date: no such calendar day '" + s + "'");
  }
  return days;
}

// n consecutive weekdays starting at the first weekday >= start.
inline std::vector<std::string> business_dates(long start, int n) {
  std::vector<std::string> out;
  out.reserve(static_cast<std::size_t>(n > 0 ? n : 0));
  long d = start;
  while (static_cast<int>(out.size()) < n) {
    if (!is_weekend(d)) out.push_back(iso_date(d));
    ++d;
  }
  return out;
}

}  // namespace gcg
