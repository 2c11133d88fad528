#pragma once

#include <charconv>
#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

#include "percept/common.hpp"

namespace percept {

// Whole UTC days since 1970-01-01. Sub-day precision is intentionally absent.
struct Date {
  int32_t days = 0;

  auto operator<=>(const Date&) const = default;

  Date operator+(int32_t n) const { return Date{days + n}; }
  Date operator-(int32_t n) const { return Date{days - n}; }
  int32_t operator-(Date o) const { return days - o.days; }
  Date& operator++() {
    ++days;
    return *this;
  }
};

namespace detail {

// Howard Hinnant's civil-from-days / days-from-civil algorithms.
inline int64_t days_from_civil(int y, unsigned m, unsigned d) {
  y -= m <= 2;
  const int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<int64_t>(doe) - 719468;
}

inline void civil_from_days(int64_t z, int& y, unsigned& m, unsigned& d) {
  z += 719468;
  const int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const int64_t yr = static_cast<int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  d = doy - (153 * mp + 2) / 5 + 1;
  m = mp + (mp < 10 ? 3 : -9);
  y = static_cast<int>(yr + (m <= 2));
}

inline bool parse_int(std::string_view s, int& out) {
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && p == s.data() + s.size();
}

}  // namespace detail

inline Date make_date(int y, unsigned m, unsigned d) {
  return Date{static_cast<int32_t>(detail::days_from_civil(y, m, d))};
}

// Accepts YYYY-MM-DD; anything after a 'T' or ' ' separator is truncated.
inline Date parse_date(std::string_view s) {
  if (auto cut = s.find_first_of("T "); cut != std::string_view::npos) {
    s = s.substr(0, cut);
  }
  int y, m, d;
  if (s.size() != 10 || s[4] != '-' || s[7] != '-' ||
      !detail::parse_int(s.substr(0, 4), y) || !detail::parse_int(s.substr(5, 2), m) ||
      !detail::parse_int(s.substr(8, 2), d)) {
    throw DataError("invalid date: '" + std::string(s) + "'");
  }
  if (m < 1 || m > 12 || d < 1 || d > 31) {
    throw DataError("invalid date: '" + std::string(s) + "'");
  }
  Date date = make_date(y, static_cast<unsigned>(m), static_cast<unsigned>(d));
  int y2;
  unsigned m2, d2;
  detail::civil_from_days(date.days, y2, m2, d2);
  if (y2 != y || m2 != static_cast<unsigned>(m) || d2 != static_cast<unsigned>(d)) {
    throw DataError("invalid calendar date: '" + std::string(s) + "'");
  }
  return date;
}

inline std::string to_string(Date date) {
  int y;
  unsigned m, d;
  detail::civil_from_days(date.days, y, m, d);
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", y, m, d);
  return buf;
}

}  // namespace percept
