#pragma once

#include <compare>
#include <cstdio>
#include <string>

#include "grantprod/error.hpp"

namespace grantprod {

// Calendar date, ISO-8601 "YYYY-MM-DD" on disk.
struct Date {
  int year = 0;
  int month = 1;
  int day = 1;

  auto operator<=>(const Date&) const = default;
};

inline Date parse_date(const std::string& text) {
  Date d;
  char tail = 0;
  if (std::sscanf(text.c_str(), "%d-%d-%d%c", &d.year, &d.month, &d.day, &tail) != 3 ||
      d.month < 1 || d.month > 12 || d.day < 1 || d.day > 31) {
    fail(ErrorCode::ParseError, "invalid date: '" + text + "'");
  }
  return d;
}

inline std::string format_date(const Date& d) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", d.year, d.month, d.day);
  return buf;
}

inline Date add_months(Date d, int months) {
  int m = (d.month - 1) + months;
  d.year += m / 12;
  d.month = m % 12 + 1;
  if (d.month <= 0) {  // negative offsets
    d.month += 12;
    d.year -= 1;
  }
  return d;
}

}  // namespace grantprod
