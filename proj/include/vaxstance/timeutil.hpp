// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <chrono>
#include <compare>
#include <string>
#include <string_view>
#include <vector>

namespace vaxstance {

/// All instants are UTC with one-second resolution.
using Timestamp = std::chrono::sys_seconds;

/// Parses RFC 3339 ("2020-03-11T00:00:00Z", "+hh:mm" offsets, optional
/// fractional seconds which are truncated). A bare date "2020-03-11" is
/// accepted as midnight UTC. Throws a validation Error on malformed input.
Timestamp parse_rfc3339(std::string_view text);

/// Canonical form: "YYYY-MM-DDTHH:MM:SSZ".
std::string format_rfc3339(Timestamp t);

Timestamp make_timestamp(int year, unsigned month, unsigned day, unsigned hour = 0,
                         unsigned minute = 0, unsigned second = 0);

struct YearMonth {
  int year = 1970;
  unsigned month = 1;  // 1..12

  auto operator<=>(const YearMonth&) const = default;

  YearMonth next() const noexcept;
  /// "YYYY-MM"
  std::string to_string() const;
  /// First instant of the month.
  Timestamp start() const;
};

YearMonth year_month_of(Timestamp t);
int year_of(Timestamp t);

/// Parses "YYYY-MM". Throws a validation Error on malformed input.
YearMonth parse_year_month(std::string_view text);

/// Inclusive range of calendar months.
struct MonthRange {
  YearMonth first;
  YearMonth last;

  bool contains(YearMonth m) const noexcept { return first <= m && m <= last; }
  std::vector<YearMonth> months() const;
};

}  // namespace vaxstance
