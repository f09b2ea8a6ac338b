// SPDX-License-Identifier: Apache-2.0
#include "vaxstance/timeutil.hpp"

#include "vaxstance/error.hpp"

#include <charconv>
#include <cstdio>

namespace vaxstance {

namespace {

using namespace std::chrono;

bool read_int(std::string_view s, std::size_t pos, std::size_t width, int& out) {
  if (pos + width > s.size()) return false;
  for (std::size_t i = pos; i < pos + width; ++i) {
    if (s[i] < '0' || s[i] > '9') return false;
  }
  const auto* first = s.data() + pos;
  return std::from_chars(first, first + width, out).ec == std::errc{};
}

[[noreturn]] void bad_timestamp(std::string_view text) {
  throw validation_error("malformed RFC 3339 timestamp '" + std::string(text) + "'");
}

}  // namespace

Timestamp make_timestamp(int year, unsigned month, unsigned day, unsigned hour, unsigned minute,
                         unsigned second) {
  const year_month_day ymd{std::chrono::year{year}, std::chrono::month{month},
                           std::chrono::day{day}};
  return sys_days{ymd} + hours{hour} + minutes{minute} + seconds{second};
}

Timestamp parse_rfc3339(std::string_view text) {
  int y = 0, mo = 0, d = 0, h = 0, mi = 0, s = 0;
  if (!read_int(text, 0, 4, y) || text.size() < 10 || text[4] != '-' ||
      !read_int(text, 5, 2, mo) || text[7] != '-' || !read_int(text, 8, 2, d)) {
    bad_timestamp(text);
  }
  const year_month_day ymd{std::chrono::year{y}, std::chrono::month{static_cast<unsigned>(mo)},
                           std::chrono::day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) bad_timestamp(text);
  if (text.size() == 10) return sys_days{ymd};

  if ((text[10] != 'T' && text[10] != 't' && text[10] != ' ') || !read_int(text, 11, 2, h) ||
      text.size() < 19 || text[13] != ':' || !read_int(text, 14, 2, mi) || text[16] != ':' ||
      !read_int(text, 17, 2, s)) {
    bad_timestamp(text);
  }
  // Leap second 60 is folded into the next second.
  if (h > 23 || mi > 59 || s > 60) bad_timestamp(text);

  std::size_t pos = 19;
  if (pos < text.size() && text[pos] == '.') {
    ++pos;
    const std::size_t digits = pos;
    while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') ++pos;
    if (pos == digits) bad_timestamp(text);
  }
  Timestamp t = sys_days{ymd} + hours{h} + minutes{mi} + seconds{s};
  if (pos >= text.size()) bad_timestamp(text);
  const char zone = text[pos];
  if (zone == 'Z' || zone == 'z') {
    if (pos + 1 != text.size()) bad_timestamp(text);
    return t;
  }
  int oh = 0, om = 0;
  if ((zone != '+' && zone != '-') || pos + 6 != text.size() || !read_int(text, pos + 1, 2, oh) ||
      text[pos + 3] != ':' || !read_int(text, pos + 4, 2, om) || oh > 23 || om > 59) {
    bad_timestamp(text);
  }
  const seconds offset = hours{oh} + minutes{om};
  return zone == '+' ? t - offset : t + offset;
}

std::string format_rfc3339(Timestamp t) {
  const auto day_point = floor<days>(t);
  const year_month_day ymd{day_point};
  const hh_mm_ss<seconds> tod{t - day_point};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<int>(tod.hours().count()), static_cast<int>(tod.minutes().count()),
                static_cast<int>(tod.seconds().count()));
  return buf;
}

YearMonth YearMonth::next() const noexcept {
  return month == 12 ? YearMonth{year + 1, 1} : YearMonth{year, month + 1};
}

std::string YearMonth::to_string() const {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u", year, month);
  return buf;
}

Timestamp YearMonth::start() const { return make_timestamp(year, month, 1); }

YearMonth year_month_of(Timestamp t) {
  const year_month_day ymd{floor<days>(t)};
  return {static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month())};
}

int year_of(Timestamp t) { return year_month_of(t).year; }

YearMonth parse_year_month(std::string_view text) {
  int y = 0, m = 0;
  if (text.size() != 7 || !read_int(text, 0, 4, y) || text[4] != '-' || !read_int(text, 5, 2, m) ||
      m < 1 || m > 12) {
    throw validation_error("malformed year-month '" + std::string(text) + "' (want YYYY-MM)");
  }
  return {y, static_cast<unsigned>(m)};
}

std::vector<YearMonth> MonthRange::months() const {
  std::vector<YearMonth> out;
  for (YearMonth m = first; m <= last; m = m.next()) out.push_back(m);
  return out;
}

}  // namespace vaxstance
