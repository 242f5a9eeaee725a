#include "dataportraits/time.hpp"

#include <cstdio>
#include <stdexcept>

namespace dataportraits {
namespace {

// Howard Hinnant's civil calendar conversions.
std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const auto yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, std::int64_t& y, unsigned& m, unsigned& d) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const auto doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  y = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  d = doy - (153 * mp + 2) / 5 + 1;
  m = mp < 10 ? mp + 3 : mp - 9;
  y += m <= 2;
}

int digits(std::string_view s, std::size_t pos, std::size_t n) {
  if (pos + n > s.size()) throw std::invalid_argument("truncated timestamp");
  int v = 0;
  for (std::size_t i = pos; i < pos + n; ++i) {
    if (s[i] < '0' || s[i] > '9') throw std::invalid_argument("bad digit in timestamp");
    v = v * 10 + (s[i] - '0');
  }
  return v;
}

void expect(std::string_view s, std::size_t pos, char c) {
  if (pos >= s.size() || s[pos] != c)
    throw std::invalid_argument("malformed timestamp: " + std::string(s));
}

std::int64_t parse_millis(std::string_view s) {
  // YYYY-MM-DDTHH:MM:SS[.fff][Z|+00:00]
  const int year = digits(s, 0, 4);
  expect(s, 4, '-');
  const int month = digits(s, 5, 2);
  expect(s, 7, '-');
  const int day = digits(s, 8, 2);
  if (s.size() <= 10 || (s[10] != 'T' && s[10] != ' '))
    throw std::invalid_argument("malformed timestamp: " + std::string(s));
  const int hour = digits(s, 11, 2);
  expect(s, 13, ':');
  const int minute = digits(s, 14, 2);
  expect(s, 16, ':');
  const int second = digits(s, 17, 2);
  if (month < 1 || month > 12 || day < 1 || day > 31 || hour > 23 || minute > 59 || second > 60)
    throw std::invalid_argument("timestamp field out of range: " + std::string(s));
  {
    std::int64_t y;
    unsigned m, d;
    civil_from_days(days_from_civil(year, month, day), y, m, d);
    if (static_cast<int>(d) != day) throw std::invalid_argument("no such date: " + std::string(s));
  }

  std::size_t pos = 19;
  int millis = 0;
  if (pos < s.size() && s[pos] == '.') {
    ++pos;
    int scale = 100;
    const std::size_t start = pos;
    while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') {
      millis += (s[pos] - '0') * scale;
      scale /= 10;
      ++pos;
    }
    if (pos == start) throw std::invalid_argument("empty fraction in timestamp");
  }
  if (pos < s.size() && s[pos] == 'Z') {
    ++pos;
  } else if (pos < s.size() && (s[pos] == '+' || s[pos] == '-')) {
    const int sign = s[pos] == '-' ? -1 : 1;
    const int oh = digits(s, pos + 1, 2);
    std::size_t next = pos + 3;
    if (next < s.size() && s[next] == ':') ++next;
    const int om = digits(s, next, 2);
    pos = next + 2;
    const std::int64_t offset = sign * (oh * 3600 + om * 60);
    const std::int64_t days = days_from_civil(year, month, day);
    if (pos != s.size()) throw std::invalid_argument("trailing characters in timestamp");
    return ((days * 86400 + hour * 3600 + minute * 60 + second) - offset) * 1000 + millis;
  } else {
    throw std::invalid_argument("timestamp must be UTC (Z or offset): " + std::string(s));
  }
  if (pos != s.size()) throw std::invalid_argument("trailing characters in timestamp");
  const std::int64_t days = days_from_civil(year, month, day);
  return (days * 86400 + hour * 3600 + minute * 60 + second) * 1000 + millis;
}

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

}  // namespace

Timestamp parse_timestamp(std::string_view text) {
  return Timestamp{std::chrono::seconds{floor_div(parse_millis(text), 1000)}};
}

TimestampMs parse_timestamp_ms(std::string_view text) {
  return TimestampMs{std::chrono::milliseconds{parse_millis(text)}};
}

std::string format_timestamp(TimestampMs ts) {
  const std::int64_t ms = ts.time_since_epoch().count();
  const std::int64_t secs = floor_div(ms, 1000);
  const std::int64_t frac = ms - secs * 1000;
  const std::int64_t days = floor_div(secs, 86400);
  const std::int64_t rem = secs - days * 86400;
  std::int64_t y;
  unsigned m, d;
  civil_from_days(days, y, m, d);
  char buf[40];
  if (frac == 0) {
    std::snprintf(buf, sizeof buf, "%04lld-%02u-%02uT%02lld:%02lld:%02lldZ",
                  static_cast<long long>(y), m, d, static_cast<long long>(rem / 3600),
                  static_cast<long long>(rem / 60 % 60), static_cast<long long>(rem % 60));
  } else {
    std::snprintf(buf, sizeof buf, "%04lld-%02u-%02uT%02lld:%02lld:%02lld.%03lldZ",
                  static_cast<long long>(y), m, d, static_cast<long long>(rem / 3600),
                  static_cast<long long>(rem / 60 % 60), static_cast<long long>(rem % 60),
                  static_cast<long long>(frac));
  }
  return buf;
}

std::string format_timestamp(Timestamp ts) {
  return format_timestamp(std::chrono::time_point_cast<std::chrono::milliseconds>(ts));
}

std::int64_t utc_day(TimestampMs ts) {
  return floor_div(ts.time_since_epoch().count(), 86400000);
}

TimestampMs now_ms() {
  return std::chrono::time_point_cast<std::chrono::milliseconds>(std::chrono::system_clock::now());
}

}  // namespace dataportraits
