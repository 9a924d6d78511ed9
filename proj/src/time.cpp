#include "tml/time.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>

namespace tml {

namespace {

using namespace std::chrono;

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

bool is_digit(char c) { return c >= '0' && c <= '9'; }

// Reads exactly n digits at pos, advancing pos.
bool read_fixed(std::string_view s, std::size_t& pos, std::size_t n, int& out) {
  if (pos + n > s.size()) return false;
  int v = 0;
  for (std::size_t i = 0; i < n; ++i) {
    char c = s[pos + i];
    if (!is_digit(c)) return false;
    v = v * 10 + (c - '0');
  }
  out = v;
  pos += n;
  return true;
}

bool looks_numeric(std::string_view s) {
  if (s.empty()) return false;
  std::size_t i = 0;
  if (s[0] == '-' || s[0] == '+') i = 1;
  bool digits = false, dot = false;
  for (; i < s.size(); ++i) {
    if (is_digit(s[i])) {
      digits = true;
    } else if (s[i] == '.' && !dot) {
      dot = true;
    } else {
      return false;
    }
  }
  return digits;
}

[[noreturn]] void fail(std::string_view raw, const char* why) {
  throw TimestampError("unparseable timestamp '" + std::string(raw) + "': " + why);
}

CoercedTimestamp parse_iso(std::string_view raw) {
  std::string_view s = raw;
  std::size_t pos = 0;
  int year = 0, month = 0, day = 0;
  if (!read_fixed(s, pos, 4, year)) fail(raw, "expected 4-digit year");
  if (pos >= s.size() || s[pos] != '-') fail(raw, "expected '-' after year");
  ++pos;
  if (!read_fixed(s, pos, 2, month)) fail(raw, "expected 2-digit month");
  if (pos >= s.size() || s[pos] != '-') fail(raw, "expected '-' after month");
  ++pos;
  if (!read_fixed(s, pos, 2, day)) fail(raw, "expected 2-digit day");

  year_month_day ymd{std::chrono::year{year}, std::chrono::month{static_cast<unsigned>(month)},
                     std::chrono::day{static_cast<unsigned>(day)}};
  if (!ymd.ok()) fail(raw, "invalid calendar date");

  int hour = 0, minute = 0, second = 0;
  std::int64_t micros = 0;
  bool naive = true;
  std::int64_t offset_minutes = 0;

  if (pos < s.size()) {
    if (s[pos] != 'T' && s[pos] != 't' && s[pos] != ' ') fail(raw, "expected 'T' or ' ' separator");
    ++pos;
    if (!read_fixed(s, pos, 2, hour)) fail(raw, "expected 2-digit hour");
    if (pos >= s.size() || s[pos] != ':') fail(raw, "expected ':' after hour");
    ++pos;
    if (!read_fixed(s, pos, 2, minute)) fail(raw, "expected 2-digit minute");
    if (pos < s.size() && s[pos] == ':') {
      ++pos;
      if (!read_fixed(s, pos, 2, second)) fail(raw, "expected 2-digit second");
      if (pos < s.size() && (s[pos] == '.' || s[pos] == ',')) {
        ++pos;
        std::size_t start = pos;
        std::int64_t scale = 100000;
        while (pos < s.size() && is_digit(s[pos])) {
          if (scale > 0) {
            micros += (s[pos] - '0') * scale;
            scale /= 10;
          }
          ++pos;
        }
        if (pos == start) fail(raw, "empty fractional seconds");
      }
    }
    if (hour > 23 || minute > 59 || second > 60) fail(raw, "time of day out of range");
    if (pos < s.size()) {
      char c = s[pos];
      if (c == 'Z' || c == 'z') {
        naive = false;
        ++pos;
      } else if (c == '+' || c == '-') {
        int sign = c == '-' ? -1 : 1;
        ++pos;
        int oh = 0, om = 0;
        if (!read_fixed(s, pos, 2, oh)) fail(raw, "bad UTC offset");
        if (pos < s.size() && s[pos] == ':') ++pos;
        if (pos < s.size() && !read_fixed(s, pos, 2, om)) fail(raw, "bad UTC offset minutes");
        if (oh > 23 || om > 59) fail(raw, "UTC offset out of range");
        offset_minutes = sign * (oh * 60 + om);
        naive = false;
      }
    }
  }
  if (pos != s.size()) fail(raw, "trailing characters");

  auto local = sys_days{ymd} + hours{hour} + std::chrono::minutes{minute} + seconds{second} +
               microseconds{micros};
  Instant utc = local - std::chrono::minutes{offset_minutes};
  return {utc, naive};
}

}  // namespace

Instant from_epoch_seconds(double s) {
  return Instant{microseconds{static_cast<std::int64_t>(std::llround(s * 1e6))}};
}

Instant from_epoch_millis(double ms) {
  return Instant{microseconds{static_cast<std::int64_t>(std::llround(ms * 1e3))}};
}

CoercedTimestamp coerce_timestamp(std::string_view raw) {
  std::string_view s = trim(raw);
  if (s.empty()) fail(raw, "empty");
  if (looks_numeric(s)) {
    double v = 0;
    auto [p, ec] = std::from_chars(s.data() + (s[0] == '+' ? 1 : 0), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size()) fail(raw, "bad number");
    if (!std::isfinite(v)) fail(raw, "non-finite epoch");
    // 1e11 seconds is year 5138; below that, millisecond values would be 1973 or earlier.
    if (std::fabs(v) >= 1e11) return {from_epoch_millis(v), false};
    return {from_epoch_seconds(v), false};
  }
  return parse_iso(s);
}

std::string format_iso(Instant t) {
  auto day = floor<days>(t);
  year_month_day ymd{day};
  auto tod = t - day;
  auto h = duration_cast<hours>(tod);
  auto m = duration_cast<minutes>(tod - h);
  auto sec = duration_cast<seconds>(tod - h - m);
  auto us = (tod - h - m - sec).count();
  char buf[64];
  if (us == 0) {
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                  static_cast<int>(h.count()), static_cast<int>(m.count()),
                  static_cast<int>(sec.count()));
  } else {
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02d.%06lldZ",
                  static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                  static_cast<unsigned>(ymd.day()), static_cast<int>(h.count()),
                  static_cast<int>(m.count()), static_cast<int>(sec.count()),
                  static_cast<long long>(us));
  }
  return buf;
}

std::string format_date(Instant t) {
  year_month_day ymd{floor<days>(t)};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

Instant make_instant(int y, unsigned mo, unsigned d, int h, int mi, int s) {
  sys_days day{year_month_day{std::chrono::year{y}, std::chrono::month{mo}, std::chrono::day{d}}};
  return Instant{day + hours{h} + minutes{mi} + seconds{s}};
}

std::string WeekKey::str() const {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-W%02d", iso_year, iso_week);
  return buf;
}

WeekKey WeekKey::parse(std::string_view s) {
  WeekKey w;
  std::size_t pos = 0;
  if (!read_fixed(s, pos, 4, w.iso_year) || pos + 2 > s.size() || s[pos] != '-' ||
      (s[pos + 1] != 'W' && s[pos + 1] != 'w')) {
    throw std::invalid_argument("bad ISO week '" + std::string(s) + "'");
  }
  pos += 2;
  if (!read_fixed(s, pos, 2, w.iso_week) || pos != s.size() || w.iso_week < 1 ||
      w.iso_week > 53) {
    throw std::invalid_argument("bad ISO week '" + std::string(s) + "'");
  }
  return w;
}

WeekKey iso_week_of(Instant t) {
  sys_days day = floor<days>(t);
  // Monday = 0 .. Sunday = 6
  unsigned wd = (weekday{day}.c_encoding() + 6) % 7;
  sys_days thursday = day - days{wd} + days{3};
  year_month_day tymd{thursday};
  sys_days jan1{tymd.year() / January / 1};
  int doy = static_cast<int>((thursday - jan1).count());
  return {static_cast<int>(tymd.year()), doy / 7 + 1};
}

Instant week_start(WeekKey w) {
  // Jan 4th is always in week 1.
  sys_days jan4{std::chrono::year{w.iso_year} / January / 4};
  unsigned wd = (weekday{jan4}.c_encoding() + 6) % 7;
  sys_days monday1 = jan4 - days{wd};
  return Instant{monday1 + days{7 * (w.iso_week - 1)}};
}

}  // namespace tml
