#pragma once

#include <chrono>
#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace tml {

/// A UTC instant with microsecond precision.
using Instant = std::chrono::sys_time<std::chrono::microseconds>;

class TimestampError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CoercedTimestamp {
  Instant instant;
  bool naive = false;  // no offset in the source; interpreted as UTC
};

/// Parses ISO-8601 (date, date-time, optional fraction and offset) or a
/// numeric epoch. Numbers with magnitude >= 1e11 are epoch milliseconds,
/// smaller ones epoch seconds.
CoercedTimestamp coerce_timestamp(std::string_view raw);

/// Epoch seconds (may be fractional) to an instant, rounding to the microsecond.
Instant from_epoch_seconds(double seconds);
Instant from_epoch_millis(double millis);

/// Renders "YYYY-MM-DDTHH:MM:SSZ", with ".ffffff" only when micros are non-zero.
std::string format_iso(Instant t);

/// Renders "YYYY-MM-DD" of the UTC calendar day.
std::string format_date(Instant t);

Instant make_instant(int year, unsigned month, unsigned day, int hour = 0,
                     int minute = 0, int second = 0);

struct WeekKey {
  int iso_year = 0;
  int iso_week = 0;

  auto operator<=>(const WeekKey&) const = default;

  /// "YYYY-Www"
  std::string str() const;
  static WeekKey parse(std::string_view s);
};

WeekKey iso_week_of(Instant t);

/// Monday 00:00 UTC of the given ISO week.
Instant week_start(WeekKey w);

}  // namespace tml
