#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>

namespace carbondate {

/// Second-granularity UTC instant. Local zones are never stored.
using UtcTimestamp = std::chrono::sys_seconds;

/// Calendar date in UTC, used wherever evaluation works at day granularity.
using DayDate = std::chrono::year_month_day;

/// Injected source of "now". Nothing in the library reads the wall clock on its own.
using Clock = std::function<UtcTimestamp()>;

Clock system_clock();
Clock fixed_clock(UtcTimestamp at);

/// 1995-01-01T00:00:00Z, the start of public web archiving.
inline constexpr UtcTimestamp kEarliestPlausible{
    std::chrono::sys_days{std::chrono::year{1995} / 1 / 1}};

/// Interval [earliest, now] outside of which evidence timestamps are discarded.
struct PlausibilityWindow {
  UtcTimestamp earliest = kEarliestPlausible;
  UtcTimestamp now;

  /// Throws std::invalid_argument unless earliest < now.
  static PlausibilityWindow ending_at(UtcTimestamp now);

  bool contains(UtcTimestamp t) const noexcept { return earliest <= t && t <= now; }
};

/// Returns t when it lies inside the window, otherwise nothing.
std::optional<UtcTimestamp> filter_plausible(UtcTimestamp t, const PlausibilityWindow& w);

DayDate truncate_to_day(UtcTimestamp t);

/// Midnight UTC at the start of the given day.
UtcTimestamp start_of_day(DayDate d);

/// Signed number of calendar days from `from` to `to`.
std::int64_t days_between(DayDate from, DayDate to);

/// Parses the three HTTP-date forms: RFC 1123, RFC 850 and asctime.
/// GMT (or UTC) is the only accepted zone. Two-digit RFC 850 years map
/// to 1970..2069. Throws UnparsableDate.
UtcTimestamp parse_http_date(std::string_view s);

/// RFC 1123 rendering, e.g. "Wed, 27 Feb 2013 17:27:20 GMT".
std::string format_http_date(UtcTimestamp t);

/// "YYYY-MM-DDTHH:MM:SS".
std::string format_iso_timestamp(UtcTimestamp t);

/// "YYYY-MM-DD".
std::string format_iso_date(DayDate d);

/// Strict "YYYY-MM-DD". Throws UnparsableDate.
DayDate parse_iso_date(std::string_view s);

/// Accepts "YYYY-MM-DDTHH:MM:SS" with an optional trailing "Z", or a bare
/// "YYYY-MM-DD" meaning midnight. Throws UnparsableDate.
UtcTimestamp parse_iso_timestamp(std::string_view s);

inline UtcTimestamp from_unix_seconds(std::int64_t s) {
  return UtcTimestamp{std::chrono::seconds{s}};
}

inline std::int64_t to_unix_seconds(UtcTimestamp t) { return t.time_since_epoch().count(); }

}  // namespace carbondate
