#pragma once

#include <chrono>
#include <string>
#include <string_view>

namespace wifico {

// All instants are UTC at second resolution; local wall-clock text is
// converted with a fixed UTC offset (no DST rules).
using Duration = std::chrono::seconds;
using Instant = std::chrono::sys_seconds;

inline constexpr Duration kDay{86400};
inline constexpr Duration kWeek{7 * 86400};

inline std::int64_t seconds_of(Duration d) { return d.count(); }
inline std::int64_t seconds_of(Instant t) { return t.time_since_epoch().count(); }
inline Instant instant_from_seconds(std::int64_t s) { return Instant{Duration{s}}; }

// "2019-04-05 10:10:00" (also accepts 'T' as separator).
Instant parse_local_datetime(std::string_view text, Duration utc_offset);
std::string format_local_datetime(Instant t, Duration utc_offset);

// "Apr 1 00:10:51" with an explicit year.
Instant parse_syslog_timestamp(std::string_view text, int year, Duration utc_offset);
std::string format_syslog_timestamp(Instant t, Duration utc_offset);
// Month (1..12) of a syslog timestamp, used for year rollover.
unsigned syslog_month(std::string_view text);

// Accepts "233", "233s", "76m", "1h", "1h30m", "11m7s", "2d".
Duration parse_duration(std::string_view text);
std::string format_duration(Duration d);

// "+HH:MM" / "-HH:MM" / "UTC".
Duration parse_utc_offset(std::string_view text);
std::string format_utc_offset(Duration offset);

// Most recent local midnight on `weekday` (0 = Sunday .. 6 = Saturday) at or
// before `t`.
Instant week_anchor_at_or_before(Instant t, unsigned weekday, Duration utc_offset);

// Local calendar helpers.
unsigned local_weekday(Instant t, Duration utc_offset);
Duration local_time_of_day(Instant t, Duration utc_offset);
Instant local_midnight(Instant t, Duration utc_offset);
unsigned local_month(Instant t, Duration utc_offset);
int local_year(Instant t, Duration utc_offset);

}  // namespace wifico
