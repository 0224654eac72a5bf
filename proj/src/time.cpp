#include "wifico/time.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <cstdio>

#include "wifico/error.hpp"

namespace wifico {
namespace {

using namespace std::chrono;

constexpr std::array<std::string_view, 12> kMonths = {"Jan", "Feb", "Mar", "Apr", "May", "Jun",
                                                      "Jul", "Aug", "Sep", "Oct", "Nov", "Dec"};

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

int parse_int(std::string_view s, std::string_view what) {
  int value = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size()) {
    throw Error("invalid " + std::string(what) + ": '" + std::string(s) + "'");
  }
  return value;
}

Duration parse_clock(std::string_view s) {
  // HH:MM:SS
  if (s.size() != 8 || s[2] != ':' || s[5] != ':') {
    throw Error("invalid time of day: '" + std::string(s) + "'");
  }
  int h = parse_int(s.substr(0, 2), "hour");
  int m = parse_int(s.substr(3, 2), "minute");
  int sec = parse_int(s.substr(6, 2), "second");
  if (h > 23 || m > 59 || sec > 59) throw Error("time of day out of range: '" + std::string(s) + "'");
  return hours{h} + minutes{m} + seconds{sec};
}

Instant from_local(year_month_day ymd, Duration tod, Duration utc_offset) {
  if (!ymd.ok()) throw Error("invalid calendar date");
  return Instant{sys_days{ymd}.time_since_epoch()} + tod - utc_offset;
}

}  // namespace

Instant parse_local_datetime(std::string_view text, Duration utc_offset) {
  auto s = trim(text);
  if (s.size() != 19 || s[4] != '-' || s[7] != '-' || (s[10] != ' ' && s[10] != 'T')) {
    throw Error("invalid datetime (expected YYYY-MM-DD HH:MM:SS): '" + std::string(text) + "'");
  }
  int y = parse_int(s.substr(0, 4), "year");
  int mo = parse_int(s.substr(5, 2), "month");
  int d = parse_int(s.substr(8, 2), "day");
  year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) throw Error("invalid calendar date: '" + std::string(text) + "'");
  return from_local(ymd, parse_clock(s.substr(11)), utc_offset);
}

std::string format_local_datetime(Instant t, Duration utc_offset) {
  auto local = t + utc_offset;
  auto day_start = floor<days>(local);
  year_month_day ymd{day_start};
  auto tod = local - day_start;
  auto secs = tod.count();
  char buf[80];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u %02lld:%02lld:%02lld", int(ymd.year()),
                unsigned(ymd.month()), unsigned(ymd.day()), static_cast<long long>(secs / 3600),
                static_cast<long long>(secs / 60 % 60), static_cast<long long>(secs % 60));
  return buf;
}

unsigned syslog_month(std::string_view text) {
  auto s = trim(text);
  if (s.size() < 3) throw Error("invalid timestamp: '" + std::string(text) + "'");
  for (std::size_t i = 0; i < kMonths.size(); ++i) {
    if (s.substr(0, 3) == kMonths[i]) return static_cast<unsigned>(i + 1);
  }
  throw Error("invalid month in timestamp: '" + std::string(text) + "'");
}

Instant parse_syslog_timestamp(std::string_view text, int y, Duration utc_offset) {
  auto s = trim(text);
  unsigned mo = syslog_month(s);
  s.remove_prefix(3);
  if (s.empty() || s.front() != ' ') throw Error("invalid timestamp: '" + std::string(text) + "'");
  s = trim(s);
  auto space = s.find(' ');
  if (space == std::string_view::npos) throw Error("invalid timestamp: '" + std::string(text) + "'");
  int d = parse_int(s.substr(0, space), "day");
  auto clock = trim(s.substr(space));
  year_month_day ymd{year{y}, month{mo}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) throw Error("invalid calendar date: '" + std::string(text) + "'");
  return from_local(ymd, parse_clock(clock), utc_offset);
}

std::string format_syslog_timestamp(Instant t, Duration utc_offset) {
  auto local = t + utc_offset;
  auto day_start = floor<days>(local);
  year_month_day ymd{day_start};
  auto secs = (local - day_start).count();
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s %u %02lld:%02lld:%02lld",
                kMonths[unsigned(ymd.month()) - 1].data(), unsigned(ymd.day()),
                static_cast<long long>(secs / 3600), static_cast<long long>(secs / 60 % 60),
                static_cast<long long>(secs % 60));
  return buf;
}

Duration parse_duration(std::string_view text) {
  auto s = trim(text);
  if (s.empty()) throw Error("empty duration");
  std::int64_t total = 0;
  std::size_t i = 0;
  bool any = false;
  while (i < s.size()) {
    std::size_t j = i;
    while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) ++j;
    if (j == i) throw Error("invalid duration: '" + std::string(text) + "'");
    std::int64_t value = 0;
    std::from_chars(s.data() + i, s.data() + j, value);
    std::int64_t unit = 1;
    if (j < s.size()) {
      switch (s[j]) {
        case 's': unit = 1; break;
        case 'm': unit = 60; break;
        case 'h': unit = 3600; break;
        case 'd': unit = 86400; break;
        default: throw Error("invalid duration unit in '" + std::string(text) + "'");
      }
      ++j;
    } else if (any) {
      throw Error("missing unit in duration '" + std::string(text) + "'");
    }
    total += value * unit;
    any = true;
    i = j;
  }
  return Duration{total};
}

std::string format_duration(Duration d) { return std::to_string(d.count()) + "s"; }

Duration parse_utc_offset(std::string_view text) {
  auto s = trim(text);
  if (s == "UTC" || s == "Z") return Duration{0};
  if (s.size() != 6 || (s[0] != '+' && s[0] != '-') || s[3] != ':') {
    throw Error("invalid UTC offset (expected +HH:MM): '" + std::string(text) + "'");
  }
  int h = parse_int(s.substr(1, 2), "offset hours");
  int m = parse_int(s.substr(4, 2), "offset minutes");
  if (h > 14 || m > 59) throw Error("UTC offset out of range: '" + std::string(text) + "'");
  Duration d = hours{h} + minutes{m};
  return s[0] == '-' ? -d : d;
}

std::string format_utc_offset(Duration offset) {
  auto total = offset.count();
  char sign = total < 0 ? '-' : '+';
  if (total < 0) total = -total;
  char buf[48];
  std::snprintf(buf, sizeof buf, "%c%02lld:%02lld", sign, static_cast<long long>(total / 3600),
                static_cast<long long>(total / 60 % 60));
  return buf;
}

Instant local_midnight(Instant t, Duration utc_offset) {
  auto local = t + utc_offset;
  return Instant{floor<days>(local).time_since_epoch()} - utc_offset;
}

unsigned local_weekday(Instant t, Duration utc_offset) {
  return weekday{floor<days>(t + utc_offset)}.c_encoding();
}

Duration local_time_of_day(Instant t, Duration utc_offset) {
  auto local = t + utc_offset;
  return local - floor<days>(local);
}

unsigned local_month(Instant t, Duration utc_offset) {
  return unsigned(year_month_day{floor<days>(t + utc_offset)}.month());
}

int local_year(Instant t, Duration utc_offset) {
  return int(year_month_day{floor<days>(t + utc_offset)}.year());
}

Instant week_anchor_at_or_before(Instant t, unsigned wd, Duration utc_offset) {
  if (wd > 6) throw Error("weekday must be 0..6");
  auto midnight = local_midnight(t, utc_offset);
  unsigned today = local_weekday(t, utc_offset);
  unsigned back = (today + 7 - wd) % 7;
  return midnight - kDay * back;
}

}  // namespace wifico
