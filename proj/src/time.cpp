#include "carbondate/time.hpp"

#include <array>
#include <cctype>
#include <cstdio>
#include <stdexcept>

#include "carbondate/error.hpp"

namespace carbondate {

using namespace std::chrono;

namespace {

constexpr std::array<std::string_view, 12> kMonths = {"Jan", "Feb", "Mar", "Apr", "May", "Jun",
                                                      "Jul", "Aug", "Sep", "Oct", "Nov", "Dec"};
constexpr std::array<std::string_view, 7> kShortDays = {"Sun", "Mon", "Tue", "Wed",
                                                        "Thu", "Fri", "Sat"};
constexpr std::array<std::string_view, 7> kLongDays = {"Sunday",   "Monday", "Tuesday", "Wednesday",
                                                       "Thursday", "Friday", "Saturday"};

// Small cursor over the input; every accessor fails softly so the caller
// can report a single UnparsableDate.
class Scanner {
 public:
  explicit Scanner(std::string_view s) : s_(s) {}

  bool done() const { return pos_ == s_.size(); }

  bool literal(std::string_view lit) {
    if (s_.substr(pos_, lit.size()) != lit) return false;
    pos_ += lit.size();
    return true;
  }

  bool spaces(std::size_t min = 1) {
    std::size_t n = 0;
    while (pos_ < s_.size() && s_[pos_] == ' ') {
      ++pos_;
      ++n;
    }
    return n >= min;
  }

  // Exactly `width` digits, or with width_min < width, between the two.
  bool digits(int& out, std::size_t width_min, std::size_t width_max) {
    std::size_t n = 0;
    int v = 0;
    while (n < width_max && pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
      v = v * 10 + (s_[pos_] - '0');
      ++pos_;
      ++n;
    }
    if (n < width_min) return false;
    out = v;
    return true;
  }

  bool word(std::string_view& out) {
    std::size_t start = pos_;
    while (pos_ < s_.size() && std::isalpha(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    if (pos_ == start) return false;
    out = s_.substr(start, pos_ - start);
    return true;
  }

 private:
  std::string_view s_;
  std::size_t pos_ = 0;
};

bool month_index(std::string_view name, unsigned& month) {
  for (std::size_t i = 0; i < kMonths.size(); ++i) {
    if (kMonths[i] == name) {
      month = static_cast<unsigned>(i + 1);
      return true;
    }
  }
  return false;
}

template <std::size_t N>
bool one_of(std::string_view w, const std::array<std::string_view, N>& names) {
  for (auto n : names)
    if (n == w) return true;
  return false;
}

bool clock_time(Scanner& sc, int& h, int& m, int& s) {
  return sc.digits(h, 2, 2) && sc.literal(":") && sc.digits(m, 2, 2) && sc.literal(":") &&
         sc.digits(s, 2, 2);
}

bool gmt_zone(Scanner& sc) { return sc.literal("GMT") || sc.literal("UTC"); }

std::optional<UtcTimestamp> assemble(int y, unsigned mon, int d, int h, int m, int s) {
  year_month_day ymd{year{y}, month{mon}, day{static_cast<unsigned>(d)}};
  // Leap seconds are not representable in sys_seconds; 60 is rejected.
  if (!ymd.ok() || h > 23 || m > 59 || s > 59) return std::nullopt;
  return sys_days{ymd} + hours{h} + minutes{m} + seconds{s};
}

// "Wed, 27 Feb 2013 17:27:20 GMT"
std::optional<UtcTimestamp> parse_rfc1123(std::string_view in) {
  Scanner sc(in);
  std::string_view wd, mon;
  int d = 0, y = 0, h = 0, mi = 0, s = 0;
  unsigned month = 0;
  if (!sc.word(wd) || !one_of(wd, kShortDays) || !sc.literal(",") || !sc.spaces()) return std::nullopt;
  if (!sc.digits(d, 1, 2) || !sc.spaces() || !sc.word(mon) || !month_index(mon, month)) return std::nullopt;
  if (!sc.spaces() || !sc.digits(y, 4, 4) || !sc.spaces() || !clock_time(sc, h, mi, s)) return std::nullopt;
  if (!sc.spaces() || !gmt_zone(sc) || !sc.done()) return std::nullopt;
  return assemble(y, month, d, h, mi, s);
}

// "Sunday, 06-Nov-94 08:49:37 GMT"
std::optional<UtcTimestamp> parse_rfc850(std::string_view in) {
  Scanner sc(in);
  std::string_view wd, mon;
  int d = 0, yy = 0, h = 0, mi = 0, s = 0;
  unsigned month = 0;
  if (!sc.word(wd) || !one_of(wd, kLongDays) || !sc.literal(",") || !sc.spaces()) return std::nullopt;
  if (!sc.digits(d, 2, 2) || !sc.literal("-") || !sc.word(mon) || !month_index(mon, month)) return std::nullopt;
  if (!sc.literal("-") || !sc.digits(yy, 2, 2) || !sc.spaces() || !clock_time(sc, h, mi, s)) return std::nullopt;
  if (!sc.spaces() || !gmt_zone(sc) || !sc.done()) return std::nullopt;
  int y = yy < 70 ? 2000 + yy : 1900 + yy;
  return assemble(y, month, d, h, mi, s);
}

// "Sun Nov  6 08:49:37 1994"
std::optional<UtcTimestamp> parse_asctime(std::string_view in) {
  Scanner sc(in);
  std::string_view wd, mon;
  int d = 0, y = 0, h = 0, mi = 0, s = 0;
  unsigned month = 0;
  if (!sc.word(wd) || !one_of(wd, kShortDays) || !sc.spaces()) return std::nullopt;
  if (!sc.word(mon) || !month_index(mon, month) || !sc.spaces()) return std::nullopt;
  if (!sc.digits(d, 1, 2) || !sc.spaces() || !clock_time(sc, h, mi, s)) return std::nullopt;
  if (!sc.spaces() || !sc.digits(y, 4, 4) || !sc.done()) return std::nullopt;
  return assemble(y, month, d, h, mi, s);
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

}  // namespace

Clock system_clock() {
  return [] { return floor<seconds>(std::chrono::system_clock::now()); };
}

Clock fixed_clock(UtcTimestamp at) {
  return [at] { return at; };
}

PlausibilityWindow PlausibilityWindow::ending_at(UtcTimestamp now) {
  if (!(kEarliestPlausible < now))
    throw std::invalid_argument("plausibility window must end after " +
                                format_iso_timestamp(kEarliestPlausible));
  return PlausibilityWindow{kEarliestPlausible, now};
}

std::optional<UtcTimestamp> filter_plausible(UtcTimestamp t, const PlausibilityWindow& w) {
  if (w.contains(t)) return t;
  return std::nullopt;
}

DayDate truncate_to_day(UtcTimestamp t) { return DayDate{floor<days>(t)}; }

UtcTimestamp start_of_day(DayDate d) { return sys_days{d}; }

std::int64_t days_between(DayDate from, DayDate to) {
  return (sys_days{to} - sys_days{from}).count();
}

UtcTimestamp parse_http_date(std::string_view s) {
  std::string_view t = trim(s);
  if (auto r = parse_rfc1123(t)) return *r;
  if (auto r = parse_rfc850(t)) return *r;
  if (auto r = parse_asctime(t)) return *r;
  throw UnparsableDate(std::string(s));
}

std::string format_http_date(UtcTimestamp t) {
  sys_days day = floor<days>(t);
  year_month_day ymd{day};
  hh_mm_ss hms{t - day};
  weekday wd{day};
  char buf[40];
  std::snprintf(buf, sizeof buf, "%s, %02u %s %04d %02d:%02d:%02d GMT",
                kShortDays[wd.c_encoding()].data(), static_cast<unsigned>(ymd.day()),
                kMonths[static_cast<unsigned>(ymd.month()) - 1].data(), static_cast<int>(ymd.year()),
                static_cast<int>(hms.hours().count()), static_cast<int>(hms.minutes().count()),
                static_cast<int>(hms.seconds().count()));
  return buf;
}

std::string format_iso_timestamp(UtcTimestamp t) {
  sys_days day = floor<days>(t);
  year_month_day ymd{day};
  hh_mm_ss hms{t - day};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02d", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<int>(hms.hours().count()), static_cast<int>(hms.minutes().count()),
                static_cast<int>(hms.seconds().count()));
  return buf;
}

std::string format_iso_date(DayDate d) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(d.year()),
                static_cast<unsigned>(d.month()), static_cast<unsigned>(d.day()));
  return buf;
}

namespace {

bool scan_iso_date(Scanner& sc, DayDate& out) {
  int y = 0, m = 0, d = 0;
  if (!sc.digits(y, 4, 4) || !sc.literal("-") || !sc.digits(m, 2, 2) || !sc.literal("-") ||
      !sc.digits(d, 2, 2))
    return false;
  DayDate ymd{year{y}, month{static_cast<unsigned>(m)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) return false;
  out = ymd;
  return true;
}

}  // namespace

DayDate parse_iso_date(std::string_view s) {
  Scanner sc(s);
  DayDate d;
  if (!scan_iso_date(sc, d) || !sc.done()) throw UnparsableDate(std::string(s));
  return d;
}

UtcTimestamp parse_iso_timestamp(std::string_view s) {
  Scanner sc(s);
  DayDate d;
  if (!scan_iso_date(sc, d)) throw UnparsableDate(std::string(s));
  if (sc.done()) return start_of_day(d);
  int h = 0, mi = 0, sec = 0;
  if (!sc.literal("T") || !clock_time(sc, h, mi, sec)) throw UnparsableDate(std::string(s));
  sc.literal("Z");
  if (!sc.done() || h > 23 || mi > 59 || sec > 59) throw UnparsableDate(std::string(s));
  return start_of_day(d) + hours{h} + minutes{mi} + seconds{sec};
}

}  // namespace carbondate
