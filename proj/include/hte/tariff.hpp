#pragma once

#include <charconv>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "hte/csv.hpp"
#include "hte/errors.hpp"

namespace hte {

// Local timestamps are minutes since 1970-01-01 00:00; dates are day counts
// since the same epoch. No time zones anywhere.
using MinuteStamp = std::int64_t;
using DayNumber = std::int64_t;

inline constexpr int kSlotsPerDay = 48;
inline constexpr int kMinutesPerDay = 24 * 60;

namespace detail {

inline int parse_int_field(std::string_view s, const char* what) {
  int v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw validation_error(std::string("cannot parse ") + what + " from \"" + std::string(s) + "\"");
  }
  return v;
}

}  // namespace detail

// "YYYY-MM-DD" -> days since epoch; validates the calendar date.
inline DayNumber parse_date(std::string_view s) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') {
    throw validation_error("bad date \"" + std::string(s) + "\" (expected YYYY-MM-DD)");
  }
  const int year = detail::parse_int_field(s.substr(0, 4), "year");
  const int month = detail::parse_int_field(s.substr(5, 2), "month");
  const int day = detail::parse_int_field(s.substr(8, 2), "day");
  const std::chrono::year_month_day ymd{std::chrono::year{year}, std::chrono::month{static_cast<unsigned>(month)},
                                        std::chrono::day{static_cast<unsigned>(day)}};
  if (!ymd.ok()) throw validation_error("invalid calendar date \"" + std::string(s) + "\"");
  return std::chrono::sys_days{ymd}.time_since_epoch().count();
}

// ISO-8601 local timestamp "YYYY-MM-DDTHH:MM[:SS]" ('T' or space separator).
inline MinuteStamp parse_timestamp(std::string_view s) {
  if (s.size() < 16 || (s[10] != 'T' && s[10] != ' ')) {
    throw validation_error("bad timestamp \"" + std::string(s) + "\"");
  }
  const DayNumber day = parse_date(s.substr(0, 10));
  const int hour = detail::parse_int_field(s.substr(11, 2), "hour");
  if (s[13] != ':') throw validation_error("bad timestamp \"" + std::string(s) + "\"");
  const int minute = detail::parse_int_field(s.substr(14, 2), "minute");
  int second = 0;
  if (s.size() > 16) {
    if (s.size() != 19 || s[16] != ':') {
      throw validation_error("bad timestamp \"" + std::string(s) + "\"");
    }
    second = detail::parse_int_field(s.substr(17, 2), "second");
  }
  if (hour > 23 || minute > 59 || second > 59) {
    throw validation_error("bad timestamp \"" + std::string(s) + "\"");
  }
  if (second != 0) throw validation_error("timestamp not on half-hour grid: " + std::string(s));
  return day * kMinutesPerDay + hour * 60 + minute;
}

inline std::string format_date(DayNumber day) {
  const std::chrono::year_month_day ymd{std::chrono::sys_days{std::chrono::days{day}}};
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

inline std::string format_timestamp(MinuteStamp minute) {
  const DayNumber day = minute >= 0 ? minute / kMinutesPerDay
                                    : (minute - (kMinutesPerDay - 1)) / kMinutesPerDay;
  const int within = static_cast<int>(minute - day * kMinutesPerDay);
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%sT%02d:%02d", format_date(day).c_str(), within / 60,
                within % 60);
  return buf;
}

inline DayNumber day_of(MinuteStamp minute) {
  return minute >= 0 ? minute / kMinutesPerDay : (minute - (kMinutesPerDay - 1)) / kMinutesPerDay;
}

inline int minute_of_day(MinuteStamp minute) {
  return static_cast<int>(minute - day_of(minute) * kMinutesPerDay);
}

inline bool on_halfhour_grid(MinuteStamp minute) { return minute_of_day(minute) % 30 == 0; }

inline int slot_of(MinuteStamp minute) { return minute_of_day(minute) / 30; }

// Month 1..12 of the stamp's calendar date.
inline int month_of(DayNumber day) {
  const std::chrono::year_month_day ymd{std::chrono::sys_days{std::chrono::days{day}}};
  return static_cast<int>(static_cast<unsigned>(ymd.month()));
}

inline bool is_weekend(DayNumber day) {
  const std::chrono::weekday wd{std::chrono::sys_days{std::chrono::days{day}}};
  return wd == std::chrono::Saturday || wd == std::chrono::Sunday;
}

class HolidayCalendar {
 public:
  HolidayCalendar() = default;
  explicit HolidayCalendar(std::vector<DayNumber> days) : days_(days.begin(), days.end()) {}

  bool contains(DayNumber day) const { return days_.count(day) > 0; }
  std::size_t size() const { return days_.size(); }

  // One ISO date per line; blank lines and '#' comments ignored.
  static HolidayCalendar load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open holiday file: " + path);
    std::vector<DayNumber> days;
    std::string line;
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty() || line[0] == '#') continue;
      days.push_back(parse_date(line));
    }
    return HolidayCalendar(std::move(days));
  }

 private:
  std::set<DayNumber> days_;
};

enum class TariffWindow { Night, Day, Peak };

inline const char* window_name(TariffWindow w) {
  switch (w) {
    case TariffWindow::Night: return "night";
    case TariffWindow::Day: return "day";
    default: return "peak";
  }
}

enum class DayScope { All, WeekendsAndHolidays, WeekdaysExcludingHolidays };

// Half-open slot span [begin, end), wrapping past midnight when begin >= end.
struct WindowSpan {
  TariffWindow window = TariffWindow::Day;
  int begin_slot = 0;
  int end_slot = 0;
  DayScope scope = DayScope::All;

  bool covers_slot(int slot) const {
    if (begin_slot < end_slot) return slot >= begin_slot && slot < end_slot;
    return slot >= begin_slot || slot < end_slot;
  }

  bool applies(bool weekday_excl_holiday) const {
    switch (scope) {
      case DayScope::All: return true;
      case DayScope::WeekendsAndHolidays: return !weekday_excl_holiday;
      default: return weekday_excl_holiday;
    }
  }
};

struct TariffPrices {
  std::string tariff;
  double night = 0.0;  // cents per kWh
  double day = 0.0;
  double peak = 0.0;

  double price(TariffWindow w) const {
    switch (w) {
      case TariffWindow::Night: return night;
      case TariffWindow::Day: return day;
      default: return peak;
    }
  }
};

// Named time-of-use windows plus per-tariff prices. Construction verifies the
// windows partition all 48 half-hours of both day types exactly once.
class TariffSchedule {
 public:
  TariffSchedule(std::vector<WindowSpan> spans, std::vector<TariffPrices> prices)
      : spans_(std::move(spans)), prices_(std::move(prices)) {
    for (const bool weekday : {true, false}) {
      for (int slot = 0; slot < kSlotsPerDay; ++slot) {
        int matches = 0;
        for (const auto& span : spans_) {
          if (span.applies(weekday) && span.covers_slot(slot)) ++matches;
        }
        if (matches != 1) {
          throw validation_error("tariff schedule: slot " + std::to_string(slot) +
                                 (weekday ? " (weekday)" : " (weekend/holiday)") + " matched " +
                                 std::to_string(matches) + " windows");
        }
      }
    }
  }

  TariffWindow window_for(int slot, bool weekday_excl_holiday) const {
    for (const auto& span : spans_) {
      if (span.applies(weekday_excl_holiday) && span.covers_slot(slot)) return span.window;
    }
    throw validation_error("tariff schedule: uncovered slot");  // unreachable after validation
  }

  const std::vector<WindowSpan>& spans() const { return spans_; }
  const std::vector<TariffPrices>& prices() const { return prices_; }

  const TariffPrices& tariff(const std::string& name) const {
    for (const auto& p : prices_) {
      if (p.tariff == name) return p;
    }
    throw validation_error("unknown tariff \"" + name + "\"");
  }

  // Built-in trial schedule: Night 23:00-08:00; Day 08:00-17:00 and
  // 19:00-23:00 every day plus 17:00-19:00 on weekends and holidays; Peak
  // 17:00-19:00 on non-holiday weekdays. Prices in cents/kWh.
  static TariffSchedule standard() {
    return TariffSchedule(
        {WindowSpan{TariffWindow::Night, 46, 16, DayScope::All},
         WindowSpan{TariffWindow::Day, 16, 34, DayScope::All},
         WindowSpan{TariffWindow::Day, 38, 46, DayScope::All},
         WindowSpan{TariffWindow::Day, 34, 38, DayScope::WeekendsAndHolidays},
         WindowSpan{TariffWindow::Peak, 34, 38, DayScope::WeekdaysExcludingHolidays}},
        {TariffPrices{"A", 12.00, 14.00, 20.00}, TariffPrices{"B", 11.00, 13.50, 26.00},
         TariffPrices{"C", 10.00, 13.00, 32.00}, TariffPrices{"D", 9.00, 12.50, 38.00}});
  }

  // Structured text, one entry per line:
  //   window,<night|day|peak>,<HH:MM>,<HH:MM>,<all|weekends_holidays|weekdays_excluding_holidays>
  //   prices,<tariff>,<night>,<day>,<peak>
  static TariffSchedule load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open tariff schedule: " + path);
    std::vector<WindowSpan> spans;
    std::vector<TariffPrices> prices;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty() || line[0] == '#') continue;
      const auto fields = detail::split_csv_line(line, line_no);
      const std::string where = "tariff schedule line " + std::to_string(line_no);
      if (fields[0] == "window") {
        if (fields.size() != 5) throw validation_error(where + ": expected 5 fields");
        WindowSpan span;
        if (fields[1] == "night") span.window = TariffWindow::Night;
        else if (fields[1] == "day") span.window = TariffWindow::Day;
        else if (fields[1] == "peak") span.window = TariffWindow::Peak;
        else throw validation_error(where + ": unknown window \"" + fields[1] + "\"");
        span.begin_slot = parse_slot(fields[2], where);
        span.end_slot = parse_slot(fields[3], where);
        if (fields[4] == "all") span.scope = DayScope::All;
        else if (fields[4] == "weekends_holidays") span.scope = DayScope::WeekendsAndHolidays;
        else if (fields[4] == "weekdays_excluding_holidays") span.scope = DayScope::WeekdaysExcludingHolidays;
        else throw validation_error(where + ": unknown scope \"" + fields[4] + "\"");
        spans.push_back(span);
      } else if (fields[0] == "prices") {
        if (fields.size() != 5) throw validation_error(where + ": expected 5 fields");
        TariffPrices p;
        p.tariff = fields[1];
        p.night = parse_double(fields[2], where);
        p.day = parse_double(fields[3], where);
        p.peak = parse_double(fields[4], where);
        prices.push_back(std::move(p));
      } else {
        throw validation_error(where + ": unknown entry \"" + fields[0] + "\"");
      }
    }
    return TariffSchedule(std::move(spans), std::move(prices));
  }

  void save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("cannot open tariff schedule for writing: " + path);
    for (const auto& span : spans_) {
      const char* scope = span.scope == DayScope::All ? "all"
                          : span.scope == DayScope::WeekendsAndHolidays
                              ? "weekends_holidays"
                              : "weekdays_excluding_holidays";
      out << "window," << window_name(span.window) << ',' << format_slot(span.begin_slot) << ','
          << format_slot(span.end_slot) << ',' << scope << '\n';
    }
    for (const auto& p : prices_) {
      out << "prices," << p.tariff << ',' << format_double(p.night) << ',' << format_double(p.day)
          << ',' << format_double(p.peak) << '\n';
    }
  }

 private:
  static int parse_slot(const std::string& hhmm, const std::string& where) {
    if (hhmm.size() != 5 || hhmm[2] != ':') {
      throw validation_error(where + ": bad time \"" + hhmm + "\"");
    }
    const int h = detail::parse_int_field(std::string_view(hhmm).substr(0, 2), "hour");
    const int m = detail::parse_int_field(std::string_view(hhmm).substr(3, 2), "minute");
    if (h > 24 || m % 30 != 0 || (h == 24 && m != 0)) {
      throw validation_error(where + ": time must be on the half-hour grid");
    }
    return (h * 60 + m) / 30 % kSlotsPerDay;
  }

  static std::string format_slot(int slot) {
    char buf[8];
    std::snprintf(buf, sizeof(buf), "%02d:%02d", slot / 2, (slot % 2) * 30);
    return buf;
  }

  std::vector<WindowSpan> spans_;
  std::vector<TariffPrices> prices_;
};

// Exactly one of Night/Day/Peak for a half-hour-grid timestamp.
inline TariffWindow classify_halfhour(MinuteStamp minute, const HolidayCalendar& holidays,
                                      const TariffSchedule& schedule) {
  if (!on_halfhour_grid(minute)) {
    throw validation_error("timestamp not on half-hour grid: " + format_timestamp(minute));
  }
  const DayNumber day = day_of(minute);
  const bool weekday_excl_holiday = !is_weekend(day) && !holidays.contains(day);
  return schedule.window_for(slot_of(minute), weekday_excl_holiday);
}

}  // namespace hte
