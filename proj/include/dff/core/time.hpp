#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>

namespace dff {

/// Hour-resolution civil timestamp in a single fixed timezone.
/// The dataset grid is a uniform sequence of hours; no DST handling.
using Hours = std::chrono::hours;
using HourTime = std::chrono::sys_time<Hours>;

HourTime make_hour(int year, int month, int day, int hour = 0);

/// Accepts "YYYY-MM-DD", "YYYY-MM-DD HH", "YYYY-MM-DD HH:MM" (minutes must be 00)
/// and the Ausgrid day format "D/M/YYYY".
std::optional<HourTime> parse_hour(std::string_view s);

std::string format_hour(HourTime t);  // "YYYY-MM-DD HH:00"
std::string format_date(HourTime t);  // "YYYY-MM-DD"

int hour_of_day(HourTime t);
HourTime midnight_of(HourTime t);

/// Half-open interval [begin, end) on the hour grid; bounds at midnight by convention.
struct DateRange {
  HourTime begin{};
  HourTime end{};

  bool contains(HourTime t) const { return begin <= t && t < end; }
  long hours() const { return (end - begin).count(); }
  bool empty() const { return end <= begin; }
};

}  // namespace dff
