#include "dff/core/time.hpp"

#include <cstdio>

namespace dff {

namespace chr = std::chrono;

HourTime make_hour(int year, int month, int day, int hour) {
  chr::year_month_day ymd{chr::year{year}, chr::month{static_cast<unsigned>(month)},
                          chr::day{static_cast<unsigned>(day)}};
  return chr::sys_time<Hours>(chr::sys_days{ymd}) + Hours{hour};
}

std::optional<HourTime> parse_hour(std::string_view s) {
  int y = 0, mo = 0, d = 0, h = 0, mi = 0;
  char buf[40];
  if (s.size() >= sizeof(buf)) return std::nullopt;
  std::snprintf(buf, sizeof(buf), "%.*s", static_cast<int>(s.size()), s.data());

  int n = std::sscanf(buf, "%d-%d-%d %d:%d", &y, &mo, &d, &h, &mi);
  if (n >= 3) {
    if (n >= 5 && mi != 0) return std::nullopt;
    if (h < 0 || h > 23) return std::nullopt;
  } else {
    n = std::sscanf(buf, "%d/%d/%d", &d, &mo, &y);
    if (n != 3) return std::nullopt;
    h = 0;
  }
  if (y < 1900 || mo < 1 || mo > 12 || d < 1 || d > 31) return std::nullopt;
  chr::year_month_day ymd{chr::year{y}, chr::month{static_cast<unsigned>(mo)},
                          chr::day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) return std::nullopt;
  return chr::sys_time<Hours>(chr::sys_days{ymd}) + Hours{h};
}

std::string format_hour(HourTime t) {
  auto dp = chr::floor<chr::days>(t);
  chr::year_month_day ymd{dp};
  int h = static_cast<int>((t - dp).count());
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u %02d:00", int(ymd.year()),
                unsigned(ymd.month()), unsigned(ymd.day()), h);
  return buf;
}

std::string format_date(HourTime t) {
  auto dp = chr::floor<chr::days>(t);
  chr::year_month_day ymd{dp};
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", int(ymd.year()),
                unsigned(ymd.month()), unsigned(ymd.day()));
  return buf;
}

int hour_of_day(HourTime t) {
  auto dp = chr::floor<chr::days>(t);
  return static_cast<int>((t - dp).count());
}

HourTime midnight_of(HourTime t) {
  return chr::floor<chr::days>(t);
}

}  // namespace dff
