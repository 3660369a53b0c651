#include "gaze/core/time.hpp"

#include <charconv>
#include <cstdio>

#include "gaze/core/error.hpp"

namespace gaze {

namespace {

// Civil-date conversions on the proleptic Gregorian calendar (days since 1970-01-01).
std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, std::int64_t& y, unsigned& m, unsigned& d) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  y = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  d = doy - (153 * mp + 2) / 5 + 1;
  m = mp < 10 ? mp + 3 : mp - 9;
  y += m <= 2;
}

int parse_int(std::string_view s, std::size_t pos, std::size_t len) {
  if (pos + len > s.size()) fail(Errc::SchemaViolation, "bad timestamp '" + std::string(s) + "'");
  int v = 0;
  auto [ptr, ec] = std::from_chars(s.data() + pos, s.data() + pos + len, v);
  if (ec != std::errc() || ptr != s.data() + pos + len)
    fail(Errc::SchemaViolation, "bad timestamp '" + std::string(s) + "'");
  return v;
}

}  // namespace

std::string format_utc(TimePoint t) {
  const std::int64_t ms = t.time_since_epoch().count();
  std::int64_t days = ms >= 0 ? ms / 86400000 : -((-ms + 86399999) / 86400000);
  std::int64_t rem = ms - days * 86400000;
  std::int64_t y;
  unsigned m, d;
  civil_from_days(days, y, m, d);
  char buf[96];
  std::snprintf(buf, sizeof buf, "%04lld-%02u-%02uT%02lld:%02lld:%02lld.%03lldZ", static_cast<long long>(y), m, d,
                static_cast<long long>(rem / 3600000), static_cast<long long>(rem / 60000 % 60),
                static_cast<long long>(rem / 1000 % 60), static_cast<long long>(rem % 1000));
  return buf;
}

TimePoint parse_utc(std::string_view s) {
  if (s.size() < 20 || s[4] != '-' || s[7] != '-' || s[10] != 'T' || s[13] != ':' || s[16] != ':' || s.back() != 'Z')
    fail(Errc::SchemaViolation, "bad timestamp '" + std::string(s) + "'");
  int y = parse_int(s, 0, 4), mo = parse_int(s, 5, 2), d = parse_int(s, 8, 2);
  int h = parse_int(s, 11, 2), mi = parse_int(s, 14, 2), sec = parse_int(s, 17, 2);
  int ms = 0;
  if (s.size() == 24 && s[19] == '.') {
    ms = parse_int(s, 20, 3);
  } else if (s.size() != 20) {
    fail(Errc::SchemaViolation, "bad timestamp '" + std::string(s) + "'");
  }
  if (mo < 1 || mo > 12 || d < 1 || d > 31 || h > 23 || mi > 59 || sec > 60)
    fail(Errc::SchemaViolation, "bad timestamp '" + std::string(s) + "'");
  std::int64_t days = days_from_civil(y, static_cast<unsigned>(mo), static_cast<unsigned>(d));
  std::int64_t total = ((days * 24 + h) * 60 + mi) * 60 + sec;
  return TimePoint(std::chrono::milliseconds(total * 1000 + ms));
}

Clock system_clock() {
  return [] { return std::chrono::time_point_cast<std::chrono::milliseconds>(std::chrono::system_clock::now()); };
}

SteppingClock::SteppingClock(TimePoint start) : now_(std::make_shared<TimePoint>(start)) {}

TimePoint SteppingClock::now() const { return *now_; }

void SteppingClock::advance(std::chrono::milliseconds dt) { *now_ += dt; }

Clock SteppingClock::as_clock() const {
  auto state = now_;
  return [state] { return *state; };
}

}  // namespace gaze
