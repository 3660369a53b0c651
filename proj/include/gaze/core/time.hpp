#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <string_view>

namespace gaze {

using TimePoint = std::chrono::sys_time<std::chrono::milliseconds>;
using Clock = std::function<TimePoint()>;

/// "YYYY-MM-DDTHH:MM:SS.mmmZ"
std::string format_utc(TimePoint t);

/// Accepts the format_utc form, with or without the millisecond part.
TimePoint parse_utc(std::string_view text);

Clock system_clock();

/// Deterministic clock for scripted runs; callers advance it explicitly.
class SteppingClock {
 public:
  explicit SteppingClock(TimePoint start);

  TimePoint now() const;
  void advance(std::chrono::milliseconds dt);
  Clock as_clock() const;

 private:
  std::shared_ptr<TimePoint> now_;
};

}  // namespace gaze
