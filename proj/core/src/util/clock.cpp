#include "devharness/util/clock.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>

namespace devharness::util {

std::int64_t SystemClock::now_millis() const {
  return std::chrono::duration_cast<std::chrono::milliseconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

ClockPtr system_clock() { return std::make_shared<SystemClock>(); }

ClockPtr fixed_clock(std::int64_t epoch_millis) {
  return std::make_shared<FixedClock>(epoch_millis);
}

std::string format_timestamp(std::int64_t epoch_millis) {
  std::time_t secs = static_cast<std::time_t>(epoch_millis / 1000);
  int millis = static_cast<int>(epoch_millis % 1000);
  if (millis < 0) {
    millis += 1000;
    --secs;
  }
  std::tm tm{};
  gmtime_r(&secs, &tm);
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02d.%03dZ", tm.tm_year + 1900,
                tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec, millis);
  return buf;
}

}  // namespace devharness::util
