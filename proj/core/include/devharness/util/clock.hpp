#pragma once

#include <cstdint>
#include <memory>
#include <string>

namespace devharness::util {

// Wall-clock abstraction. Runs that must be byte-identical across
// executions use a fixed clock so no timestamp leaks real time.
class Clock {
 public:
  virtual ~Clock() = default;
  virtual std::int64_t now_millis() const = 0;
};

class SystemClock final : public Clock {
 public:
  std::int64_t now_millis() const override;
};

class FixedClock final : public Clock {
 public:
  explicit FixedClock(std::int64_t epoch_millis) : epoch_(epoch_millis) {}
  std::int64_t now_millis() const override { return epoch_; }

 private:
  std::int64_t epoch_;
};

using ClockPtr = std::shared_ptr<const Clock>;

ClockPtr system_clock();
ClockPtr fixed_clock(std::int64_t epoch_millis);

// ISO-8601 UTC, millisecond precision.
std::string format_timestamp(std::int64_t epoch_millis);

}  // namespace devharness::util
