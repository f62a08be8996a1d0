#pragma once

#include <cmath>
#include <compare>
#include <cstdint>
#include <string>

namespace ntpsim {

// All simulation time is integer arithmetic in units of 2^-32 seconds, the
// resolution of an NTP timestamp fraction. That keeps every run bit-exact
// and makes wire-timestamp conversions lossless.
inline constexpr int64_t kTicksPerSecond = INT64_C(1) << 32;

// Signed span of time. Range is about +/-68 years, far beyond any scenario.
class Duration {
 public:
  constexpr Duration() = default;
  static constexpr Duration from_ticks(int64_t t) { return Duration(t); }
  static constexpr Duration from_whole_seconds(int64_t s) {
    return Duration(s * kTicksPerSecond);
  }
  static Duration from_seconds(double s) {
    return Duration(static_cast<int64_t>(std::llround(s * static_cast<double>(kTicksPerSecond))));
  }

  constexpr int64_t ticks() const { return ticks_; }
  double seconds() const { return static_cast<double>(ticks_) / static_cast<double>(kTicksPerSecond); }

  constexpr Duration operator+(Duration o) const { return Duration(ticks_ + o.ticks_); }
  constexpr Duration operator-(Duration o) const { return Duration(ticks_ - o.ticks_); }
  constexpr Duration operator-() const { return Duration(-ticks_); }
  constexpr Duration operator*(int64_t k) const { return Duration(ticks_ * k); }
  // Floor division keeps halving exact for the even sums produced by
  // symmetric-path algebra and well defined otherwise.
  constexpr Duration half() const { return Duration(ticks_ >> 1); }
  constexpr Duration abs() const { return Duration(ticks_ < 0 ? -ticks_ : ticks_); }
  Duration& operator+=(Duration o) { ticks_ += o.ticks_; return *this; }

  constexpr auto operator<=>(const Duration&) const = default;

 private:
  explicit constexpr Duration(int64_t t) : ticks_(t) {}
  int64_t ticks_ = 0;
};

// Instant on the simulation clock; zero is scenario start.
class TimePoint {
 public:
  constexpr TimePoint() = default;
  static constexpr TimePoint from_ticks(int64_t t) { return TimePoint(t); }
  static TimePoint from_seconds(double s) { return TimePoint(Duration::from_seconds(s).ticks()); }

  constexpr int64_t ticks() const { return ticks_; }
  double seconds() const { return static_cast<double>(ticks_) / static_cast<double>(kTicksPerSecond); }

  constexpr TimePoint operator+(Duration d) const { return TimePoint(ticks_ + d.ticks()); }
  constexpr TimePoint operator-(Duration d) const { return TimePoint(ticks_ - d.ticks()); }
  constexpr Duration operator-(TimePoint o) const { return Duration::from_ticks(ticks_ - o.ticks_); }

  constexpr auto operator<=>(const TimePoint&) const = default;

 private:
  explicit constexpr TimePoint(int64_t t) : ticks_(t) {}
  int64_t ticks_ = 0;
};

// Renders whole simulation seconds as H:MM:SS, the clock style used in the
// run timeline (hours unpadded: "0:01:39", "2:30:23").
std::string format_hms(TimePoint t);

}  // namespace ntpsim
