#pragma once

#include "ntpsim/time_units.hpp"
#include "ntpsim/wire.hpp"

namespace ntpsim {

// Host clock: true simulation time plus a per-host error. Readings are
// full NTP-era values (epoch base is the wall-clock second assigned to
// simulation start).
class SimClock {
 public:
  SimClock() = default;
  SimClock(uint32_t epoch_base_seconds, Duration initial_offset)
      : epoch_base_(epoch_base_seconds), offset_(initial_offset) {}

  // Reading at true time t, as a 64-bit NTP-scale value. Errors if the
  // offset would push the reading before the 1900 epoch. Unsigned
  // arithmetic: epoch bases beyond 2^31 seconds overflow int64 when
  // shifted, so the base lives in uint64 and only the signed local part
  // is range-checked against it.
  Result<uint64_t> now_u64(TimePoint t) const {
    int64_t local = t.ticks() + offset_.ticks();
    uint64_t base = static_cast<uint64_t>(epoch_base_) << 32;
    if (local >= 0) return Result<uint64_t>::success(base + static_cast<uint64_t>(local));
    uint64_t magnitude = static_cast<uint64_t>(-(local + 1)) + 1;
    if (magnitude > base)
      return Result<uint64_t>::failure("reading precedes the timestamp epoch");
    return Result<uint64_t>::success(base - magnitude);
  }

  Result<NtpTimestamp> now(TimePoint t) const {
    auto r = now_u64(t);
    if (!r.ok()) return Result<NtpTimestamp>::failure(r.error);
    return Result<NtpTimestamp>::success(NtpTimestamp::from_u64(*r));
  }

  Duration offset() const { return offset_; }
  void adjust(Duration theta) { offset_ += theta; }
  uint32_t epoch_base() const { return epoch_base_; }

 private:
  uint32_t epoch_base_ = 0;
  Duration offset_;
};

// The four readings of one query/response exchange, as NTP-scale values:
// t1 client transmit, t2 server receive, t3 server transmit, t4 client receive.
struct TimestampQuad {
  uint64_t t1 = 0;
  uint64_t t2 = 0;
  uint64_t t3 = 0;
  uint64_t t4 = 0;
};

// Clock offset: ((t2 - t1) + (t3 - t4)) / 2. Exact whenever the sum of the
// two legs is even, which symmetric paths always produce.
Duration compute_offset(const TimestampQuad& q);

// Round-trip delay: (t4 - t1) - (t3 - t2).
Duration compute_delay(const TimestampQuad& q);

enum class OffsetClass { slew, step, panic };

// step_threshold: largest offset absorbed by gradual slewing.
// panic_threshold: largest offset a client will correct at all.
struct Thresholds {
  Duration step_threshold = Duration::from_ticks(kTicksPerSecond / 8);  // 0.125 s
  Duration panic_threshold = Duration::from_whole_seconds(1000);

  bool valid() const {
    return step_threshold > Duration() && step_threshold < panic_threshold;
  }
};

// |theta| <= step -> slew; step < |theta| <= panic -> step; beyond -> panic.
OffsetClass classify_offset(Duration theta, const Thresholds& th);

const char* to_string(OffsetClass c);

}  // namespace ntpsim
