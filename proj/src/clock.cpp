#include "ntpsim/clock.hpp"

namespace ntpsim {

Duration compute_offset(const TimestampQuad& q) {
  // Unsigned wraparound subtraction keeps the legs correct near era bounds;
  // each leg is far below 2^63 in any plausible exchange.
  int64_t leg_out = static_cast<int64_t>(q.t2 - q.t1);
  int64_t leg_back = static_cast<int64_t>(q.t3 - q.t4);
  return Duration::from_ticks(leg_out + leg_back).half();
}

Duration compute_delay(const TimestampQuad& q) {
  int64_t total = static_cast<int64_t>(q.t4 - q.t1);
  int64_t server_hold = static_cast<int64_t>(q.t3 - q.t2);
  return Duration::from_ticks(total - server_hold);
}

OffsetClass classify_offset(Duration theta, const Thresholds& th) {
  Duration mag = theta.abs();
  if (mag <= th.step_threshold) return OffsetClass::slew;
  if (mag <= th.panic_threshold) return OffsetClass::step;
  return OffsetClass::panic;
}

const char* to_string(OffsetClass c) {
  switch (c) {
    case OffsetClass::slew: return "slew";
    case OffsetClass::step: return "step";
    case OffsetClass::panic: return "panic";
  }
  return "?";
}

}  // namespace ntpsim
