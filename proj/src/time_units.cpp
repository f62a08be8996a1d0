#include "ntpsim/time_units.hpp"

#include <cstdio>

namespace ntpsim {

std::string format_hms(TimePoint t) {
  int64_t total = t.ticks() / kTicksPerSecond;
  if (total < 0) total = 0;
  int64_t h = total / 3600;
  int mm = static_cast<int>((total / 60) % 60);
  int ss = static_cast<int>(total % 60);
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%lld:%02d:%02d", static_cast<long long>(h), mm, ss);
  return buf;
}

}  // namespace ntpsim
