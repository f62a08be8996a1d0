#pragma once

#include <string>
#include <vector>

#include "ntpsim/time_units.hpp"

namespace ntpsim {

enum class EventKind {
  mode3_sent,
  mode3_received,
  mode4_sent,
  mode4_received,
  mode5_sent,
  mode5_received,
  kod_sent,
  kod_received,
  echo_sent,
  echo_received,
  echo_reply_sent,
  echo_reply_received,
  packet_dropped,   // dropped in transit: ingress filter, delivery ACL, loss
  host_dropped,     // dropped by the receiving host: MAC, origin check, trust
  volley_start,
  attempt_failed,
  sync_success,
  panic_desync,
  client_exit,
  refrain_enter,
  refrain_exit,
  probe_result,
  attack_start,
  attack_stop,
  capture_complete,
  capture_forwarded,
  oob_ppd_measured,
  warning,
};

const char* to_string(EventKind k);

struct TimelineEvent {
  TimePoint t;
  std::string actor;
  EventKind kind;
  std::string detail;
};

// Append-only run log. Events arrive in dispatch order, so the sequence is
// already sorted by time with deterministic tie order.
class Timeline {
 public:
  void add(TimePoint t, std::string actor, EventKind kind, std::string detail) {
    events_.push_back({t, std::move(actor), kind, std::move(detail)});
  }
  const std::vector<TimelineEvent>& events() const { return events_; }

 private:
  std::vector<TimelineEvent> events_;
};

}  // namespace ntpsim
