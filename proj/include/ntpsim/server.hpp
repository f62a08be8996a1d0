#pragma once

#include <map>
#include <optional>
#include <string>

#include "ntpsim/clock.hpp"
#include "ntpsim/simnet.hpp"
#include "ntpsim/wire.hpp"

namespace ntpsim {

struct RateLimitPolicy {
  Duration min_headway = Duration::from_whole_seconds(8);
  int burst_allowance = 2;
};

// Per-source arrival budget. A source stays in violation as long as packets
// keep landing within min_headway of the previous one and the count within
// the run exceeds the allowance; one quiet gap of min_headway clears it.
class RateLimiter {
 public:
  explicit RateLimiter(RateLimitPolicy policy) : policy_(policy) {}

  // Registers an arrival; true means within budget, false means violation.
  bool check_ok(Address source, TimePoint arrival);

 private:
  struct SourceState {
    TimePoint last_arrival;
    int recent_count = 0;
  };
  RateLimitPolicy policy_;
  std::map<Address, SourceState> state_;
};

struct ServerConfig {
  std::string name;
  uint8_t stratum = 2;
  bool broadcast_enabled = true;
  TimePoint broadcast_start = TimePoint::from_seconds(64);
  Duration broadcast_interval = Duration::from_whole_seconds(64);
  Address broadcast_destination;  // segment broadcast or multicast group
  RateLimitPolicy rate;
  int8_t kod_poll_exponent = 6;
  int8_t poll_field = 6;
  int8_t precision = -20;
  std::optional<SymmetricKey> key;  // when set, queries must carry a valid MAC
};

// Broadcast time server. Also covers the plain unicast server role (backup
// upstream) with broadcast_enabled off.
class NtpServer : public Host {
 public:
  // Registers itself with the network under config.name on the given segment.
  NtpServer(Network& net, uint8_t segment, ServerConfig config, SimClock clock);

  void start();  // records the upstream sync point and arms the broadcast timer
  void handle(const Delivery& d) override;

  const ServerConfig& config() const { return config_; }
  Address address() const { return address_; }
  int broadcasts_sent() const { return broadcasts_sent_; }
  int kods_sent() const { return kods_sent_; }

 private:
  void on_broadcast_timer();
  void on_mode3(const NtpPacket& query, const Delivery& d);
  uint64_t reading(TimePoint t) const;

  Network& net_;
  ServerConfig config_;
  SimClock clock_;
  Address address_;
  RateLimiter limiter_;
  uint64_t reference_reading_ = 0;  // fixed: the server is upstream-synced
  int broadcasts_sent_ = 0;
  int kods_sent_ = 0;
};

}  // namespace ntpsim
