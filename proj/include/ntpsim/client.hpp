#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ntpsim/clock.hpp"
#include "ntpsim/simnet.hpp"
#include "ntpsim/wire.hpp"

namespace ntpsim {

enum class ClientPhase { idle, calibrating, synced, refrain };

const char* to_string(ClientPhase p);

enum class PanicBehavior { recalibrate, quit };

struct BehaviorProfile {
  PanicBehavior panic_behavior = PanicBehavior::recalibrate;
  bool kod_nonce_check = true;   // honor a kiss only when its origin is a pending nonce
  bool out_of_band_ppd = false;  // measure path delay with echo frames, never a query volley
  std::optional<std::string> backup_server;  // host name; polled as an independent association
  // Host names whose broadcasts this client trusts; installed by the runner
  // as a network-level filter, so it never appears in client logic.
  std::vector<std::string> trusted_broadcast_sources;
};

struct ClientConfig {
  std::string name;
  Duration clock_offset;  // initial clock error relative to true time
  Thresholds thresholds;
  BehaviorProfile behavior;
  int volley_size = 4;
  Duration volley_spacing = Duration::from_whole_seconds(2);
  Duration volley_timeout = Duration::from_whole_seconds(8);
  Duration mobilize_delay = Duration::from_whole_seconds(2);
  Duration recalibrate_delay = Duration::from_whole_seconds(2);
  // Earliest gap between consecutive calibration attempts; 0 lets the next
  // attempt start as soon as the refrain or timeout allows.
  Duration min_retry_interval;
  int8_t own_poll = 6;
  int8_t precision = -20;
  std::optional<SymmetricKey> key;  // when set, mode 4/5 input must carry a valid MAC
  Duration backup_poll = Duration::from_whole_seconds(64);
  TimePoint backup_start = TimePoint::from_seconds(64);
  Duration oob_interval = Duration::from_whole_seconds(64);  // echo re-measure cadence
};

// Broadcast-mode NTP client: mobilizes on the first mode 5, calibrates path
// delay with a query volley (or echo frames), then consumes mode 5 time.
// Also answers mode 3 queries from lower strata, which is how the probe
// observes it.
class NtpClient : public Host {
 public:
  NtpClient(Network& net, uint8_t segment, ClientConfig config, SimClock clock);

  void start();  // arms backup polling; broadcast handling is event-driven
  void handle(const Delivery& d) override;

  // Observability for the runner and tests.
  ClientPhase phase() const { return phase_; }
  bool exited() const { return exited_; }
  const std::string& exit_reason() const { return exit_reason_; }
  uint8_t stratum() const { return stratum_; }
  std::optional<Duration> ppd() const { return ppd_; }
  uint64_t reference_reading() const { return reference_reading_; }
  int calibration_attempts() const { return attempts_; }
  int failed_attempts() const { return failed_attempts_; }
  const std::vector<TimePoint>& sync_times() const { return sync_times_; }
  const std::vector<TimePoint>& desync_times() const { return desync_times_; }
  const SimClock& clock() const { return clock_; }
  Address address() const { return address_; }

 private:
  struct Sample {
    Duration theta;
    Duration delta;
    uint8_t server_stratum = 0;
  };

  uint64_t reading(TimePoint t) const;
  bool mac_gate(const NtpPacket& pkt, const Delivery& d);
  Duration one_way_offset(const NtpPacket& pkt, const Delivery& d) const;
  void send_packet(const NtpPacket& pkt, Address dest);
  void on_mode5(const NtpPacket& pkt, const Delivery& d);
  void on_mode4(const NtpPacket& pkt, const Delivery& d);
  void on_kod(const NtpPacket& pkt, const Delivery& d);
  void serve_mode3(const NtpPacket& query, const Delivery& d);
  void on_panic(Duration theta, const Delivery& d);

  void schedule_volley(TimePoint earliest);
  void start_volley();
  void send_query(uint64_t gen);
  void resolve_volley(const char* why);
  void enter_refrain(TimePoint until);

  void send_echo();
  void on_echo_reply(const Delivery& d);

  void on_backup_timer();
  void apply_sync(Duration theta, uint8_t server_stratum, TimePoint at, const std::string& how);

  Network& net_;
  ClientConfig config_;
  SimClock clock_;
  Address address_;

  ClientPhase phase_ = ClientPhase::idle;
  bool mobilized_ = false;
  std::optional<Address> association_source_;
  std::optional<Duration> ppd_;
  uint8_t stratum_ = 16;
  uint64_t reference_reading_ = 0;
  bool exited_ = false;
  std::string exit_reason_;

  // Broadcast-association volley state. The generation counter invalidates
  // scheduled sends/timeouts when a volley is canceled.
  uint64_t volley_gen_ = 0;
  bool volley_active_ = false;
  int outstanding_ = 0;
  std::vector<Sample> samples_;
  std::map<uint64_t, TimePoint> pending_;  // TEST2 nonces: query transmit -> send time
  TimePoint next_attempt_allowed_;
  int attempts_ = 0;
  int failed_attempts_ = 0;

  std::optional<TimePoint> refrain_until_;
  uint64_t refrain_gen_ = 0;

  // Out-of-band path-delay measurement state.
  bool oob_ready_ = false;
  bool echo_pending_ = false;
  uint64_t echo_gen_ = 0;
  TimePoint echo_sent_at_;
  std::vector<uint8_t> echo_payload_;
  TimePoint last_echo_send_;

  // Backup unicast association (independent of the broadcast one).
  std::optional<Address> backup_addr_;
  std::map<uint64_t, TimePoint> backup_pending_;
  std::optional<TimePoint> backup_refrain_until_;

  std::vector<TimePoint> sync_times_;
  std::vector<TimePoint> desync_times_;
};

// Observation-only client: periodically queries one host and records the
// reference timestamp and stratum it reports back.
struct ProbeConfig {
  std::string name;
  std::string target;  // host name, resolved at start()
  Duration interval = Duration::from_whole_seconds(60);
  TimePoint first_probe = TimePoint::from_seconds(60);
  int8_t own_poll = 6;
};

struct ProbeSample {
  TimePoint sent;
  TimePoint received;
  uint64_t reference = 0;
  uint8_t stratum = 0;
};

class ProbeClient : public Host {
 public:
  ProbeClient(Network& net, uint8_t segment, ProbeConfig config, SimClock clock);

  void start();
  void handle(const Delivery& d) override;

  const std::vector<ProbeSample>& samples() const { return samples_; }
  Address address() const { return address_; }

 private:
  void on_timer();
  uint64_t reading(TimePoint t) const;

  Network& net_;
  ProbeConfig config_;
  SimClock clock_;
  Address address_;
  Address target_addr_;
  std::map<uint64_t, TimePoint> pending_;
  std::vector<ProbeSample> samples_;
};

}  // namespace ntpsim
