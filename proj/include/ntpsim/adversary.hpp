#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ntpsim/clock.hpp"
#include "ntpsim/simnet.hpp"
#include "ntpsim/wire.hpp"

namespace ntpsim {

// Where the adversary sits relative to the key material and the target LAN:
//  - off_path_unauth:   remote host, no key; spoofs source addresses only.
//  - on_path_keyed:     holds the shared key and forges valid MACs.
//  - off_path_with_slave: remote host fed byte-exact captures by a sniffer
//    on the target segment; can only replay, never mint fresh timestamps.
enum class AttackerPosition { off_path_unauth, on_path_keyed, off_path_with_slave };

const char* to_string(AttackerPosition p);

struct AttackSchedule {
  TimePoint mode5_start;
  Duration mode5_interval = Duration::from_whole_seconds(1);
  TimePoint mode3_start;
  int mode3_burst = 2;  // queries fired at the first mode 3 instant
  Duration mode3_interval = Duration::from_whole_seconds(10);
  TimePoint stop_time;
  Duration displacement = Duration::from_whole_seconds(2000);  // forged time sits this far in the past
};

struct AdversaryConfig {
  std::string name;
  AttackerPosition position = AttackerPosition::off_path_unauth;
  std::string server_name;  // identity the forgeries claim
  std::string victim_name;
  std::string slave_name;  // off_path_with_slave only
  std::optional<SymmetricKey> key;
  AttackSchedule schedule;
  uint8_t mimic_stratum = 2;
  int8_t mimic_poll = 6;
  bool network_authenticated = false;  // receivers on this network verify MACs
};

struct CraftParams {
  Address server;       // address the broadcast claims to come from
  uint64_t reading = 0; // forger's clock at transmit time
  Duration displacement;
  uint8_t mimic_stratum = 2;
  int8_t mimic_poll = 6;
  int8_t precision = -20;
  bool needs_mac = false;  // target network authenticates broadcasts
  std::optional<SymmetricKey> key;
};

// Builds a broadcast whose transmit timestamp sits `displacement` in the
// past. Refuses when a valid MAC is required but no key is held — forging
// the digest is not an available operation.
Result<NtpPacket> craft_panic_mode5(const CraftParams& p);

// Drives the forgery schedule: mode 5 floods toward the victim claiming the
// server's address, plus spoofed mode 3 queries claiming the victim's
// address so the server's rate limiter turns against the victim.
class Adversary : public Host {
 public:
  Adversary(Network& net, uint8_t segment, AdversaryConfig config, SimClock clock);

  void start();
  void handle(const Delivery&) override {}  // inbound traffic is irrelevant

  // Out-of-band hand-off from a sniffer slave. First capture of each kind
  // wins; later ones are ignored.
  void deliver_capture(uint8_t mode, std::vector<uint8_t> bytes, TimePoint captured_at);

  // Single forged kiss-o'-death claiming the server; origin is the caller's
  // choice (e.g. a sniffed victim nonce).
  void send_spoofed_kod(NtpTimestamp origin);

  Address address() const { return address_; }
  bool has_captured_mode5() const { return captured_mode5_.has_value(); }
  bool has_captured_mode3() const { return captured_mode3_.has_value(); }

 private:
  void on_mode5_timer();
  void on_mode3_timer(bool first);
  void send_mode5();
  void send_mode3();
  uint64_t reading(TimePoint t) const;

  Network& net_;
  AdversaryConfig config_;
  SimClock clock_;
  Address address_;
  Address server_addr_;
  Address victim_addr_;

  std::optional<std::vector<uint8_t>> captured_mode5_;
  std::optional<std::vector<uint8_t>> captured_mode3_;
  TimePoint mode5_captured_at_;

  bool warned_unauth_forgery_ = false;
  bool warned_missing_mode5_ = false;
  bool warned_missing_mode3_ = false;
  bool warned_fresh_replay_ = false;
};

// Passive capture box on the target segment: grabs the first broadcast
// claiming the server and the first query claiming the victim, then relays
// the raw bytes to its consumer out of band.
struct SlaveConfig {
  std::string name;
  std::string server_name;
  std::string victim_name;
  Duration forward_delay = Duration::from_whole_seconds(1);
  Duration capture_window = Duration::from_whole_seconds(120);  // deadline for a full capture
};

class SlaveSniffer : public Host {
 public:
  SlaveSniffer(Network& net, uint8_t segment, SlaveConfig config);

  void set_consumer(Adversary* consumer) { consumer_ = consumer; }
  void start();  // asks the network for sniffing on its own segment
  void handle(const Delivery&) override {}
  void on_sniff(const PacketRecord& rec) override;

  bool capture_complete() const { return have_mode5_ && have_mode3_; }
  Address address() const { return address_; }

 private:
  void forward(uint8_t mode, std::vector<uint8_t> bytes, TimePoint captured_at, const char* what);

  Network& net_;
  SlaveConfig config_;
  Address address_;
  Adversary* consumer_ = nullptr;
  Address server_addr_;
  Address victim_addr_;
  bool have_mode5_ = false;
  bool have_mode3_ = false;
};

}  // namespace ntpsim
