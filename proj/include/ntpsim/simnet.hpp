#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <queue>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "ntpsim/time_units.hpp"
#include "ntpsim/timeline.hpp"
#include "ntpsim/wire.hpp"

namespace ntpsim {

enum class AddrKind : uint8_t { host, broadcast, multicast };

// Flat two-level addressing: a host lives on one segment. Broadcast is a
// per-segment pseudo-address; multicast groups are segment-independent.
struct Address {
  AddrKind kind = AddrKind::host;
  uint8_t segment = 0;  // host/broadcast only
  uint8_t host = 0;     // host number, or group number for multicast

  auto operator<=>(const Address&) const = default;

  static Address host_addr(uint8_t segment, uint8_t host) {
    return Address{AddrKind::host, segment, host};
  }
  static Address broadcast_addr(uint8_t segment) {
    return Address{AddrKind::broadcast, segment, 0};
  }
  static Address multicast_group(uint8_t group) {
    return Address{AddrKind::multicast, 0, group};
  }

  // Dotted rendering for logs: hosts 10.<seg>.0.<n>, segment broadcast
  // 10.<seg>.255.255, multicast groups 224.0.1.<n>.
  std::string str() const;
};

enum class MsgKind : uint8_t { ntp, echo_request, echo_reply };

enum class Disposition : uint8_t { delivered, dropped_filter, dropped_acl, dropped_loss };

const char* to_string(Disposition d);

// One frame offered to one recipient.
struct Delivery {
  TimePoint at;
  Address claimed_source;
  Address destination;  // as addressed: unicast, broadcast, or group
  MsgKind kind = MsgKind::ntp;
  std::vector<uint8_t> bytes;
};

// Audit record of one (transmission, recipient) pair.
struct PacketRecord {
  uint64_t transmission_id = 0;
  TimePoint sent;
  TimePoint arrival;
  std::string sender;  // actual sender host name
  Address actual_source;
  Address claimed_source;
  Address destination;
  std::string recipient;
  MsgKind kind = MsgKind::ntp;
  uint8_t mode = 0;  // NTP mode, 0 for echo frames
  bool kod = false;
  Disposition disposition = Disposition::delivered;
  std::vector<uint8_t> bytes;
};

struct DeliveryPolicy {
  // Drop frames crossing a segment border whose claimed source does not
  // belong to the segment they actually came from.
  bool ingress_filtering = false;
  // Per-recipient allow-list of actual senders for mode 5 frames; models a
  // path-aware filter in front of the client.
  std::map<std::string, std::vector<Address>> mode5_acl;
  double loss_rate = 0.0;
};

// Raised out of run_until when an event callback throws.
struct SimAbort : std::runtime_error {
  SimAbort(uint64_t seq, TimePoint at, const std::string& what)
      : std::runtime_error(what), event_seq(seq), event_time(at) {}
  uint64_t event_seq;
  TimePoint event_time;
};

// Min-ordered event queue; ties dispatch in insertion order.
class EventQueue {
 public:
  void push(TimePoint t, std::function<void()> fn) {
    heap_.push(Entry{t, next_seq_++, std::move(fn)});
  }
  bool empty() const { return heap_.empty(); }
  TimePoint next_time() const { return heap_.top().t; }
  uint64_t next_seq() const { return heap_.top().seq; }
  uint64_t pop_and_run();  // dispatches the earliest entry

 private:
  struct Entry {
    TimePoint t;
    uint64_t seq;
    std::function<void()> fn;
    bool operator>(const Entry& o) const {
      if (t != o.t) return t > o.t;
      return seq > o.seq;
    }
  };
  std::priority_queue<Entry, std::vector<Entry>, std::greater<Entry>> heap_;
  uint64_t next_seq_ = 0;
};

class Network;

// Anything attached to the network. handle() sees frames addressed (or
// broadcast/multicast) to the host; on_sniff() sees everything reaching the
// host's segment, but only if the network granted sniffing.
class Host {
 public:
  virtual ~Host() = default;
  virtual void handle(const Delivery& d) = 0;
  virtual void on_sniff(const PacketRecord&) {}
};

class Network {
 public:
  Network(DeliveryPolicy policy, uint64_t seed, Duration intra_delay, Duration inter_delay)
      : policy_(std::move(policy)), rng_(seed), intra_delay_(intra_delay), inter_delay_(inter_delay) {}

  // Hosts are numbered per segment in registration order, starting at 1.
  Address add_host(const std::string& name, uint8_t segment, Host* host);
  void grant_sniff(const std::string& name, uint8_t segment);
  bool sniff_granted(const std::string& name, uint8_t segment) const;
  void subscribe_multicast(const std::string& name, uint8_t group);
  void unsubscribe_multicast(const std::string& name, uint8_t group);

  // Replaces the mode 5 allow-list once host addresses are known.
  void set_mode5_acl(std::map<std::string, std::vector<Address>> acl) {
    policy_.mode5_acl = std::move(acl);
  }

  TimePoint now() const { return now_; }
  void at(TimePoint t, std::function<void()> fn);
  void after(Duration d, std::function<void()> fn) { at(now_ + d, std::move(fn)); }

  // Enqueues deliveries for every recipient the destination implies. The
  // claimed source is written into the frame as-is; nothing stops spoofing.
  Result<uint64_t> send(const std::string& sender_name, Address claimed_source, Address destination,
                        MsgKind kind, std::vector<uint8_t> bytes);

  // Dispatches until the queue drains or the next event lies beyond
  // end_time; the clock always lands exactly on end_time.
  TimePoint run_until(TimePoint end_time);

  const std::vector<PacketRecord>& records() const { return records_; }
  Timeline& timeline() { return timeline_; }
  const Timeline& timeline() const { return timeline_; }
  void log(const std::string& actor, EventKind kind, std::string detail) {
    timeline_.add(now_, actor, kind, std::move(detail));
  }

  Address address_of(const std::string& name) const;
  const std::string* owner_of(Address a) const;

 private:
  struct HostEntry {
    std::string name;
    uint8_t segment = 0;
    uint8_t number = 0;
    Host* host = nullptr;
  };

  void enqueue_delivery(const HostEntry& sender, const HostEntry& rcpt, Address claimed,
                        Address destination, MsgKind kind, const std::vector<uint8_t>& bytes,
                        uint64_t tx_id);
  const HostEntry* find(const std::string& name) const;

  DeliveryPolicy policy_;
  std::mt19937_64 rng_;
  Duration intra_delay_;
  Duration inter_delay_;
  TimePoint now_;
  EventQueue queue_;
  std::vector<HostEntry> hosts_;
  std::map<uint8_t, std::vector<size_t>> segments_;          // segment -> host indices
  std::map<uint8_t, std::vector<size_t>> multicast_groups_;  // group -> host indices
  std::map<uint8_t, std::vector<size_t>> sniffers_;          // segment -> host indices
  std::vector<PacketRecord> records_;
  Timeline timeline_;
  uint64_t next_tx_id_ = 0;
};

// Event kind for a packet in a given direction; KoD packets get their own.
EventKind sent_kind(MsgKind kind, uint8_t mode, bool kod);
EventKind received_kind(MsgKind kind, uint8_t mode, bool kod);

}  // namespace ntpsim
