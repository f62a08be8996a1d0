#include "ntpsim/simnet.hpp"

#include <algorithm>
#include <cstdio>

namespace ntpsim {

std::string Address::str() const {
  char buf[24];
  switch (kind) {
    case AddrKind::host:
      std::snprintf(buf, sizeof(buf), "10.%u.0.%u", segment, host);
      break;
    case AddrKind::broadcast:
      std::snprintf(buf, sizeof(buf), "10.%u.255.255", segment);
      break;
    case AddrKind::multicast:
      std::snprintf(buf, sizeof(buf), "224.0.1.%u", host);
      break;
  }
  return buf;
}

const char* to_string(Disposition d) {
  switch (d) {
    case Disposition::delivered: return "delivered";
    case Disposition::dropped_filter: return "dropped_filter";
    case Disposition::dropped_acl: return "dropped_acl";
    case Disposition::dropped_loss: return "dropped_loss";
  }
  return "?";
}

const char* to_string(EventKind k) {
  switch (k) {
    case EventKind::mode3_sent: return "mode3_sent";
    case EventKind::mode3_received: return "mode3_received";
    case EventKind::mode4_sent: return "mode4_sent";
    case EventKind::mode4_received: return "mode4_received";
    case EventKind::mode5_sent: return "mode5_sent";
    case EventKind::mode5_received: return "mode5_received";
    case EventKind::kod_sent: return "kod_sent";
    case EventKind::kod_received: return "kod_received";
    case EventKind::echo_sent: return "echo_sent";
    case EventKind::echo_received: return "echo_received";
    case EventKind::echo_reply_sent: return "echo_reply_sent";
    case EventKind::echo_reply_received: return "echo_reply_received";
    case EventKind::packet_dropped: return "packet_dropped";
    case EventKind::host_dropped: return "host_dropped";
    case EventKind::volley_start: return "volley_start";
    case EventKind::attempt_failed: return "attempt_failed";
    case EventKind::sync_success: return "sync_success";
    case EventKind::panic_desync: return "panic_desync";
    case EventKind::client_exit: return "client_exit";
    case EventKind::refrain_enter: return "refrain_enter";
    case EventKind::refrain_exit: return "refrain_exit";
    case EventKind::probe_result: return "probe_result";
    case EventKind::attack_start: return "attack_start";
    case EventKind::attack_stop: return "attack_stop";
    case EventKind::capture_complete: return "capture_complete";
    case EventKind::capture_forwarded: return "capture_forwarded";
    case EventKind::oob_ppd_measured: return "oob_ppd_measured";
    case EventKind::warning: return "warning";
  }
  return "?";
}

EventKind sent_kind(MsgKind kind, uint8_t mode, bool kod) {
  if (kind == MsgKind::echo_request) return EventKind::echo_sent;
  if (kind == MsgKind::echo_reply) return EventKind::echo_reply_sent;
  if (kod) return EventKind::kod_sent;
  switch (mode) {
    case 3: return EventKind::mode3_sent;
    case 5: return EventKind::mode5_sent;
    default: return EventKind::mode4_sent;
  }
}

EventKind received_kind(MsgKind kind, uint8_t mode, bool kod) {
  if (kind == MsgKind::echo_request) return EventKind::echo_received;
  if (kind == MsgKind::echo_reply) return EventKind::echo_reply_received;
  if (kod) return EventKind::kod_received;
  switch (mode) {
    case 3: return EventKind::mode3_received;
    case 5: return EventKind::mode5_received;
    default: return EventKind::mode4_received;
  }
}

uint64_t EventQueue::pop_and_run() {
  Entry e = heap_.top();
  heap_.pop();
  e.fn();
  return e.seq;
}

Address Network::add_host(const std::string& name, uint8_t segment, Host* host) {
  if (find(name)) throw std::invalid_argument("duplicate host name: " + name);
  HostEntry entry;
  entry.name = name;
  entry.segment = segment;
  entry.number = static_cast<uint8_t>(segments_[segment].size() + 1);
  entry.host = host;
  hosts_.push_back(entry);
  segments_[segment].push_back(hosts_.size() - 1);
  return Address::host_addr(segment, entry.number);
}

void Network::grant_sniff(const std::string& name, uint8_t segment) {
  const HostEntry* e = find(name);
  if (!e) throw std::invalid_argument("unknown host: " + name);
  if (e->segment != segment)
    throw std::invalid_argument("sniff refused: " + name + " is not on segment " +
                                std::to_string(segment));
  sniffers_[segment].push_back(static_cast<size_t>(e - hosts_.data()));
}

bool Network::sniff_granted(const std::string& name, uint8_t segment) const {
  auto it = sniffers_.find(segment);
  if (it == sniffers_.end()) return false;
  for (size_t idx : it->second)
    if (hosts_[idx].name == name) return true;
  return false;
}

void Network::subscribe_multicast(const std::string& name, uint8_t group) {
  const HostEntry* e = find(name);
  if (!e) throw std::invalid_argument("unknown host: " + name);
  auto& members = multicast_groups_[group];
  size_t idx = static_cast<size_t>(e - hosts_.data());
  if (std::find(members.begin(), members.end(), idx) == members.end()) members.push_back(idx);
}

void Network::unsubscribe_multicast(const std::string& name, uint8_t group) {
  const HostEntry* e = find(name);
  if (!e) return;
  auto& members = multicast_groups_[group];
  size_t idx = static_cast<size_t>(e - hosts_.data());
  members.erase(std::remove(members.begin(), members.end(), idx), members.end());
}

void Network::at(TimePoint t, std::function<void()> fn) {
  queue_.push(t < now_ ? now_ : t, std::move(fn));
}

Address Network::address_of(const std::string& name) const {
  const HostEntry* e = find(name);
  if (!e) throw std::invalid_argument("unknown host: " + name);
  return Address::host_addr(e->segment, e->number);
}

const std::string* Network::owner_of(Address a) const {
  if (a.kind != AddrKind::host) return nullptr;
  for (const auto& e : hosts_)
    if (e.segment == a.segment && e.number == a.host) return &e.name;
  return nullptr;
}

const Network::HostEntry* Network::find(const std::string& name) const {
  for (const auto& e : hosts_)
    if (e.name == name) return &e;
  return nullptr;
}

Result<uint64_t> Network::send(const std::string& sender_name, Address claimed_source,
                               Address destination, MsgKind kind, std::vector<uint8_t> bytes) {
  const HostEntry* sender = find(sender_name);
  if (!sender) return Result<uint64_t>::failure("unknown sender: " + sender_name);

  // Resolve the recipient set in deterministic (registration) order.
  std::vector<size_t> recipients;
  switch (destination.kind) {
    case AddrKind::host: {
      const std::string* owner = owner_of(destination);
      if (!owner) return Result<uint64_t>::failure("unknown destination " + destination.str());
      recipients.push_back(static_cast<size_t>(find(*owner) - hosts_.data()));
      break;
    }
    case AddrKind::broadcast: {
      auto it = segments_.find(destination.segment);
      if (it == segments_.end())
        return Result<uint64_t>::failure("unknown segment in destination " + destination.str());
      for (size_t idx : it->second)
        if (&hosts_[idx] != sender) recipients.push_back(idx);
      break;
    }
    case AddrKind::multicast: {
      auto it = multicast_groups_.find(destination.host);
      if (it != multicast_groups_.end())
        for (size_t idx : it->second)
          if (&hosts_[idx] != sender) recipients.push_back(idx);
      break;
    }
  }

  uint8_t mode = 0;
  bool kod = false;
  if (kind == MsgKind::ntp && bytes.size() >= kHeaderBytes) {
    mode = bytes[0] & 0x7;
    kod = mode == 4 && bytes[1] == 0 && bytes[12] == 'R' && bytes[13] == 'A' &&
          bytes[14] == 'T' && bytes[15] == 'E';
  }

  uint64_t tx_id = next_tx_id_++;
  Address actual = Address::host_addr(sender->segment, sender->number);
  std::string detail = "src=" + claimed_source.str() + " dst=" + destination.str();
  if (claimed_source != actual) detail += " spoofed-by=" + actual.str();
  log(sender_name, sent_kind(kind, mode, kod), detail);

  for (size_t idx : recipients) {
    const HostEntry& rcpt = hosts_[idx];
    PacketRecord rec;
    rec.transmission_id = tx_id;
    rec.sent = now_;
    rec.sender = sender_name;
    rec.actual_source = actual;
    rec.claimed_source = claimed_source;
    rec.destination = destination;
    rec.recipient = rcpt.name;
    rec.kind = kind;
    rec.mode = mode;
    rec.kod = kod;
    rec.bytes = bytes;
    bool same_segment = rcpt.segment == sender->segment;
    rec.arrival = now_ + (same_segment ? intra_delay_ : inter_delay_);

    rec.disposition = Disposition::delivered;
    if (policy_.ingress_filtering && !same_segment && claimed_source.kind == AddrKind::host &&
        claimed_source.segment != sender->segment) {
      rec.disposition = Disposition::dropped_filter;
    } else if (kind == MsgKind::ntp && mode == 5) {
      auto acl = policy_.mode5_acl.find(rcpt.name);
      if (acl != policy_.mode5_acl.end() &&
          std::find(acl->second.begin(), acl->second.end(), actual) == acl->second.end()) {
        rec.disposition = Disposition::dropped_acl;
      }
    }
    if (rec.disposition == Disposition::delivered && policy_.loss_rate > 0.0) {
      std::uniform_real_distribution<double> u(0.0, 1.0);
      if (u(rng_) < policy_.loss_rate) rec.disposition = Disposition::dropped_loss;
    }

    records_.push_back(rec);
    size_t rec_idx = records_.size() - 1;

    at(rec.arrival, [this, rec_idx] {
      // Copy: handlers may send and grow the record vector under us.
      const PacketRecord r = records_[rec_idx];
      // Sniffers on the destination segment observe anything that reached
      // the segment; ingress-filtered and lost frames never did.
      if (r.disposition != Disposition::dropped_filter &&
          r.disposition != Disposition::dropped_loss) {
        const HostEntry* rcpt_entry = find(r.recipient);
        auto sn = sniffers_.find(rcpt_entry->segment);
        if (sn != sniffers_.end())
          for (size_t sniffer_idx : sn->second) hosts_[sniffer_idx].host->on_sniff(r);
      }
      if (r.disposition != Disposition::delivered) {
        log(r.recipient, EventKind::packet_dropped,
            std::string(to_string(r.disposition)) + " src=" + r.claimed_source.str() +
                " dst=" + r.destination.str());
        return;
      }
      log(r.recipient, received_kind(r.kind, r.mode, r.kod),
          "src=" + r.claimed_source.str() + " dst=" + r.destination.str());
      Delivery d{r.arrival, r.claimed_source, r.destination, r.kind, r.bytes};
      find(r.recipient)->host->handle(d);
    });
  }
  return Result<uint64_t>::success(tx_id);
}

TimePoint Network::run_until(TimePoint end_time) {
  while (!queue_.empty() && queue_.next_time() <= end_time) {
    TimePoint t = queue_.next_time();
    uint64_t seq = queue_.next_seq();
    now_ = t;
    try {
      queue_.pop_and_run();
    } catch (const SimAbort&) {
      throw;
    } catch (const std::exception& e) {
      throw SimAbort(seq, t,
                     "event #" + std::to_string(seq) + " at t=" + format_hms(t) + " failed: " + e.what());
    }
  }
  now_ = end_time;
  return now_;
}

}  // namespace ntpsim
