#include "ntpsim/server.hpp"

#include <stdexcept>

namespace ntpsim {

bool RateLimiter::check_ok(Address source, TimePoint arrival) {
  auto [it, inserted] = state_.try_emplace(source);
  SourceState& s = it->second;
  if (inserted || arrival - s.last_arrival >= policy_.min_headway) {
    s.recent_count = 1;
  } else {
    ++s.recent_count;
  }
  s.last_arrival = arrival;
  return s.recent_count <= policy_.burst_allowance;
}

NtpServer::NtpServer(Network& net, uint8_t segment, ServerConfig config, SimClock clock)
    : net_(net), config_(std::move(config)), clock_(clock), limiter_(config_.rate) {
  address_ = net_.add_host(config_.name, segment, this);
  if (config_.broadcast_destination == Address{}) {
    config_.broadcast_destination = Address::broadcast_addr(segment);
  }
}

uint64_t NtpServer::reading(TimePoint t) const {
  auto r = clock_.now_u64(t);
  if (!r.ok()) throw std::runtime_error(config_.name + ": " + r.error);
  return *r;
}

void NtpServer::start() {
  // The upstream association is modeled as already synchronized; the start
  // instant stands in for the last upstream clock update.
  reference_reading_ = reading(net_.now());
  if (config_.broadcast_enabled) {
    net_.at(config_.broadcast_start, [this] { on_broadcast_timer(); });
  }
}

void NtpServer::on_broadcast_timer() {
  NtpPacket pkt;
  pkt.leap = 0;
  pkt.mode = PacketMode::broadcast;
  pkt.stratum = config_.stratum;
  pkt.poll = config_.poll_field;
  pkt.precision = config_.precision;
  pkt.reference_id = {10, address_.segment, 0, address_.host};
  pkt.reference_ts = NtpTimestamp::from_u64(reference_reading_);
  pkt.transmit_ts = NtpTimestamp::from_u64(reading(net_.now()));
  if (config_.key) pkt.mac = compute_mac(pkt, *config_.key);

  auto bytes = encode(pkt);
  if (!bytes.ok()) throw std::runtime_error(config_.name + ": broadcast encode: " + bytes.error);
  net_.send(config_.name, address_, config_.broadcast_destination, MsgKind::ntp, std::move(*bytes));
  ++broadcasts_sent_;
  net_.after(config_.broadcast_interval, [this] { on_broadcast_timer(); });
}

void NtpServer::handle(const Delivery& d) {
  if (d.kind == MsgKind::echo_request) {
    // Round-trip probes answer immediately and bypass the NTP rate limiter.
    net_.send(config_.name, address_, d.claimed_source, MsgKind::echo_reply, d.bytes);
    return;
  }
  if (d.kind != MsgKind::ntp) return;

  auto pkt = decode(d.bytes);
  if (!pkt.ok()) {
    net_.log(config_.name, EventKind::host_dropped, "malformed: " + pkt.error);
    return;
  }
  if (pkt->mode == PacketMode::client) on_mode3(*pkt, d);
  // Anything else addressed to the server (stray mode 4/5) is ignored.
}

void NtpServer::on_mode3(const NtpPacket& query, const Delivery& d) {
  if (config_.key && verify_mac(query, *config_.key) != MacStatus::valid) {
    net_.log(config_.name, EventKind::host_dropped,
             "authentication failed src=" + d.claimed_source.str());
    return;
  }

  uint64_t now_reading = reading(d.at);
  NtpPacket reply;
  if (!limiter_.check_ok(d.claimed_source, d.at)) {
    reply = make_kod(config_.kod_poll_exponent, query.transmit_ts);
    ++kods_sent_;
  } else {
    reply.leap = 0;
    reply.mode = PacketMode::server;
    reply.stratum = config_.stratum;
    reply.poll = config_.poll_field;
    reply.precision = config_.precision;
    reply.reference_id = {10, address_.segment, 0, address_.host};
    reply.reference_ts = NtpTimestamp::from_u64(reference_reading_);
    reply.origin_ts = query.transmit_ts;  // TEST2 echo
    reply.receive_ts = NtpTimestamp::from_u64(now_reading);
    reply.transmit_ts = NtpTimestamp::from_u64(now_reading);
  }
  if (config_.key) reply.mac = compute_mac(reply, *config_.key);

  auto bytes = encode(reply);
  if (!bytes.ok()) throw std::runtime_error(config_.name + ": reply encode: " + bytes.error);
  net_.send(config_.name, address_, d.claimed_source, MsgKind::ntp, std::move(*bytes));
}

}  // namespace ntpsim
