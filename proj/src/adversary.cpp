#include "ntpsim/adversary.hpp"

#include <algorithm>
#include <cstdio>
#include <stdexcept>

namespace ntpsim {

const char* to_string(AttackerPosition p) {
  switch (p) {
    case AttackerPosition::off_path_unauth: return "off-path";
    case AttackerPosition::on_path_keyed: return "on-path-keyed";
    case AttackerPosition::off_path_with_slave: return "off-path-with-slave";
  }
  return "?";
}

Result<NtpPacket> craft_panic_mode5(const CraftParams& p) {
  if (p.needs_mac && !p.key)
    return Result<NtpPacket>::failure(
        "refusing to craft: receivers verify MACs and no shared key is held");
  NtpPacket pkt;
  pkt.leap = 0;
  pkt.mode = PacketMode::broadcast;
  pkt.stratum = p.mimic_stratum;
  pkt.poll = p.mimic_poll;
  pkt.precision = p.precision;
  pkt.reference_id = {10, p.server.segment, 0, p.server.host};
  uint64_t transmit = p.reading - static_cast<uint64_t>(p.displacement.ticks());
  // A plausible "recently updated" reference, one poll interval earlier.
  pkt.reference_ts = NtpTimestamp::from_u64(transmit - (uint64_t{64} << 32));
  pkt.transmit_ts = NtpTimestamp::from_u64(transmit);
  if (p.needs_mac) pkt.mac = compute_mac(pkt, *p.key);
  return Result<NtpPacket>::success(std::move(pkt));
}

Adversary::Adversary(Network& net, uint8_t segment, AdversaryConfig config, SimClock clock)
    : net_(net), config_(std::move(config)), clock_(clock) {
  address_ = net_.add_host(config_.name, segment, this);
}

uint64_t Adversary::reading(TimePoint t) const {
  auto r = clock_.now_u64(t);
  if (!r.ok()) throw std::runtime_error(config_.name + ": " + r.error);
  return *r;
}

void Adversary::start() {
  server_addr_ = net_.address_of(config_.server_name);
  victim_addr_ = net_.address_of(config_.victim_name);
  TimePoint first = std::min(config_.schedule.mode5_start, config_.schedule.mode3_start);
  net_.at(first, [this] {
    net_.log(config_.name, EventKind::attack_start,
             std::string("position=") + to_string(config_.position) + " impersonating " +
                 config_.server_name + " against " + config_.victim_name);
  });
  net_.at(config_.schedule.stop_time, [this] {
    net_.log(config_.name, EventKind::attack_stop, "forgery schedule exhausted");
  });
  net_.at(config_.schedule.mode5_start, [this] { on_mode5_timer(); });
  net_.at(config_.schedule.mode3_start, [this] { on_mode3_timer(true); });
}

void Adversary::on_mode5_timer() {
  if (net_.now() >= config_.schedule.stop_time) return;
  send_mode5();
  net_.after(config_.schedule.mode5_interval, [this] { on_mode5_timer(); });
}

void Adversary::on_mode3_timer(bool first) {
  if (net_.now() >= config_.schedule.stop_time) return;
  int n = first ? std::max(config_.schedule.mode3_burst, 1) : 1;
  for (int i = 0; i < n; ++i) send_mode3();
  net_.after(config_.schedule.mode3_interval, [this] { on_mode3_timer(false); });
}

void Adversary::send_mode5() {
  std::vector<uint8_t> bytes;
  if (config_.position == AttackerPosition::off_path_with_slave) {
    if (!captured_mode5_) {
      if (!warned_missing_mode5_) {
        net_.log(config_.name, EventKind::warning, "no captured broadcast yet; replay skipped");
        warned_missing_mode5_ = true;
      }
      return;
    }
    if (!warned_fresh_replay_) {
      Duration age = net_.now() - mode5_captured_at_;
      if (age <= Duration::from_whole_seconds(1000))
        net_.log(config_.name, EventKind::warning,
                 "replayed broadcast is only " + std::to_string(age.ticks() / kTicksPerSecond) +
                     " s old; victim may accept it as valid time");
      warned_fresh_replay_ = true;
    }
    bytes = *captured_mode5_;  // byte-exact replay, MAC included
  } else {
    CraftParams p;
    p.server = server_addr_;
    p.reading = reading(net_.now());
    p.displacement = config_.schedule.displacement;
    p.mimic_stratum = config_.mimic_stratum;
    p.mimic_poll = config_.mimic_poll;
    p.needs_mac = config_.network_authenticated;
    p.key = config_.key;
    auto pkt = craft_panic_mode5(p);
    if (!pkt.ok()) {
      // Best effort anyway: send unauthenticated forgeries and let the
      // receivers' MAC gate decide.
      if (!warned_unauth_forgery_) {
        net_.log(config_.name, EventKind::warning, pkt.error + "; sending without a MAC");
        warned_unauth_forgery_ = true;
      }
      p.needs_mac = false;
      pkt = craft_panic_mode5(p);
    }
    auto enc = encode(*pkt);
    if (!enc.ok()) throw std::runtime_error(config_.name + ": encode: " + enc.error);
    bytes = std::move(*enc);
  }
  net_.send(config_.name, server_addr_, victim_addr_, MsgKind::ntp, std::move(bytes));
}

void Adversary::send_mode3() {
  std::vector<uint8_t> bytes;
  if (config_.position == AttackerPosition::off_path_with_slave) {
    if (!captured_mode3_) {
      if (!warned_missing_mode3_) {
        net_.log(config_.name, EventKind::warning, "no captured query yet; replay skipped");
        warned_missing_mode3_ = true;
      }
      return;
    }
    bytes = *captured_mode3_;
  } else {
    NtpPacket q;
    q.leap = 0;
    q.mode = PacketMode::client;
    q.stratum = config_.mimic_stratum;
    q.poll = config_.mimic_poll;
    q.precision = -20;
    q.transmit_ts = NtpTimestamp::from_u64(reading(net_.now()));
    if (config_.key) q.mac = compute_mac(q, *config_.key);
    auto enc = encode(q);
    if (!enc.ok()) throw std::runtime_error(config_.name + ": encode: " + enc.error);
    bytes = std::move(*enc);
  }
  net_.send(config_.name, victim_addr_, server_addr_, MsgKind::ntp, std::move(bytes));
}

void Adversary::send_spoofed_kod(NtpTimestamp origin) {
  if (server_addr_ == Address{}) server_addr_ = net_.address_of(config_.server_name);
  if (victim_addr_ == Address{}) victim_addr_ = net_.address_of(config_.victim_name);
  NtpPacket kod = make_kod(config_.mimic_poll, origin);
  if (config_.key) kod.mac = compute_mac(kod, *config_.key);
  auto enc = encode(kod);
  if (!enc.ok()) throw std::runtime_error(config_.name + ": encode: " + enc.error);
  net_.send(config_.name, server_addr_, victim_addr_, MsgKind::ntp, std::move(*enc));
}

void Adversary::deliver_capture(uint8_t mode, std::vector<uint8_t> bytes, TimePoint captured_at) {
  if (mode == 5 && !captured_mode5_) {
    captured_mode5_ = std::move(bytes);
    mode5_captured_at_ = captured_at;
  } else if (mode == 3 && !captured_mode3_) {
    captured_mode3_ = std::move(bytes);
  }
}

SlaveSniffer::SlaveSniffer(Network& net, uint8_t segment, SlaveConfig config)
    : net_(net), config_(std::move(config)) {
  address_ = net_.add_host(config_.name, segment, this);
}

void SlaveSniffer::start() {
  server_addr_ = net_.address_of(config_.server_name);
  victim_addr_ = net_.address_of(config_.victim_name);
  net_.grant_sniff(config_.name, address_.segment);
  net_.at(net_.now() + config_.capture_window, [this] {
    if (!capture_complete())
      net_.log(config_.name, EventKind::warning,
               std::string("capture window closed incomplete (broadcast=") +
                   (have_mode5_ ? "yes" : "no") + " query=" + (have_mode3_ ? "yes" : "no") + ")");
  });
}

void SlaveSniffer::on_sniff(const PacketRecord& rec) {
  if (rec.kind != MsgKind::ntp) return;
  if (!have_mode5_ && rec.mode == 5 && rec.claimed_source == server_addr_) {
    have_mode5_ = true;
    forward(5, rec.bytes, rec.arrival, "broadcast");
  } else if (!have_mode3_ && rec.mode == 3 && rec.claimed_source == victim_addr_) {
    have_mode3_ = true;
    forward(3, rec.bytes, rec.arrival, "query");
  }
}

void SlaveSniffer::forward(uint8_t mode, std::vector<uint8_t> bytes, TimePoint captured_at,
                           const char* what) {
  net_.log(config_.name, EventKind::capture_complete,
           std::string(what) + " captured (" + std::to_string(bytes.size()) + " bytes)");
  net_.after(config_.forward_delay, [this, mode, bytes = std::move(bytes), captured_at, what] {
    if (consumer_) consumer_->deliver_capture(mode, bytes, captured_at);
    net_.log(config_.name, EventKind::capture_forwarded,
             std::string(what) + " relayed out of band");
  });
}

}  // namespace ntpsim
