#include "ntpsim/client.hpp"

#include <algorithm>
#include <cstdio>
#include <stdexcept>

namespace ntpsim {

namespace {

std::string fmt_offset(Duration d) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%+.6f", d.seconds());
  return buf;
}

// Refrain exponents are clamped so a hostile poll field cannot overflow the
// shift; 2^17 s is already beyond any scenario length.
constexpr int kMaxRefrainExponent = 17;

}  // namespace

const char* to_string(ClientPhase p) {
  switch (p) {
    case ClientPhase::idle: return "idle";
    case ClientPhase::calibrating: return "calibrating";
    case ClientPhase::synced: return "synced";
    case ClientPhase::refrain: return "refrain";
  }
  return "?";
}

NtpClient::NtpClient(Network& net, uint8_t segment, ClientConfig config, SimClock clock)
    : net_(net), config_(std::move(config)), clock_(clock) {
  address_ = net_.add_host(config_.name, segment, this);
}

uint64_t NtpClient::reading(TimePoint t) const {
  auto r = clock_.now_u64(t);
  if (!r.ok()) throw std::runtime_error(config_.name + ": " + r.error);
  return *r;
}

void NtpClient::start() {
  if (config_.behavior.backup_server) {
    backup_addr_ = net_.address_of(*config_.behavior.backup_server);
    net_.at(config_.backup_start, [this] { on_backup_timer(); });
  }
}

void NtpClient::handle(const Delivery& d) {
  if (exited_) return;
  if (d.kind == MsgKind::echo_reply) {
    on_echo_reply(d);
    return;
  }
  if (d.kind != MsgKind::ntp) return;

  auto pkt = decode(d.bytes);
  if (!pkt.ok()) {
    net_.log(config_.name, EventKind::host_dropped, "malformed: " + pkt.error);
    return;
  }
  switch (pkt->mode) {
    case PacketMode::client:
      serve_mode3(*pkt, d);
      return;
    case PacketMode::server:
      if (mac_gate(*pkt, d)) on_mode4(*pkt, d);
      return;
    case PacketMode::broadcast:
      if (mac_gate(*pkt, d)) on_mode5(*pkt, d);
      return;
    default:
      return;  // symmetric modes carry no role here
  }
}

bool NtpClient::mac_gate(const NtpPacket& pkt, const Delivery& d) {
  if (!config_.key) return true;
  if (verify_mac(pkt, *config_.key) == MacStatus::valid) return true;
  net_.log(config_.name, EventKind::host_dropped,
           "authentication failed src=" + d.claimed_source.str());
  return false;
}

Duration NtpClient::one_way_offset(const NtpPacket& pkt, const Delivery& d) const {
  uint64_t expected = pkt.transmit_ts.to_u64() + static_cast<uint64_t>(ppd_->ticks());
  return Duration::from_ticks(static_cast<int64_t>(expected - reading(d.at)));
}

void NtpClient::on_mode5(const NtpPacket& pkt, const Delivery& d) {
  switch (phase_) {
    case ClientPhase::idle: {
      if (mobilized_) return;
      mobilized_ = true;
      association_source_ = d.claimed_source;
      phase_ = ClientPhase::calibrating;
      if (config_.behavior.out_of_band_ppd) {
        net_.after(config_.mobilize_delay, [this] { send_echo(); });
      } else {
        schedule_volley(d.at + config_.mobilize_delay);
      }
      return;
    }
    case ClientPhase::calibrating: {
      // With an out-of-band path delay in hand, the broadcast itself
      // completes acquisition; otherwise a volley is already pending and
      // the packet is merely recorded.
      if (config_.behavior.out_of_band_ppd && oob_ready_ && ppd_) {
        if (pkt.stratum == 0 || pkt.stratum >= 16 || pkt.leap == 3) return;
        Duration theta = one_way_offset(pkt, d);
        if (classify_offset(theta, config_.thresholds) == OffsetClass::panic) {
          net_.log(config_.name, EventKind::warning,
                   "broadcast offset " + fmt_offset(theta) + " s beyond panic threshold; not applied");
          return;
        }
        apply_sync(theta, pkt.stratum, d.at, "broadcast");
      }
      return;
    }
    case ClientPhase::refrain:
      return;  // received event is already on the timeline; no state change
    case ClientPhase::synced: {
      if (pkt.stratum == 0 || pkt.stratum >= 16 || pkt.leap == 3) return;
      if (!ppd_) return;
      Duration theta = one_way_offset(pkt, d);
      if (classify_offset(theta, config_.thresholds) == OffsetClass::panic) {
        on_panic(theta, d);
        return;
      }
      apply_sync(theta, pkt.stratum, d.at, "broadcast");
      return;
    }
  }
}

void NtpClient::on_panic(Duration theta, const Delivery& d) {
  if (config_.behavior.out_of_band_ppd) {
    // Time acquisition never depends on the query path, so the clock is
    // left alone and the path delay is simply re-verified.
    net_.log(config_.name, EventKind::warning,
             "panic-grade broadcast ignored (offset " + fmt_offset(theta) +
                 " s); re-verifying path delay out of band");
    if (!echo_pending_ && d.at - last_echo_send_ >= config_.oob_interval) send_echo();
    return;
  }
  desync_times_.push_back(d.at);
  stratum_ = 16;
  net_.log(config_.name, EventKind::panic_desync,
           "offset " + fmt_offset(theta) + " s exceeds panic threshold src=" +
               d.claimed_source.str());
  if (config_.behavior.panic_behavior == PanicBehavior::quit) {
    exited_ = true;
    exit_reason_ = "panic offset " + fmt_offset(theta) + " s";
    net_.log(config_.name, EventKind::client_exit, exit_reason_);
    return;
  }
  phase_ = ClientPhase::calibrating;
  schedule_volley(d.at + config_.recalibrate_delay);
}

void NtpClient::schedule_volley(TimePoint earliest) {
  TimePoint t = std::max(earliest, next_attempt_allowed_);
  if (refrain_until_ && *refrain_until_ > t) t = *refrain_until_;
  uint64_t gen = volley_gen_;
  net_.at(t, [this, gen] {
    if (!exited_ && gen == volley_gen_ && phase_ == ClientPhase::calibrating && !volley_active_)
      start_volley();
  });
}

void NtpClient::start_volley() {
  volley_active_ = true;
  outstanding_ = config_.volley_size;
  samples_.clear();
  pending_.clear();
  ++attempts_;
  next_attempt_allowed_ = net_.now() + config_.min_retry_interval;
  net_.log(config_.name, EventKind::volley_start,
           "calibration attempt " + std::to_string(attempts_) + " toward " +
               association_source_->str());
  uint64_t gen = volley_gen_;
  for (int i = 0; i < config_.volley_size; ++i)
    net_.at(net_.now() + config_.volley_spacing * i, [this, gen] { send_query(gen); });
  net_.at(net_.now() + config_.volley_timeout, [this, gen] {
    if (!exited_ && gen == volley_gen_ && volley_active_) resolve_volley("timeout");
  });
}

void NtpClient::send_query(uint64_t gen) {
  if (exited_ || gen != volley_gen_ || !volley_active_) return;
  NtpPacket q;
  q.leap = stratum_ == 16 ? 3 : 0;
  q.mode = PacketMode::client;
  q.stratum = stratum_;
  q.poll = config_.own_poll;
  q.precision = config_.precision;
  q.reference_ts = NtpTimestamp::from_u64(reference_reading_);
  q.transmit_ts = NtpTimestamp::from_u64(reading(net_.now()));
  if (config_.key) q.mac = compute_mac(q, *config_.key);
  pending_[q.transmit_ts.to_u64()] = net_.now();
  send_packet(q, *association_source_);
}

void NtpClient::on_mode4(const NtpPacket& pkt, const Delivery& d) {
  if (pkt.stratum == 0) {
    if (is_kod(pkt))
      on_kod(pkt, d);
    else
      net_.log(config_.name, EventKind::host_dropped,
               "stratum-0 response without a recognized kiss code");
    return;
  }
  if (pkt.origin_ts.is_null()) {
    net_.log(config_.name, EventKind::host_dropped, "response with null origin timestamp");
    return;
  }
  uint64_t nonce = pkt.origin_ts.to_u64();

  if (auto it = pending_.find(nonce); it != pending_.end()) {
    pending_.erase(it);
    if (!volley_active_) return;
    TimestampQuad quad{nonce, pkt.receive_ts.to_u64(), pkt.transmit_ts.to_u64(), reading(d.at)};
    Duration theta = compute_offset(quad);
    Duration delta = compute_delay(quad);
    if (pkt.stratum >= 16 || pkt.leap == 3) {
      net_.log(config_.name, EventKind::warning, "calibration response from unsynchronized source");
    } else if (classify_offset(theta, config_.thresholds) == OffsetClass::panic) {
      net_.log(config_.name, EventKind::warning,
               "calibration sample " + fmt_offset(theta) + " s beyond panic threshold; discarded");
    } else {
      samples_.push_back(Sample{theta, delta, pkt.stratum});
    }
    if (--outstanding_ <= 0) resolve_volley("all responses in");
    return;
  }

  if (auto it = backup_pending_.find(nonce); it != backup_pending_.end()) {
    backup_pending_.erase(it);
    if (pkt.stratum >= 16 || pkt.leap == 3) {
      net_.log(config_.name, EventKind::warning, "backup response from unsynchronized source");
      return;
    }
    TimestampQuad quad{nonce, pkt.receive_ts.to_u64(), pkt.transmit_ts.to_u64(), reading(d.at)};
    Duration theta = compute_offset(quad);
    if (classify_offset(theta, config_.thresholds) == OffsetClass::panic) {
      net_.log(config_.name, EventKind::warning,
               "backup sample " + fmt_offset(theta) + " s beyond panic threshold; discarded");
      return;
    }
    apply_sync(theta, pkt.stratum, d.at, "backup server");
    return;
  }

  net_.log(config_.name, EventKind::host_dropped,
           "bogus origin timestamp (TEST2) src=" + d.claimed_source.str());
}

void NtpClient::on_kod(const NtpPacket& pkt, const Delivery& d) {
  uint64_t nonce = pkt.origin_ts.to_u64();
  bool broadcast_hit = pending_.count(nonce) > 0;
  bool backup_hit = backup_pending_.count(nonce) > 0;
  if (config_.behavior.kod_nonce_check && !broadcast_hit && !backup_hit) {
    net_.log(config_.name, EventKind::host_dropped,
             "kiss ignored: origin is not a pending nonce src=" + d.claimed_source.str());
    return;
  }
  int exponent = std::min<int>(std::max<int>(pkt.poll, config_.own_poll), kMaxRefrainExponent);
  Duration refrain_len = Duration::from_whole_seconds(int64_t{1} << exponent);

  if (backup_hit) {
    backup_pending_.erase(nonce);
    backup_refrain_until_ = d.at + refrain_len;
    net_.log(config_.name, EventKind::refrain_enter,
             "backup association paused until " + format_hms(*backup_refrain_until_));
    return;
  }

  // The kiss voids the whole in-flight attempt, collected samples included.
  bool had_volley = volley_active_;
  volley_active_ = false;
  ++volley_gen_;
  samples_.clear();
  pending_.clear();
  if (had_volley) {
    ++failed_attempts_;
    net_.log(config_.name, EventKind::attempt_failed,
             "calibration attempt " + std::to_string(attempts_) + " failed (kiss-o'-death)");
  }
  enter_refrain(d.at + refrain_len);
}

void NtpClient::enter_refrain(TimePoint until) {
  refrain_until_ = until;
  if (phase_ != ClientPhase::synced) phase_ = ClientPhase::refrain;
  net_.log(config_.name, EventKind::refrain_enter, "no queries until " + format_hms(until));
  uint64_t gen = ++refrain_gen_;
  net_.at(until, [this, gen] {
    if (exited_ || gen != refrain_gen_) return;
    refrain_until_.reset();
    net_.log(config_.name, EventKind::refrain_exit, "refrain expired");
    if (phase_ == ClientPhase::refrain) {
      if (association_source_) {
        phase_ = ClientPhase::calibrating;
        schedule_volley(net_.now());
      } else {
        phase_ = ClientPhase::idle;
      }
    }
  });
}

void NtpClient::resolve_volley(const char* why) {
  volley_active_ = false;
  ++volley_gen_;  // retires the scheduled timeout and any unsent queries
  pending_.clear();
  if (samples_.empty()) {
    ++failed_attempts_;
    net_.log(config_.name, EventKind::attempt_failed,
             "calibration attempt " + std::to_string(attempts_) + " failed (" + why +
                 ", no usable responses)");
    schedule_volley(net_.now());
    return;
  }
  auto best = std::min_element(
      samples_.begin(), samples_.end(),
      [](const Sample& a, const Sample& b) { return a.delta < b.delta; });
  ppd_ = best->delta.half();
  char detail[64];
  std::snprintf(detail, sizeof(detail), "calibration volley (ppd %.6f s)", ppd_->seconds());
  apply_sync(best->theta, best->server_stratum, net_.now(), detail);
}

void NtpClient::apply_sync(Duration theta, uint8_t server_stratum, TimePoint at,
                           const std::string& how) {
  OffsetClass cls = classify_offset(theta, config_.thresholds);
  clock_.adjust(theta);
  stratum_ = static_cast<uint8_t>(server_stratum + 1);
  reference_reading_ = reading(at);
  phase_ = ClientPhase::synced;
  sync_times_.push_back(at);
  // Retry pacing only separates consecutive failures; success resets it.
  next_attempt_allowed_ = TimePoint{};
  // A fresh sync retires any in-flight attempt and its nonces, so stale
  // replies and kisses arriving afterwards fail TEST2 instead of acting.
  volley_active_ = false;
  ++volley_gen_;
  samples_.clear();
  pending_.clear();
  net_.log(config_.name, EventKind::sync_success,
           "offset " + fmt_offset(theta) + " s (" + to_string(cls) + ") stratum " +
               std::to_string(stratum_) + " via " + how);
}

void NtpClient::serve_mode3(const NtpPacket& query, const Delivery& d) {
  NtpPacket reply;
  bool unsynced = stratum_ == 16;
  reply.leap = unsynced ? 3 : 0;
  reply.mode = PacketMode::server;
  reply.stratum = stratum_;
  reply.poll = config_.own_poll;
  reply.precision = config_.precision;
  if (!unsynced && association_source_)
    reply.reference_id = {10, association_source_->segment, 0, association_source_->host};
  reply.reference_ts = NtpTimestamp::from_u64(reference_reading_);
  reply.origin_ts = query.transmit_ts;  // TEST2 echo
  uint64_t r = reading(d.at);
  reply.receive_ts = NtpTimestamp::from_u64(r);
  reply.transmit_ts = NtpTimestamp::from_u64(r);
  send_packet(reply, d.claimed_source);
}

void NtpClient::send_echo() {
  if (exited_ || echo_pending_ || !association_source_) return;
  echo_pending_ = true;
  echo_sent_at_ = net_.now();
  last_echo_send_ = net_.now();
  uint64_t nonce = reading(net_.now());
  echo_payload_.resize(8);
  for (int i = 0; i < 8; ++i) echo_payload_[i] = static_cast<uint8_t>(nonce >> (56 - 8 * i));
  net_.send(config_.name, address_, *association_source_, MsgKind::echo_request, echo_payload_);
  uint64_t gen = ++echo_gen_;
  net_.at(net_.now() + config_.volley_timeout, [this, gen] {
    if (exited_ || gen != echo_gen_ || !echo_pending_) return;
    echo_pending_ = false;
    net_.log(config_.name, EventKind::warning, "echo measurement timed out; retrying later");
    net_.after(config_.oob_interval, [this] { send_echo(); });
  });
}

void NtpClient::on_echo_reply(const Delivery& d) {
  if (!echo_pending_ || d.bytes != echo_payload_) return;
  echo_pending_ = false;
  Duration rtt = d.at - echo_sent_at_;
  ppd_ = rtt.half();
  oob_ready_ = true;
  char buf[72];
  std::snprintf(buf, sizeof(buf), "path delay %.6f s (rtt %.6f s)", ppd_->seconds(),
                rtt.seconds());
  net_.log(config_.name, EventKind::oob_ppd_measured, buf);
  net_.after(config_.oob_interval, [this] { send_echo(); });
}

void NtpClient::on_backup_timer() {
  if (exited_) return;
  net_.after(config_.backup_poll, [this] { on_backup_timer(); });
  if (backup_refrain_until_ && net_.now() < *backup_refrain_until_) return;
  std::erase_if(backup_pending_, [&](const auto& kv) {
    return net_.now() - kv.second > config_.backup_poll * 2;
  });
  NtpPacket q;
  q.leap = stratum_ == 16 ? 3 : 0;
  q.mode = PacketMode::client;
  q.stratum = stratum_;
  q.poll = config_.own_poll;
  q.precision = config_.precision;
  q.reference_ts = NtpTimestamp::from_u64(reference_reading_);
  q.transmit_ts = NtpTimestamp::from_u64(reading(net_.now()));
  if (config_.key) q.mac = compute_mac(q, *config_.key);
  backup_pending_[q.transmit_ts.to_u64()] = net_.now();
  send_packet(q, *backup_addr_);
}

void NtpClient::send_packet(const NtpPacket& pkt, Address dest) {
  auto bytes = encode(pkt);
  if (!bytes.ok()) throw std::runtime_error(config_.name + ": encode: " + bytes.error);
  net_.send(config_.name, address_, dest, MsgKind::ntp, std::move(*bytes));
}

ProbeClient::ProbeClient(Network& net, uint8_t segment, ProbeConfig config, SimClock clock)
    : net_(net), config_(std::move(config)), clock_(clock) {
  address_ = net_.add_host(config_.name, segment, this);
}

uint64_t ProbeClient::reading(TimePoint t) const {
  auto r = clock_.now_u64(t);
  if (!r.ok()) throw std::runtime_error(config_.name + ": " + r.error);
  return *r;
}

void ProbeClient::start() {
  target_addr_ = net_.address_of(config_.target);
  net_.at(config_.first_probe, [this] { on_timer(); });
}

void ProbeClient::on_timer() {
  NtpPacket q;
  q.leap = 3;
  q.mode = PacketMode::client;
  q.stratum = 16;
  q.poll = config_.own_poll;
  q.precision = -20;
  q.transmit_ts = NtpTimestamp::from_u64(reading(net_.now()));
  pending_[q.transmit_ts.to_u64()] = net_.now();
  auto bytes = encode(q);
  if (!bytes.ok()) throw std::runtime_error(config_.name + ": encode: " + bytes.error);
  net_.send(config_.name, address_, target_addr_, MsgKind::ntp, std::move(*bytes));
  net_.after(config_.interval, [this] { on_timer(); });
}

void ProbeClient::handle(const Delivery& d) {
  if (d.kind != MsgKind::ntp) return;
  auto pkt = decode(d.bytes);
  if (!pkt.ok() || pkt->mode != PacketMode::server) return;
  if (is_kod(*pkt)) {
    net_.log(config_.name, EventKind::host_dropped, "unexpected kiss ignored");
    return;
  }
  auto it = pending_.find(pkt->origin_ts.to_u64());
  if (pkt->origin_ts.is_null() || it == pending_.end()) {
    net_.log(config_.name, EventKind::host_dropped,
             "bogus origin timestamp (TEST2) src=" + d.claimed_source.str());
    return;
  }
  ProbeSample s;
  s.sent = it->second;
  s.received = d.at;
  s.reference = pkt->reference_ts.to_u64();
  s.stratum = pkt->stratum;
  pending_.erase(it);
  samples_.push_back(s);
  char buf[96];
  std::snprintf(buf, sizeof(buf), "target=%s reference=%08x.%08x stratum=%u",
                config_.target.c_str(), pkt->reference_ts.seconds, pkt->reference_ts.fraction,
                pkt->stratum);
  net_.log(config_.name, EventKind::probe_result, buf);
}

}  // namespace ntpsim
