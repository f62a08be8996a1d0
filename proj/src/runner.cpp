#include "ntpsim/runner.hpp"

#include <algorithm>
#include <memory>

#include "ntpsim/adversary.hpp"
#include "ntpsim/client.hpp"
#include "ntpsim/server.hpp"

namespace ntpsim {

namespace {

struct Assembly {
  std::unique_ptr<Network> net;
  std::vector<std::unique_ptr<NtpServer>> servers;
  std::vector<std::unique_ptr<NtpClient>> clients;
  std::vector<std::unique_ptr<ProbeClient>> probes;
  std::vector<std::unique_ptr<Adversary>> adversaries;
  std::vector<std::unique_ptr<SlaveSniffer>> slaves;
  std::map<std::string, NtpClient*> client_by_name;
  std::map<std::string, ProbeClient*> probe_by_name;
  std::map<std::string, Adversary*> adversary_by_name;
  std::map<std::string, SlaveSniffer*> slave_by_name;
  std::vector<std::function<void()>> start_order;
};

uint8_t segment_id(const ScenarioSpec& spec, const std::string& name) {
  for (size_t i = 0; i < spec.segments.size(); ++i)
    if (spec.segments[i] == name) return static_cast<uint8_t>(i + 1);
  throw std::runtime_error("undeclared segment: " + name);  // parse validation forbids this
}

Assembly assemble(const ScenarioSpec& spec, uint64_t seed) {
  Assembly a;
  DeliveryPolicy policy;
  policy.ingress_filtering = spec.policy.ingress_filtering;
  policy.loss_rate = spec.policy.loss_rate;
  a.net = std::make_unique<Network>(policy, seed,
                                    Duration::from_seconds(spec.policy.intra_delay_s),
                                    Duration::from_seconds(spec.policy.inter_delay_s));
  Network& net = *a.net;

  std::optional<SymmetricKey> shared_key;
  if (spec.auth.enabled) shared_key = SymmetricKey{spec.auth.key_id, spec.auth.secret};

  std::optional<uint8_t> multicast_group;  // set when the broadcast server uses one

  for (const auto& h : spec.hosts) {
    uint8_t seg = segment_id(spec, h.segment);
    switch (h.role) {
      case Role::broadcast_server:
      case Role::unicast_server: {
        const auto& s = std::get<ServerSpec>(h.detail);
        ServerConfig cfg;
        cfg.name = h.name;
        cfg.stratum = static_cast<uint8_t>(s.stratum);
        cfg.broadcast_enabled = s.broadcast_enabled;
        cfg.broadcast_start = TimePoint::from_seconds(s.broadcast_start_s);
        cfg.broadcast_interval = Duration::from_seconds(s.broadcast_interval_s);
        if (s.broadcast_enabled && s.multicast) {
          cfg.broadcast_destination = Address::multicast_group(static_cast<uint8_t>(s.multicast_group));
          multicast_group = static_cast<uint8_t>(s.multicast_group);
        }
        cfg.rate.min_headway = Duration::from_seconds(s.rate_headway_s);
        cfg.rate.burst_allowance = s.rate_burst;
        cfg.kod_poll_exponent = static_cast<int8_t>(s.kod_poll);
        cfg.poll_field = static_cast<int8_t>(s.poll);
        if (s.keyed) cfg.key = shared_key;
        auto srv = std::make_unique<NtpServer>(net, seg, cfg, SimClock(spec.epoch_base, Duration{}));
        a.start_order.push_back([p = srv.get()] { p->start(); });
        a.servers.push_back(std::move(srv));
        break;
      }
      case Role::victim_client: {
        const auto& c = std::get<ClientSpec>(h.detail);
        ClientConfig cfg;
        cfg.name = h.name;
        cfg.clock_offset = Duration::from_seconds(c.clock_offset_s);
        cfg.behavior.panic_behavior = c.panic_behavior;
        cfg.behavior.kod_nonce_check = c.kod_nonce_check;
        cfg.behavior.out_of_band_ppd = c.out_of_band_ppd;
        cfg.behavior.backup_server = c.backup_server;
        cfg.behavior.trusted_broadcast_sources = c.trusted_sources;
        cfg.volley_size = c.volley_size;
        cfg.volley_spacing = Duration::from_seconds(c.volley_spacing_s);
        cfg.volley_timeout = Duration::from_seconds(c.volley_timeout_s);
        cfg.mobilize_delay = Duration::from_seconds(c.mobilize_delay_s);
        cfg.recalibrate_delay = Duration::from_seconds(c.recalibrate_delay_s);
        cfg.min_retry_interval = Duration::from_seconds(c.min_retry_interval_s);
        cfg.own_poll = static_cast<int8_t>(c.poll);
        if (c.keyed) cfg.key = shared_key;
        cfg.backup_poll = Duration::from_seconds(c.backup_poll_s);
        cfg.backup_start = TimePoint::from_seconds(c.backup_start_s);
        cfg.oob_interval = Duration::from_seconds(c.oob_interval_s);
        auto cli = std::make_unique<NtpClient>(net, seg, cfg,
                                               SimClock(spec.epoch_base, cfg.clock_offset));
        a.client_by_name[h.name] = cli.get();
        a.start_order.push_back([p = cli.get()] { p->start(); });
        a.clients.push_back(std::move(cli));
        break;
      }
      case Role::probe_client: {
        const auto& p = std::get<ProbeSpec>(h.detail);
        ProbeConfig cfg;
        cfg.name = h.name;
        cfg.target = p.target;
        cfg.interval = Duration::from_seconds(p.probe_interval_s);
        cfg.first_probe = TimePoint::from_seconds(p.probe_start_s);
        auto probe = std::make_unique<ProbeClient>(net, seg, cfg,
                                                   SimClock(spec.epoch_base, Duration{}));
        a.probe_by_name[h.name] = probe.get();
        a.start_order.push_back([q = probe.get()] { q->start(); });
        a.probes.push_back(std::move(probe));
        break;
      }
      case Role::attacker: {
        const auto& at = std::get<AttackerSpec>(h.detail);
        AdversaryConfig cfg;
        cfg.name = h.name;
        cfg.position = at.position;
        cfg.server_name = at.server;
        cfg.victim_name = at.victim;
        cfg.slave_name = at.slave;
        if (at.position == AttackerPosition::on_path_keyed) cfg.key = shared_key;
        cfg.schedule.mode5_start = TimePoint::from_seconds(at.mode5_start_s);
        cfg.schedule.mode5_interval = Duration::from_seconds(at.mode5_interval_s);
        cfg.schedule.mode3_start = TimePoint::from_seconds(at.mode3_start_s);
        cfg.schedule.mode3_burst = at.mode3_burst;
        cfg.schedule.mode3_interval = Duration::from_seconds(at.mode3_interval_s);
        cfg.schedule.stop_time = TimePoint::from_seconds(at.stop_s);
        cfg.schedule.displacement = Duration::from_seconds(at.displacement_s);
        cfg.mimic_stratum = static_cast<uint8_t>(at.mimic_stratum);
        cfg.network_authenticated = spec.auth.enabled;
        auto adv = std::make_unique<Adversary>(net, seg, cfg,
                                               SimClock(spec.epoch_base, Duration{}));
        a.adversary_by_name[h.name] = adv.get();
        a.start_order.push_back([p = adv.get()] { p->start(); });
        a.adversaries.push_back(std::move(adv));
        break;
      }
      case Role::slave: {
        const auto& s = std::get<SlaveSpec>(h.detail);
        SlaveConfig cfg;
        cfg.name = h.name;
        cfg.server_name = s.server;
        cfg.victim_name = s.victim;
        cfg.forward_delay = Duration::from_seconds(s.forward_delay_s);
        cfg.capture_window = Duration::from_seconds(s.capture_window_s);
        auto slv = std::make_unique<SlaveSniffer>(net, seg, cfg);
        a.slave_by_name[h.name] = slv.get();
        a.start_order.push_back([p = slv.get()] { p->start(); });
        a.slaves.push_back(std::move(slv));
        break;
      }
    }
  }

  // Wiring that needs every host registered first.
  for (const auto& h : spec.hosts) {
    if (h.role == Role::attacker) {
      const auto& at = std::get<AttackerSpec>(h.detail);
      if (!at.slave.empty())
        a.slave_by_name.at(at.slave)->set_consumer(a.adversary_by_name.at(h.name));
    }
    if (h.role == Role::victim_client && multicast_group)
      net.subscribe_multicast(h.name, *multicast_group);
  }
  std::map<std::string, std::vector<Address>> acl;
  for (const auto& h : spec.hosts) {
    if (h.role != Role::victim_client) continue;
    const auto& c = std::get<ClientSpec>(h.detail);
    if (c.trusted_sources.empty()) continue;
    std::vector<Address> allowed;
    for (const auto& t : c.trusted_sources) allowed.push_back(net.address_of(t));
    acl[h.name] = std::move(allowed);
  }
  if (!acl.empty()) net.set_mode5_acl(std::move(acl));

  return a;
}

void tally_counts(const ScenarioSpec& spec, const std::vector<PacketRecord>& records,
                  std::map<std::string, HostCounts>& counts) {
  for (const auto& h : spec.hosts) counts[h.name].role = to_string(h.role);
  uint64_t last_tx = ~uint64_t{0};
  for (const auto& r : records) {
    if (r.transmission_id == last_tx) continue;  // records per transmission are contiguous
    last_tx = r.transmission_id;
    auto it = counts.find(r.sender);
    if (it == counts.end()) continue;
    HostCounts& c = it->second;
    if (r.kind != MsgKind::ntp) {
      ++c.echo;
    } else if (r.kod) {
      ++c.kod;
    } else if (r.mode == 3) {
      ++c.mode3;
    } else if (r.mode == 4) {
      ++c.mode4;
    } else if (r.mode == 5) {
      ++c.mode5;
    }
  }
}

}  // namespace

Result<RunResult> run_scenario(const ScenarioSpec& spec, uint64_t seed) {
  using R = Result<RunResult>;
  Assembly a;
  try {
    a = assemble(spec, seed);
    for (auto& s : a.start_order) s();
    a.net->run_until(TimePoint::from_seconds(spec.duration_s));
  } catch (const SimAbort& e) {
    return R::failure("simulation aborted at " + format_hms(e.event_time) + ": " + e.what());
  } catch (const std::exception& e) {
    return R::failure(std::string("setup failed: ") + e.what());
  }

  RunResult out;
  out.events = a.net->timeline().events();
  out.records = a.net->records();

  Verdict& v = out.verdict;
  tally_counts(spec, out.records, v.counts);

  // The judged victim: the attacker's target when present, else the first
  // victim_client in the file.
  const AttackerSpec* attacker = nullptr;
  for (const auto& h : spec.hosts)
    if (h.role == Role::attacker && !attacker) attacker = &std::get<AttackerSpec>(h.detail);
  std::string victim_name;
  if (attacker) {
    victim_name = attacker->victim;
  } else {
    for (const auto& h : spec.hosts)
      if (h.role == Role::victim_client) {
        victim_name = h.name;
        break;
      }
  }
  const NtpClient* victim =
      a.client_by_name.count(victim_name) ? a.client_by_name.at(victim_name) : nullptr;

  TimePoint end = TimePoint::from_seconds(spec.duration_s);
  if (victim) {
    v.calibration_attempts = victim->calibration_attempts();
    v.failed_attempts = victim->failed_attempts();
    const auto& syncs = victim->sync_times();
    const auto& desyncs = victim->desync_times();
    if (!syncs.empty()) v.initial_sync = syncs.front();
    for (TimePoint d : desyncs) {
      auto it = std::find_if(syncs.begin(), syncs.end(), [&](TimePoint s) { return s > d; });
      v.desync_windows.emplace_back(d, it == syncs.end() ? end : *it);
    }
    if (syncs.empty())
      v.desync_windows.emplace_back(TimePoint{}, end);  // never acquired at all
  }

  if (attacker) {
    TimePoint start = TimePoint::from_seconds(
        std::min(attacker->mode5_start_s, attacker->mode3_start_s));
    TimePoint stop = TimePoint::from_seconds(attacker->stop_s);
    v.attack_start = start;
    v.attack_stop = stop;

    bool synced_inside = false;
    if (victim)
      for (TimePoint s : victim->sync_times())
        if (s > start && s < stop) synced_inside = true;

    if (victim) {
      auto it = std::find_if(victim->sync_times().begin(), victim->sync_times().end(),
                             [&](TimePoint s) { return s >= stop; });
      if (it != victim->sync_times().end()) v.resync_delay_after_stop = *it - stop;
    }

    // In-window probe observations of the victim.
    const ProbeClient* probe = nullptr;
    for (const auto& h : spec.hosts) {
      if (h.role != Role::probe_client) continue;
      if (std::get<ProbeSpec>(h.detail).target == victim_name) {
        probe = a.probe_by_name.at(h.name);
        break;
      }
    }
    if (probe) {
      std::optional<uint64_t> ref;
      bool constant = true;
      for (const auto& s : probe->samples()) {
        if (s.received < start || s.received > stop) continue;
        ++v.probe_responses_in_window;
        if (!ref) ref = s.reference;
        else if (*ref != s.reference) constant = false;
      }
      v.probe_reference_constant = v.probe_responses_in_window > 0 && constant;
    }

    v.attack_succeeded =
        v.probe_responses_in_window >= 2 && v.probe_reference_constant && !synced_inside;
    v.kind = v.attack_succeeded ? "attack-succeeded" : "attack-failed";
  } else {
    v.kind = "no-attack-baseline";
  }

  return R::success(std::move(out));
}

}  // namespace ntpsim
