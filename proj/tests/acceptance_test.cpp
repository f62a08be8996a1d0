// Acceptance gate: runs every shipped scenario and re-derives the protocol
// properties the simulator must hold, printing one [PASS]/[FAIL] line per
// criterion. Exits nonzero if any criterion fails.
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "ntpsim/client.hpp"
#include "ntpsim/clock.hpp"
#include "ntpsim/report.hpp"
#include "ntpsim/runner.hpp"
#include "ntpsim/scenario.hpp"
#include "ntpsim/simnet.hpp"
#include "ntpsim/wire.hpp"

using namespace ntpsim;

namespace {

constexpr uint32_t kEpochBase = 3800000000u;

int g_criteria_failed = 0;

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof(buf), f, ap);
  va_end(ap);
  return buf;
}

// One acceptance criterion: collects named sub-check failures, then prints
// a single pass/fail line plus the measurements behind it.
struct Criterion {
  int index;
  std::string name;
  std::vector<std::string> notes;
  std::vector<std::string> failures;

  Criterion(int i, std::string n) : index(i), name(std::move(n)) {}

  void check(bool ok, const std::string& what) {
    if (!ok) failures.push_back(what);
  }
  void note(const std::string& s) { notes.push_back(s); }

  void finish() {
    std::printf("[%s] %d. %s\n", failures.empty() ? "PASS" : "FAIL", index, name.c_str());
    for (const auto& s : notes) std::printf("        %s\n", s.c_str());
    for (const auto& s : failures) std::printf("        FAILED: %s\n", s.c_str());
    if (!failures.empty()) ++g_criteria_failed;
    std::fflush(stdout);
  }
};

ScenarioSpec load(const std::string& name) {
  auto r = load_scenario_file(std::string(SCENARIO_DIR) + "/" + name + ".scn");
  if (!r.ok()) {
    std::fprintf(stderr, "cannot load scenario %s: %s\n", name.c_str(), r.error.c_str());
    std::exit(3);
  }
  return *r;
}

RunResult run(const ScenarioSpec& spec) {
  auto r = run_scenario(spec, spec.seed);
  if (!r.ok()) {
    std::fprintf(stderr, "scenario %s did not run: %s\n", spec.name.c_str(), r.error.c_str());
    std::exit(3);
  }
  return *r;
}

double secs(TimePoint t) { return static_cast<double>(t.ticks()) / kTicksPerSecond; }

// Outcome digest of an attack scenario, everything the bands are set on.
struct AttackOutcome {
  std::string kind;
  bool succeeded = false;
  double initial_sync_s = -1;
  bool synced_inside_window = false;
  double desync_coverage = 0;  // fraction of [start, stop] spent desynced
  double resync_delay_s = -1;  // -1: never resynced
  int attempts = 0;
  int failed = 0;
  std::string first_kod_stamp;
};

AttackOutcome judge(const ScenarioSpec& spec, const RunResult& r) {
  AttackOutcome o;
  const Verdict& v = r.verdict;
  o.kind = v.kind;
  o.succeeded = v.attack_succeeded;
  if (v.initial_sync) o.initial_sync_s = secs(*v.initial_sync);
  o.attempts = v.calibration_attempts;
  o.failed = v.failed_attempts;
  if (v.resync_delay_after_stop) o.resync_delay_s = v.resync_delay_after_stop->seconds();

  std::string victim;
  for (const auto& h : spec.hosts)
    if (h.role == Role::attacker) victim = std::get<AttackerSpec>(h.detail).victim;

  if (v.attack_start) {
    TimePoint start = *v.attack_start, stop = *v.attack_stop;
    for (const auto& e : r.events)
      if (e.kind == EventKind::sync_success && e.actor == victim && e.t > start && e.t < stop)
        o.synced_inside_window = true;
    int64_t covered = 0;
    for (const auto& w : v.desync_windows) {
      TimePoint lo = w.first > start ? w.first : start;
      TimePoint hi = w.second < stop ? w.second : stop;
      if (hi > lo) covered += (hi - lo).ticks();
    }
    o.desync_coverage = static_cast<double>(covered) / (stop - start).ticks();
  }
  for (const auto& e : r.events)
    if (e.kind == EventKind::kod_sent) {
      o.first_kod_stamp = format_hms(e.t);
      break;
    }
  return o;
}

// Shared bands for the flagship attack run and its multicast twin.
void check_attack_bands(Criterion& c, const AttackOutcome& o, const std::string& label) {
  c.check(o.initial_sync_s >= 20 && o.initial_sync_s <= 40,
          label + fmt(": initial sync %.1f s outside [20, 40]", o.initial_sync_s));
  c.check(!o.synced_inside_window, label + ": victim applied sync inside the attack window");
  c.check(o.kind == "attack-succeeded", label + ": verdict is " + o.kind);
  c.check(o.desync_coverage >= 0.99,
          label + fmt(": desync coverage %.4f below 0.99", o.desync_coverage));
  c.check(o.resync_delay_s >= 64 && o.resync_delay_s <= 300,
          label + fmt(": resync delay %.1f s outside [64, 300]", o.resync_delay_s));
  c.check(o.failed >= 24 && o.failed <= 36,
          label + fmt(": %d failed attempts outside [24, 36]", o.failed));
}

// ---- criteria over the flagship scenario ----------------------------------

void criterion_attack(const ScenarioSpec& spec, const RunResult& r, double wall_s) {
  Criterion c(1, "attack reproduction (unauthenticated broadcast)");
  AttackOutcome o = judge(spec, r);
  c.note(fmt("initial sync %.1f s, %d/%d attempts failed, coverage %.4f, resync +%.1f s",
             o.initial_sync_s, o.failed, o.attempts, o.desync_coverage, o.resync_delay_s));
  c.note(fmt("first kiss at %s, wall clock %.2f s", o.first_kod_stamp.c_str(), wall_s));
  check_attack_bands(c, o, "flagship");
  c.check(o.first_kod_stamp == "0:01:39", "first kiss at " + o.first_kod_stamp + ", not 0:01:39");
  c.check(wall_s < 10.0, fmt("run took %.2f s, bound is 10 s", wall_s));
  c.finish();
}

void criterion_accounting(const ScenarioSpec& spec, const RunResult& r) {
  Criterion c(2, "packet accounting");
  const AttackerSpec* atk = nullptr;
  for (const auto& h : spec.hosts)
    if (h.role == Role::attacker) atk = &std::get<AttackerSpec>(h.detail);

  // Schedule arithmetic: one mode 5 per interval in [start, stop); mode 3 is
  // a burst on the first tick, then singles.
  int sched5 = 0;
  for (double t = atk->mode5_start_s; t < atk->stop_s; t += atk->mode5_interval_s) ++sched5;
  int ticks3 = 0;
  for (double t = atk->mode3_start_s; t < atk->stop_s; t += atk->mode3_interval_s) ++ticks3;
  int sched3 = ticks3 - 1 + atk->mode3_burst;

  const HostCounts& attacker = r.verdict.counts.at("attacker");
  const HostCounts& victim = r.verdict.counts.at("victim");
  const HostCounts& server = r.verdict.counts.at("server");
  c.note(fmt("attacker mode5 %d (schedule %d, reference 8388), mode3 %d (schedule %d)",
             attacker.mode5, sched5, attacker.mode3, sched3));
  c.note(fmt("victim mode3 %d (4 x %d attempts), server kisses %d", victim.mode3,
             r.verdict.calibration_attempts, server.kod));

  c.check(attacker.mode5 == sched5,
          fmt("attacker mode5 %d != schedule %d", attacker.mode5, sched5));
  c.check(std::abs(attacker.mode5 - 8388) <= 0.10 * 8388,
          fmt("attacker mode5 %d beyond 10%% of 8388", attacker.mode5));
  c.check(std::abs(attacker.mode3 - sched3) <= 0.02 * sched3,
          fmt("attacker mode3 %d beyond 2%% of %d", attacker.mode3, sched3));
  int expect_victim3 = 4 * r.verdict.calibration_attempts;
  c.check(std::abs(victim.mode3 - expect_victim3) <= 0.20 * expect_victim3,
          fmt("victim mode3 %d beyond 20%% of %d", victim.mode3, expect_victim3));
  c.check(server.kod >= 0.95 * attacker.mode3,
          fmt("server kisses %d below 0.95 x %d", server.kod, attacker.mode3));
  c.finish();
}

void criterion_auth() {
  Criterion c(3, "authenticated variants");
  struct Want {
    const char* scenario;
    const char* verdict;
  } wants[] = {
      {"auth_onpath", "attack-succeeded"},        // keyed attacker forges valid MACs
      {"auth_slave", "attack-succeeded"},         // byte-exact replays keep their MACs
      {"auth_offpath_nokey", "attack-failed"},    // MAC check drops every forgery
  };
  for (const auto& w : wants) {
    ScenarioSpec spec = load(w.scenario);
    AttackOutcome o = judge(spec, run(spec));
    c.note(fmt("%s: %s", w.scenario, o.kind.c_str()));
    c.check(o.kind == w.verdict, fmt("%s verdict %s, want %s", w.scenario, o.kind.c_str(),
                                     w.verdict));
  }
  c.finish();
}

void criterion_multicast(const AttackOutcome& broadcast_flagship) {
  Criterion c(4, "multicast variant parity");
  ScenarioSpec mspec = load("flagship_attack_multicast");
  AttackOutcome m = judge(mspec, run(mspec));
  c.note(fmt("flagship_attack_multicast: %s, coverage %.4f", m.kind.c_str(), m.desync_coverage));
  check_attack_bands(c, m, "multicast flagship");
  c.check(m.kind == broadcast_flagship.kind, "multicast flagship verdict differs from broadcast");

  const char* pairs[][2] = {
      {"auth_onpath", "auth_onpath_multicast"},
      {"auth_slave", "auth_slave_multicast"},
      {"auth_offpath_nokey", "auth_offpath_nokey_multicast"},
  };
  for (const auto& p : pairs) {
    ScenarioSpec a = load(p[0]);
    ScenarioSpec b = load(p[1]);
    std::string ka = judge(a, run(a)).kind;
    std::string kb = judge(b, run(b)).kind;
    c.note(fmt("%s: %s / %s: %s", p[0], ka.c_str(), p[1], kb.c_str()));
    c.check(ka == kb, fmt("%s and %s disagree", p[0], p[1]));
  }
  c.finish();
}

void criterion_defenses() {
  Criterion c(5, "defense matrix");

  struct Want {
    const char* scenario;
    const char* verdict;
  } wants[] = {
      {"defense_ingress", "attack-failed"},
      {"defense_oob", "attack-failed"},
      {"defense_backup", "attack-failed"},
      {"defense_acl", "attack-failed"},
      {"attack_inside_lan_ingress", "attack-succeeded"},  // border filter, insider attacker
  };
  for (const auto& w : wants) {
    ScenarioSpec spec = load(w.scenario);
    RunResult r = run(spec);
    AttackOutcome o = judge(spec, r);
    c.note(fmt("%s: %s", w.scenario, o.kind.c_str()));
    c.check(o.kind == w.verdict,
            fmt("%s verdict %s, want %s", w.scenario, o.kind.c_str(), w.verdict));

    if (std::string(w.scenario) == "defense_oob")
      c.check(r.verdict.desync_windows.empty(),
              fmt("defense_oob victim desynced %zu times", r.verdict.desync_windows.size()));
    if (std::string(w.scenario) == "defense_backup") {
      double worst = 0;
      for (const auto& w2 : r.verdict.desync_windows)
        worst = std::max(worst, secs(w2.second) - secs(w2.first));
      c.note(fmt("defense_backup longest outage %.1f s", worst));
      c.check(worst < 70.0, fmt("backup outage %.1f s reaches one backup poll + slack", worst));
    }
  }

  ScenarioSpec base = load("baseline");
  RunResult br = run(base);
  c.check(br.verdict.kind == "no-attack-baseline" && br.verdict.desync_windows.empty(),
          "undisturbed baseline lost synchronization");
  c.finish();
}

// ---- self-contained protocol properties ------------------------------------

// Minimal scripted time source for the client-property checks.
struct PropServer : Host {
  Network& net;
  Address addr;
  SimClock clock{kEpochBase, Duration()};
  bool answer = true;
  std::vector<NtpPacket> queries;

  explicit PropServer(Network& n) : net(n) { addr = net.add_host("srv", 1, this); }

  uint64_t reading(TimePoint t) const { return *clock.now_u64(t); }

  void handle(const Delivery& d) override {
    if (d.kind != MsgKind::ntp) return;
    auto pkt = decode(d.bytes);
    if (!pkt.ok() || pkt->mode != PacketMode::client) return;
    queries.push_back(*pkt);
    if (!answer) return;
    NtpPacket reply;
    reply.mode = PacketMode::server;
    reply.stratum = 2;
    reply.poll = 6;
    reply.precision = -20;
    reply.reference_id = {10, addr.segment, 0, addr.host};
    reply.reference_ts = NtpTimestamp::from_u64(reading(TimePoint()));
    reply.origin_ts = pkt->transmit_ts;
    uint64_t r = reading(d.at);
    reply.receive_ts = NtpTimestamp::from_u64(r);
    reply.transmit_ts = NtpTimestamp::from_u64(r);
    net.send("srv", addr, d.claimed_source, MsgKind::ntp, *encode(reply));
  }

  void broadcast(Duration displace = Duration()) {
    NtpPacket pkt;
    pkt.mode = PacketMode::broadcast;
    pkt.stratum = 2;
    pkt.poll = 6;
    pkt.precision = -20;
    pkt.reference_id = {10, addr.segment, 0, addr.host};
    pkt.reference_ts = NtpTimestamp::from_u64(reading(TimePoint()));
    pkt.transmit_ts = NtpTimestamp::from_u64(reading(net.now()) - uint64_t(displace.ticks()));
    net.send("srv", addr, Address::broadcast_addr(addr.segment), MsgKind::ntp, *encode(pkt));
  }
};

struct NullHost : Host {
  void handle(const Delivery&) override {}
};

struct ClientRig {
  Network net{DeliveryPolicy{}, 1, Duration::from_whole_seconds(1),
              Duration::from_whole_seconds(1)};
  PropServer srv{net};
  NullHost sink;
  Address rogue;
  std::optional<NtpClient> client;

  explicit ClientRig(BehaviorProfile behavior = {}) {
    ClientConfig cfg;
    cfg.name = "victim";
    cfg.behavior = behavior;
    cfg.volley_size = 4;
    cfg.volley_spacing = Duration::from_seconds(0.5);
    cfg.volley_timeout = Duration::from_whole_seconds(8);
    client.emplace(net, 1, cfg, SimClock(kEpochBase, Duration()));
    client->start();
    rogue = net.add_host("rogue", 1, &sink);
    net.at(TimePoint::from_seconds(10), [this] { srv.broadcast(); });
  }

  int count(EventKind kind, const char* needle = nullptr) const {
    int n = 0;
    for (const auto& e : net.timeline().events())
      if (e.kind == kind && (!needle || e.detail.find(needle) != std::string::npos)) ++n;
    return n;
  }
};

void criterion_mechanisms() {
  Criterion c(6, "security-mechanism properties");
  constexpr int kTrials = 10000;

  {  // Spoofed mode 4 with unknown origins: the nonce check rejects them all.
    ClientRig rig;
    rig.srv.answer = false;  // keep the volley's nonces pending
    std::mt19937_64 rng(0xacce9706);
    for (int i = 0; i < kTrials; ++i) {
      NtpPacket forged;
      forged.mode = PacketMode::server;
      forged.stratum = 2;
      forged.origin_ts = NtpTimestamp::from_u64(rng() | 1);
      forged.receive_ts = NtpTimestamp{1, 1};
      forged.transmit_ts = NtpTimestamp{1, 2};
      auto bytes = encode(forged);
      rig.net.at(TimePoint::from_seconds(15 + i * 0.0003), [&rig, b = *bytes] {
        rig.net.send("rogue", rig.srv.addr, rig.client->address(), MsgKind::ntp, b);
      });
    }
    rig.net.run_until(TimePoint::from_seconds(30));
    int rejected = rig.count(EventKind::host_dropped, "bogus origin timestamp");
    c.note(fmt("origin check rejected %d/%d spoofed responses", rejected, kTrials));
    c.check(rejected == kTrials, fmt("only %d/%d spoofed mode 4 rejected", rejected, kTrials));
    c.check(rig.client->sync_times().empty(), "a spoofed mode 4 produced a sync");
  }

  {  // Spoofed kisses against a synced client: no pending nonce, no refrain.
    ClientRig rig;
    std::mt19937_64 rng(0xacce9616);
    for (int i = 0; i < kTrials; ++i) {
      auto bytes = encode(make_kod(6, NtpTimestamp::from_u64(rng() | 1)));
      rig.net.at(TimePoint::from_seconds(20 + i * 0.0003), [&rig, b = *bytes] {
        rig.net.send("rogue", rig.srv.addr, rig.client->address(), MsgKind::ntp, b);
      });
    }
    rig.net.run_until(TimePoint::from_seconds(40));
    int ignored = rig.count(EventKind::host_dropped, "kiss ignored: origin is not a pending nonce");
    c.note(fmt("nonce check ignored %d/%d spoofed kisses", ignored, kTrials));
    c.check(ignored == kTrials, fmt("only %d/%d spoofed kisses ignored", ignored, kTrials));
    c.check(rig.count(EventKind::refrain_enter) == 0, "a spoofed kiss caused a refrain");
    c.check(rig.client->phase() == ClientPhase::synced, "client lost sync to spoofed kisses");
  }

  {  // Legacy profile: without the nonce check one spoofed kiss is honored.
    BehaviorProfile legacy;
    legacy.kod_nonce_check = false;
    ClientRig rig(legacy);
    auto bytes = encode(make_kod(6, NtpTimestamp{12, 34}));
    rig.net.at(TimePoint::from_seconds(20), [&rig, b = *bytes] {
      rig.net.send("rogue", rig.srv.addr, rig.client->address(), MsgKind::ntp, b);
    });
    rig.net.run_until(TimePoint::from_seconds(30));
    c.check(rig.count(EventKind::refrain_enter) == 1,
            "legacy profile did not honor a spoofed kiss");
  }

  {  // Panic profiles: quit exits, recalibrate survives.
    BehaviorProfile quits;
    quits.panic_behavior = PanicBehavior::quit;
    ClientRig rig(quits);
    rig.net.at(TimePoint::from_seconds(20),
               [&rig] { rig.srv.broadcast(Duration::from_whole_seconds(2000)); });
    rig.net.run_until(TimePoint::from_seconds(40));
    c.check(rig.client->exited() && rig.count(EventKind::client_exit) == 1,
            "quit profile survived a panic-grade broadcast");

    ClientRig rig2;
    rig2.net.at(TimePoint::from_seconds(20),
                [&rig2] { rig2.srv.broadcast(Duration::from_whole_seconds(2000)); });
    rig2.net.run_until(TimePoint::from_seconds(40));
    c.check(rig2.count(EventKind::panic_desync) == 1 && rig2.client->sync_times().size() == 2 &&
                rig2.client->phase() == ClientPhase::synced,
            "recalibrate profile did not recover from a panic-grade broadcast");
  }
  c.finish();
}

void criterion_codec() {
  Criterion c(7, "codec and math properties");
  std::mt19937_64 rng(0xacce9707);

  int trips = 0;
  constexpr int kTrips = 100000;
  for (int i = 0; i < kTrips; ++i) {
    NtpPacket p;
    p.leap = rng() % 4;
    p.version = 1 + rng() % 7;
    p.mode = static_cast<PacketMode>(1 + rng() % 5);
    p.stratum = rng() % 17;
    p.poll = static_cast<int8_t>(rng());
    p.precision = static_cast<int8_t>(rng());
    p.root_delay = static_cast<uint32_t>(rng());
    p.root_dispersion = static_cast<uint32_t>(rng());
    for (auto& b : p.reference_id) b = static_cast<uint8_t>(rng());
    p.reference_ts = NtpTimestamp::from_u64(rng());
    p.origin_ts = NtpTimestamp::from_u64(rng());
    p.receive_ts = NtpTimestamp::from_u64(rng());
    p.transmit_ts = NtpTimestamp::from_u64(rng());
    if (rng() & 1) {
      Mac mac;
      mac.key_id = static_cast<uint32_t>(rng());
      for (auto& b : mac.digest) b = static_cast<uint8_t>(rng());
      p.mac = mac;
    }
    auto bytes = encode(p);
    if (!bytes.ok()) break;
    auto back = decode(*bytes);
    if (!back.ok() || !(*back == p)) break;
    auto again = encode(*back);
    if (!again.ok() || *again != *bytes) break;
    ++trips;
  }
  c.note(fmt("%d/%d encode/decode round trips exact", trips, kTrips));
  c.check(trips == kTrips, fmt("round trip broke after %d packets", trips));

  int macs = 0;
  constexpr int kMacs = 2000;
  for (int i = 0; i < kMacs; ++i) {
    NtpPacket p;
    p.mode = PacketMode::server;
    p.stratum = 2;
    p.transmit_ts = NtpTimestamp::from_u64(rng());
    SymmetricKey key{static_cast<uint32_t>(1 + rng() % 1000), {}};
    key.secret.resize(8 + rng() % 9);
    for (auto& b : key.secret) b = static_cast<uint8_t>(rng());
    p.mac = compute_mac(p, key);
    if (verify_mac(p, key) != MacStatus::valid) break;

    NtpPacket flipped = p;
    flipped.mac->digest[rng() % 16] ^= uint8_t(1) << (rng() % 8);
    if (verify_mac(flipped, key) != MacStatus::invalid) break;

    NtpPacket wrong_id = p;
    wrong_id.mac->key_id = key.key_id + 1;
    if (verify_mac(wrong_id, key) != MacStatus::invalid) break;

    SymmetricKey other = key;
    other.secret.push_back(0x5a);
    if (verify_mac(p, other) != MacStatus::invalid) break;

    NtpPacket bare = p;
    bare.mac.reset();
    if (verify_mac(bare, key) != MacStatus::unauthenticated) break;
    ++macs;
  }
  c.note(fmt("%d/%d MAC soundness sweeps clean", macs, kMacs));
  c.check(macs == kMacs, fmt("MAC property broke after %d packets", macs));

  int quads = 0;
  constexpr int kQuads = 100000;
  for (int i = 0; i < kQuads; ++i) {
    int64_t theta = static_cast<int64_t>(rng() % (4000ull << 32)) - (2000ll << 32);
    uint64_t d = (1 + rng() % 8) * (uint64_t(1) << 32) + (rng() & 0xffffffff);
    uint64_t hold = rng() & 0xffffffff;
    TimestampQuad q;
    q.t1 = (uint64_t(kEpochBase) << 32) + rng() % (1000000ull << 32);
    q.t2 = q.t1 + d + static_cast<uint64_t>(theta);
    q.t3 = q.t2 + hold;
    q.t4 = q.t3 + d - static_cast<uint64_t>(theta);
    if (compute_offset(q).ticks() != theta) break;
    if (compute_delay(q).ticks() != static_cast<int64_t>(2 * d)) break;
    ++quads;
  }
  c.note(fmt("%d/%d symmetric exchanges recovered offset and delay exactly", quads, kQuads));
  c.check(quads == kQuads, fmt("offset/delay recovery broke after %d exchanges", quads));

  Thresholds th;
  int64_t step = th.step_threshold.ticks();
  int64_t panic = th.panic_threshold.ticks();
  auto cls = [&](int64_t t) { return classify_offset(Duration::from_ticks(t), th); };
  bool edges = cls(step) == OffsetClass::slew && cls(-step) == OffsetClass::slew &&
               cls(step + 1) == OffsetClass::step && cls(-step - 1) == OffsetClass::step &&
               cls(panic) == OffsetClass::step && cls(-panic) == OffsetClass::step &&
               cls(panic + 1) == OffsetClass::panic && cls(-panic - 1) == OffsetClass::panic;
  c.check(edges, "offset classification is wrong at a threshold boundary");
  c.finish();
}

void criterion_determinism(const ScenarioSpec& flagship, const RunResult& first) {
  Criterion c(8, "deterministic reports");
  RunResult second = run(flagship);
  std::string a = render_json(flagship, flagship.seed, first);
  std::string b = render_json(flagship, flagship.seed, second);
  c.note(fmt("flagship JSON %zu bytes, re-run identical: %s", a.size(), a == b ? "yes" : "NO"));
  c.check(a == b, "flagship re-run changed the JSON report");
  c.check(render_text(flagship, flagship.seed, first) ==
              render_text(flagship, flagship.seed, second),
          "flagship re-run changed the text report");

  for (const char* name : {"baseline", "auth_slave"}) {
    ScenarioSpec spec = load(name);
    std::string x = render_json(spec, spec.seed, run(spec));
    std::string y = render_json(spec, spec.seed, run(spec));
    c.check(x == y, fmt("%s re-run changed the JSON report", name));
  }
  c.finish();
}

}  // namespace

int main() {
  ScenarioSpec flagship = load("flagship_attack");
  auto t0 = std::chrono::steady_clock::now();
  RunResult flagship_run = run(flagship);
  double wall_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  criterion_attack(flagship, flagship_run, wall_s);
  criterion_accounting(flagship, flagship_run);
  criterion_auth();
  criterion_multicast(judge(flagship, flagship_run));
  criterion_defenses();
  criterion_mechanisms();
  criterion_codec();
  criterion_determinism(flagship, flagship_run);

  std::printf("acceptance: %d/8 criteria passed\n", 8 - g_criteria_failed);
  return g_criteria_failed == 0 ? 0 : 1;
}
