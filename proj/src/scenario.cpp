#include "ntpsim/scenario.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

namespace ntpsim {

const char* to_string(Role r) {
  switch (r) {
    case Role::broadcast_server: return "broadcast_server";
    case Role::unicast_server: return "unicast_server";
    case Role::victim_client: return "victim_client";
    case Role::probe_client: return "probe_client";
    case Role::attacker: return "attacker";
    case Role::slave: return "slave";
  }
  return "?";
}

const HostSpec* ScenarioSpec::find_host(const std::string& host_name) const {
  for (const auto& h : hosts)
    if (h.name == host_name) return &h;
  return nullptr;
}

namespace {

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> tokenize(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  std::string t;
  while (in >> t) out.push_back(t);
  return out;
}

std::optional<double> to_f(const std::string& s) {
  double v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size()) return std::nullopt;
  return v;
}

std::optional<long long> to_i(const std::string& s) {
  long long v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size()) return std::nullopt;
  return v;
}

std::optional<unsigned long long> to_u(const std::string& s) {
  unsigned long long v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size()) return std::nullopt;
  return v;
}

std::optional<bool> to_onoff(const std::string& s) {
  if (s == "on") return true;
  if (s == "off") return false;
  return std::nullopt;
}

std::optional<std::vector<uint8_t>> to_hex(const std::string& s) {
  if (s.empty() || s.size() % 2 != 0) return std::nullopt;
  std::vector<uint8_t> out;
  out.reserve(s.size() / 2);
  auto nibble = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
  };
  for (size_t i = 0; i < s.size(); i += 2) {
    int hi = nibble(s[i]), lo = nibble(s[i + 1]);
    if (hi < 0 || lo < 0) return std::nullopt;
    out.push_back(static_cast<uint8_t>(hi << 4 | lo));
  }
  return out;
}

std::optional<Role> to_role(const std::string& s) {
  if (s == "broadcast_server") return Role::broadcast_server;
  if (s == "unicast_server") return Role::unicast_server;
  if (s == "victim_client") return Role::victim_client;
  if (s == "probe_client") return Role::probe_client;
  if (s == "attacker") return Role::attacker;
  if (s == "slave") return Role::slave;
  return std::nullopt;
}

std::optional<AttackerPosition> to_position(const std::string& s) {
  if (s == "off_path_unauth") return AttackerPosition::off_path_unauth;
  if (s == "on_path_keyed") return AttackerPosition::on_path_keyed;
  if (s == "off_path_with_slave") return AttackerPosition::off_path_with_slave;
  return std::nullopt;
}

}  // namespace

Result<ScenarioSpec> parse_scenario(const std::string& text, const std::string& name) {
  using R = Result<ScenarioSpec>;
  ScenarioSpec spec;
  spec.name = name;

  enum class Section { top, policy, auth, host };
  Section section = Section::top;
  HostSpec* cur = nullptr;
  bool cur_role_set = false;

  auto fail = [](int n, const std::string& msg) {
    return R::failure("line " + std::to_string(n) + ": " + msg);
  };
  auto bad_value = [](const std::string& key, const std::string& v) {
    return "invalid value '" + v + "' for '" + key + "'";
  };

  std::istringstream in(text);
  std::string raw;
  int n = 0;
  while (std::getline(in, raw)) {
    ++n;
    std::string line = raw;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') return fail(n, "section header is missing ']'");
      auto tok = tokenize(line.substr(1, line.size() - 2));
      if (tok.empty()) return fail(n, "empty section header");
      if (tok[0] == "policy" && tok.size() == 1) {
        section = Section::policy;
      } else if (tok[0] == "auth" && tok.size() == 1) {
        section = Section::auth;
      } else if (tok[0] == "segment" && tok.size() == 2) {
        if (std::find(spec.segments.begin(), spec.segments.end(), tok[1]) != spec.segments.end())
          return fail(n, "segment '" + tok[1] + "' declared twice");
        spec.segments.push_back(tok[1]);
        section = Section::top;
        cur = nullptr;
      } else if (tok[0] == "host" && tok.size() == 2) {
        spec.hosts.push_back(HostSpec{});
        cur = &spec.hosts.back();
        cur->name = tok[1];
        cur_role_set = false;
        section = Section::host;
      } else {
        return fail(n, "unknown section '" + tok[0] + "'");
      }
      continue;
    }

    auto tok = tokenize(line);
    const std::string key = tok[0];
    if (tok.size() < 2) return fail(n, "key '" + key + "' needs a value");
    const std::string v = tok[1];

    switch (section) {
      case Section::top: {
        if (key == "duration") {
          auto f = to_f(v);
          if (!f) return fail(n, bad_value(key, v));
          spec.duration_s = *f;
        } else if (key == "seed") {
          auto u = to_u(v);
          if (!u) return fail(n, bad_value(key, v));
          spec.seed = *u;
        } else if (key == "epoch_base") {
          auto u = to_u(v);
          if (!u || *u > 0xffffffffull) return fail(n, bad_value(key, v));
          spec.epoch_base = static_cast<uint32_t>(*u);
        } else {
          return fail(n, "unknown top-level key '" + key + "'");
        }
        break;
      }
      case Section::policy: {
        if (key == "ingress_filtering") {
          auto b = to_onoff(v);
          if (!b) return fail(n, bad_value(key, v));
          spec.policy.ingress_filtering = *b;
        } else if (key == "intra_delay" || key == "inter_delay" || key == "loss") {
          auto f = to_f(v);
          if (!f) return fail(n, bad_value(key, v));
          if (key == "intra_delay") spec.policy.intra_delay_s = *f;
          else if (key == "inter_delay") spec.policy.inter_delay_s = *f;
          else spec.policy.loss_rate = *f;
        } else {
          return fail(n, "unknown [policy] key '" + key + "'");
        }
        break;
      }
      case Section::auth: {
        if (key == "enabled") {
          auto b = to_onoff(v);
          if (!b) return fail(n, bad_value(key, v));
          spec.auth.enabled = *b;
        } else if (key == "key_id") {
          auto u = to_u(v);
          if (!u || *u == 0 || *u > 0xffffffffull) return fail(n, bad_value(key, v));
          spec.auth.key_id = static_cast<uint32_t>(*u);
        } else if (key == "secret") {
          auto bytes = to_hex(v);
          if (!bytes) return fail(n, "'secret' must be an even-length hex string");
          spec.auth.secret = std::move(*bytes);
        } else {
          return fail(n, "unknown [auth] key '" + key + "'");
        }
        break;
      }
      case Section::host: {
        if (key == "segment") {
          cur->segment = v;
          break;
        }
        if (key == "role") {
          if (cur_role_set) return fail(n, "role already set for host '" + cur->name + "'");
          auto r = to_role(v);
          if (!r) return fail(n, bad_value(key, v));
          cur->role = *r;
          cur_role_set = true;
          switch (*r) {
            case Role::broadcast_server: cur->detail = ServerSpec{}; break;
            case Role::unicast_server: {
              ServerSpec s;
              s.broadcast_enabled = false;
              cur->detail = s;
              break;
            }
            case Role::victim_client: cur->detail = ClientSpec{}; break;
            case Role::probe_client: cur->detail = ProbeSpec{}; break;
            case Role::attacker: cur->detail = AttackerSpec{}; break;
            case Role::slave: cur->detail = SlaveSpec{}; break;
          }
          break;
        }
        if (!cur_role_set)
          return fail(n, "'role' must be set before '" + key + "' for host '" + cur->name + "'");

        auto unknown = [&] {
          return fail(n, "key '" + key + "' is not valid for role " +
                             std::string(to_string(cur->role)));
        };

        switch (cur->role) {
          case Role::broadcast_server:
          case Role::unicast_server: {
            auto& s = std::get<ServerSpec>(cur->detail);
            if (key == "stratum" || key == "rate_burst" || key == "kod_poll" || key == "poll") {
              auto i = to_i(v);
              if (!i) return fail(n, bad_value(key, v));
              if (key == "stratum") s.stratum = static_cast<int>(*i);
              else if (key == "rate_burst") s.rate_burst = static_cast<int>(*i);
              else if (key == "kod_poll") s.kod_poll = static_cast<int>(*i);
              else s.poll = static_cast<int>(*i);
            } else if (key == "rate_headway") {
              auto f = to_f(v);
              if (!f) return fail(n, bad_value(key, v));
              s.rate_headway_s = *f;
            } else if (key == "keyed") {
              auto b = to_onoff(v);
              if (!b) return fail(n, bad_value(key, v));
              s.keyed = *b;
            } else if (cur->role == Role::broadcast_server && key == "broadcast_start") {
              auto f = to_f(v);
              if (!f) return fail(n, bad_value(key, v));
              s.broadcast_start_s = *f;
            } else if (cur->role == Role::broadcast_server && key == "broadcast_interval") {
              auto f = to_f(v);
              if (!f) return fail(n, bad_value(key, v));
              s.broadcast_interval_s = *f;
            } else if (cur->role == Role::broadcast_server && key == "broadcast_to") {
              if (v == "broadcast" && tok.size() == 2) {
                s.multicast = false;
              } else if (v == "multicast" && tok.size() == 3) {
                auto g = to_i(tok[2]);
                if (!g) return fail(n, bad_value(key, tok[2]));
                s.multicast = true;
                s.multicast_group = static_cast<int>(*g);
              } else {
                return fail(n, "'broadcast_to' expects 'broadcast' or 'multicast <group>'");
              }
            } else {
              return unknown();
            }
            break;
          }
          case Role::victim_client: {
            auto& c = std::get<ClientSpec>(cur->detail);
            if (key == "clock_offset" || key == "volley_spacing" || key == "volley_timeout" ||
                key == "mobilize_delay" || key == "recalibrate_delay" ||
                key == "min_retry_interval" || key == "oob_interval" || key == "backup_poll" ||
                key == "backup_start") {
              auto f = to_f(v);
              if (!f) return fail(n, bad_value(key, v));
              if (key == "clock_offset") c.clock_offset_s = *f;
              else if (key == "volley_spacing") c.volley_spacing_s = *f;
              else if (key == "volley_timeout") c.volley_timeout_s = *f;
              else if (key == "mobilize_delay") c.mobilize_delay_s = *f;
              else if (key == "recalibrate_delay") c.recalibrate_delay_s = *f;
              else if (key == "min_retry_interval") c.min_retry_interval_s = *f;
              else if (key == "oob_interval") c.oob_interval_s = *f;
              else if (key == "backup_poll") c.backup_poll_s = *f;
              else c.backup_start_s = *f;
            } else if (key == "volley_size" || key == "poll") {
              auto i = to_i(v);
              if (!i) return fail(n, bad_value(key, v));
              if (key == "volley_size") c.volley_size = static_cast<int>(*i);
              else c.poll = static_cast<int>(*i);
            } else if (key == "panic_behavior") {
              if (v == "recalibrate") c.panic_behavior = PanicBehavior::recalibrate;
              else if (v == "quit") c.panic_behavior = PanicBehavior::quit;
              else return fail(n, bad_value(key, v));
            } else if (key == "kod_nonce_check" || key == "out_of_band_ppd" || key == "keyed") {
              auto b = to_onoff(v);
              if (!b) return fail(n, bad_value(key, v));
              if (key == "kod_nonce_check") c.kod_nonce_check = *b;
              else if (key == "out_of_band_ppd") c.out_of_band_ppd = *b;
              else c.keyed = *b;
            } else if (key == "backup_server") {
              c.backup_server = v;
            } else if (key == "trusted_sources") {
              c.trusted_sources.assign(tok.begin() + 1, tok.end());
            } else {
              return unknown();
            }
            break;
          }
          case Role::probe_client: {
            auto& p = std::get<ProbeSpec>(cur->detail);
            if (key == "target") {
              p.target = v;
            } else if (key == "probe_interval" || key == "probe_start") {
              auto f = to_f(v);
              if (!f) return fail(n, bad_value(key, v));
              if (key == "probe_interval") p.probe_interval_s = *f;
              else p.probe_start_s = *f;
            } else {
              return unknown();
            }
            break;
          }
          case Role::attacker: {
            auto& a = std::get<AttackerSpec>(cur->detail);
            if (key == "position") {
              auto p = to_position(v);
              if (!p) return fail(n, bad_value(key, v));
              a.position = *p;
            } else if (key == "server") {
              a.server = v;
            } else if (key == "victim") {
              a.victim = v;
            } else if (key == "slave") {
              a.slave = v;
            } else if (key == "mode5_start" || key == "mode5_interval" || key == "mode3_start" ||
                       key == "mode3_interval" || key == "stop" || key == "displacement") {
              auto f = to_f(v);
              if (!f) return fail(n, bad_value(key, v));
              if (key == "mode5_start") a.mode5_start_s = *f;
              else if (key == "mode5_interval") a.mode5_interval_s = *f;
              else if (key == "mode3_start") a.mode3_start_s = *f;
              else if (key == "mode3_interval") a.mode3_interval_s = *f;
              else if (key == "stop") a.stop_s = *f;
              else a.displacement_s = *f;
            } else if (key == "mode3_burst" || key == "mimic_stratum") {
              auto i = to_i(v);
              if (!i) return fail(n, bad_value(key, v));
              if (key == "mode3_burst") a.mode3_burst = static_cast<int>(*i);
              else a.mimic_stratum = static_cast<int>(*i);
            } else {
              return unknown();
            }
            break;
          }
          case Role::slave: {
            auto& s = std::get<SlaveSpec>(cur->detail);
            if (key == "server") {
              s.server = v;
            } else if (key == "victim") {
              s.victim = v;
            } else if (key == "forward_delay" || key == "capture_window") {
              auto f = to_f(v);
              if (!f) return fail(n, bad_value(key, v));
              if (key == "forward_delay") s.forward_delay_s = *f;
              else s.capture_window_s = *f;
            } else {
              return unknown();
            }
            break;
          }
        }
        break;
      }
    }
  }

  // Cross-cutting validation.
  auto bad = [](const std::string& msg) { return R::failure(msg); };
  if (spec.duration_s <= 0) return bad("'duration' must be set to a positive number of seconds");
  if (spec.policy.intra_delay_s <= 0 || spec.policy.inter_delay_s <= 0)
    return bad("propagation delays must be positive");
  if (spec.policy.loss_rate < 0 || spec.policy.loss_rate > 1)
    return bad("'loss' must lie in [0, 1]");
  if (spec.auth.enabled && spec.auth.secret.empty())
    return bad("[auth] enabled requires a non-empty 'secret'");
  if (spec.epoch_base == 0) return bad("'epoch_base' must be positive");
  if (spec.segments.empty()) return bad("at least one [segment] must be declared");

  std::map<std::string, const HostSpec*> by_name;
  for (const auto& h : spec.hosts) {
    if (h.name.empty()) return bad("host name must not be empty");
    if (!by_name.emplace(h.name, &h).second)
      return bad("host '" + h.name + "' declared twice");
  }

  int broadcast_servers = 0;
  for (const auto& h : spec.hosts) {
    auto where = [&](const std::string& msg) { return bad("host '" + h.name + "': " + msg); };
    if (std::find(spec.segments.begin(), spec.segments.end(), h.segment) == spec.segments.end())
      return where("segment '" + h.segment + "' is not declared");

    auto ref = [&](const std::string& target, Role want,
                   const std::string& what) -> std::optional<R> {
      auto it = by_name.find(target);
      if (target.empty()) return where("'" + what + "' must name a host");
      if (it == by_name.end()) return where("'" + what + "' names unknown host '" + target + "'");
      if (it->second->role != want)
        return where("'" + what + "' must name a " + std::string(to_string(want)) + ", but '" +
                     target + "' is a " + to_string(it->second->role));
      return std::nullopt;
    };

    switch (h.role) {
      case Role::broadcast_server:
      case Role::unicast_server: {
        if (h.role == Role::broadcast_server) ++broadcast_servers;
        const auto& s = std::get<ServerSpec>(h.detail);
        if (s.stratum < 1 || s.stratum > 15) return where("'stratum' must lie in [1, 15]");
        if (s.rate_headway_s <= 0) return where("'rate_headway' must be positive");
        if (s.rate_burst < 1) return where("'rate_burst' must be at least 1");
        if (s.kod_poll < 0 || s.kod_poll > 17) return where("'kod_poll' must lie in [0, 17]");
        if (s.poll < 1 || s.poll > 17) return where("'poll' must lie in [1, 17]");
        if (s.broadcast_enabled) {
          if (s.broadcast_interval_s <= 0) return where("'broadcast_interval' must be positive");
          if (s.broadcast_start_s < 0) return where("'broadcast_start' must not be negative");
          if (s.multicast && (s.multicast_group < 1 || s.multicast_group > 255))
            return where("multicast group must lie in [1, 255]");
        }
        if (s.keyed && !spec.auth.enabled) return where("'keyed on' requires [auth] enabled");
        break;
      }
      case Role::victim_client: {
        const auto& c = std::get<ClientSpec>(h.detail);
        if (c.volley_size < 1) return where("'volley_size' must be at least 1");
        if (c.volley_spacing_s <= 0) return where("'volley_spacing' must be positive");
        if (c.volley_timeout_s <= 0) return where("'volley_timeout' must be positive");
        if (c.mobilize_delay_s < 0 || c.recalibrate_delay_s < 0 || c.min_retry_interval_s < 0)
          return where("delays must not be negative");
        if (c.poll < 1 || c.poll > 17) return where("'poll' must lie in [1, 17]");
        if (c.oob_interval_s <= 0) return where("'oob_interval' must be positive");
        if (c.backup_server) {
          if (auto r = ref(*c.backup_server, Role::unicast_server, "backup_server")) return *r;
          if (c.backup_poll_s <= 0) return where("'backup_poll' must be positive");
          if (c.backup_start_s < 0) return where("'backup_start' must not be negative");
        }
        for (const auto& t : c.trusted_sources)
          if (!by_name.count(t))
            return where("'trusted_sources' names unknown host '" + t + "'");
        if (c.keyed && !spec.auth.enabled) return where("'keyed on' requires [auth] enabled");
        break;
      }
      case Role::probe_client: {
        const auto& p = std::get<ProbeSpec>(h.detail);
        if (p.target.empty()) return where("'target' is required");
        if (!by_name.count(p.target))
          return where("'target' names unknown host '" + p.target + "'");
        if (p.probe_interval_s <= 0) return where("'probe_interval' must be positive");
        if (p.probe_start_s < 0) return where("'probe_start' must not be negative");
        break;
      }
      case Role::attacker: {
        const auto& a = std::get<AttackerSpec>(h.detail);
        if (auto r = ref(a.server, Role::broadcast_server, "server")) return *r;
        if (auto r = ref(a.victim, Role::victim_client, "victim")) return *r;
        if (a.mode5_start_s < 0) return where("'mode5_start' is required");
        if (a.mode3_start_s < 0) return where("'mode3_start' is required");
        if (a.stop_s <= std::max(a.mode5_start_s, a.mode3_start_s))
          return where("'stop' must come after both start times");
        if (a.mode5_interval_s <= 0 || a.mode3_interval_s <= 0)
          return where("forgery intervals must be positive");
        if (a.mode3_burst < 1) return where("'mode3_burst' must be at least 1");
        if (a.displacement_s <= 0) return where("'displacement' must be positive");
        if (a.mimic_stratum < 1 || a.mimic_stratum > 15)
          return where("'mimic_stratum' must lie in [1, 15]");
        if (a.position == AttackerPosition::on_path_keyed && !spec.auth.enabled)
          return where("position on_path_keyed requires [auth] enabled");
        if (a.position == AttackerPosition::off_path_with_slave) {
          if (auto r = ref(a.slave, Role::slave, "slave")) return *r;
        } else if (!a.slave.empty()) {
          return where("'slave' is only meaningful for position off_path_with_slave");
        }
        break;
      }
      case Role::slave: {
        const auto& s = std::get<SlaveSpec>(h.detail);
        if (auto r = ref(s.server, Role::broadcast_server, "server")) return *r;
        if (auto r = ref(s.victim, Role::victim_client, "victim")) return *r;
        if (s.forward_delay_s < 0) return where("'forward_delay' must not be negative");
        if (s.capture_window_s <= 0) return where("'capture_window' must be positive");
        break;
      }
    }
  }
  if (broadcast_servers != 1)
    return bad("exactly one broadcast_server is required, found " +
               std::to_string(broadcast_servers));

  return R::success(std::move(spec));
}

Result<ScenarioSpec> load_scenario_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return Result<ScenarioSpec>::failure("cannot open scenario file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str(), std::filesystem::path(path).stem().string());
}

}  // namespace ntpsim
