#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "ntpsim/adversary.hpp"
#include "ntpsim/client.hpp"
#include "ntpsim/wire.hpp"

namespace ntpsim {

// Parsed form of a .scn file: plain data, durations in seconds as written.
// Validation happens at parse time; the runner converts to engine types.

struct PolicySpec {
  bool ingress_filtering = false;
  double intra_delay_s = 1.0;
  double inter_delay_s = 1.0;
  double loss_rate = 0.0;
};

struct AuthSpec {
  bool enabled = false;
  uint32_t key_id = 1;
  std::vector<uint8_t> secret;
};

struct ServerSpec {
  int stratum = 2;
  bool broadcast_enabled = true;  // false for the unicast_server role
  double broadcast_start_s = 64;
  double broadcast_interval_s = 64;
  bool multicast = false;
  int multicast_group = 1;
  double rate_headway_s = 8;
  int rate_burst = 2;
  int kod_poll = 6;
  int poll = 6;
  bool keyed = false;
};

struct ClientSpec {
  double clock_offset_s = 0;
  int volley_size = 4;
  double volley_spacing_s = 2;
  double volley_timeout_s = 8;
  double mobilize_delay_s = 2;
  double recalibrate_delay_s = 2;
  double min_retry_interval_s = 0;
  int poll = 6;
  PanicBehavior panic_behavior = PanicBehavior::recalibrate;
  bool kod_nonce_check = true;
  bool out_of_band_ppd = false;
  double oob_interval_s = 64;
  std::optional<std::string> backup_server;
  double backup_poll_s = 64;
  double backup_start_s = 64;
  std::vector<std::string> trusted_sources;
  bool keyed = false;
};

struct ProbeSpec {
  std::string target;
  double probe_interval_s = 60;
  double probe_start_s = 60;
};

struct AttackerSpec {
  AttackerPosition position = AttackerPosition::off_path_unauth;
  std::string server;
  std::string victim;
  std::string slave;
  double mode5_start_s = -1;  // required
  double mode5_interval_s = 1;
  double mode3_start_s = -1;  // required
  int mode3_burst = 2;
  double mode3_interval_s = 10;
  double stop_s = -1;  // required
  double displacement_s = 2000;
  int mimic_stratum = 2;
};

struct SlaveSpec {
  std::string server;
  std::string victim;
  double forward_delay_s = 1;
  double capture_window_s = 120;
};

enum class Role { broadcast_server, unicast_server, victim_client, probe_client, attacker, slave };

const char* to_string(Role r);

struct HostSpec {
  std::string name;
  std::string segment;
  Role role = Role::victim_client;
  std::variant<ServerSpec, ClientSpec, ProbeSpec, AttackerSpec, SlaveSpec> detail;
};

struct ScenarioSpec {
  std::string name;  // report label; the loader uses the file basename
  double duration_s = 0;
  uint64_t seed = 0;
  uint32_t epoch_base = 3800000000u;
  PolicySpec policy;
  AuthSpec auth;
  std::vector<std::string> segments;  // declaration order fixes numbering
  std::vector<HostSpec> hosts;

  const HostSpec* find_host(const std::string& name) const;
};

// Parses and validates scenario text; errors carry the offending line.
Result<ScenarioSpec> parse_scenario(const std::string& text, const std::string& name);

Result<ScenarioSpec> load_scenario_file(const std::string& path);

}  // namespace ntpsim
