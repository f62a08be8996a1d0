#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ntpsim/scenario.hpp"
#include "ntpsim/simnet.hpp"
#include "ntpsim/timeline.hpp"

namespace ntpsim {

// Per-host transmission counts (one per send, however many recipients).
struct HostCounts {
  std::string role;
  int mode3 = 0;
  int mode4 = 0;  // excluding kisses
  int mode5 = 0;
  int kod = 0;
  int echo = 0;  // echo requests and replies
};

struct Verdict {
  std::string kind;  // no-attack-baseline | attack-failed | attack-succeeded
  bool attack_succeeded = false;
  std::optional<TimePoint> attack_start;
  std::optional<TimePoint> attack_stop;
  std::optional<TimePoint> initial_sync;
  // Spans where the victim held no synchronization; an open span ends at
  // the run's end.
  std::vector<std::pair<TimePoint, TimePoint>> desync_windows;
  std::optional<Duration> resync_delay_after_stop;
  int calibration_attempts = 0;
  int failed_attempts = 0;
  // Probe responses whose arrival falls inside [attack_start, attack_stop].
  int probe_responses_in_window = 0;
  bool probe_reference_constant = false;  // all in-window responses agree
  std::map<std::string, HostCounts> counts;
};

struct RunResult {
  Verdict verdict;
  std::vector<TimelineEvent> events;
  std::vector<PacketRecord> records;
};

// Builds the network from the scenario, runs it to the configured duration,
// and judges the outcome. The seed overrides the scenario's own.
Result<RunResult> run_scenario(const ScenarioSpec& spec, uint64_t seed);

}  // namespace ntpsim
