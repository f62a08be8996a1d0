#include "ntpsim/report.hpp"

#include <cstdio>
#include <sstream>

#include "json.hpp"

namespace ntpsim {

namespace {

double to_seconds(TimePoint t) { return static_cast<double>(t.ticks()) / kTicksPerSecond; }
double to_seconds(Duration d) { return d.seconds(); }

std::string fixed6(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

}  // namespace

std::string render_text(const ScenarioSpec& spec, uint64_t seed, const RunResult& result) {
  std::ostringstream out;
  out << "# scenario " << spec.name << " seed " << seed << " duration "
      << fixed6(spec.duration_s) << " s\n";
  for (const auto& e : result.events) {
    out << format_hms(e.t) << " " << e.actor << " " << to_string(e.kind);
    if (!e.detail.empty()) out << " " << e.detail;
    out << "\n";
  }
  const Verdict& v = result.verdict;
  out << "verdict: " << v.kind << "\n";
  if (v.attack_start)
    out << "  attack window: " << format_hms(*v.attack_start) << " .. "
        << format_hms(*v.attack_stop) << "\n";
  if (v.initial_sync)
    out << "  initial sync: " << format_hms(*v.initial_sync) << " ("
        << fixed6(to_seconds(*v.initial_sync)) << " s)\n";
  for (const auto& w : v.desync_windows)
    out << "  desynchronized: " << format_hms(w.first) << " .. " << format_hms(w.second) << " ("
        << fixed6(to_seconds(w.second - w.first)) << " s)\n";
  if (v.resync_delay_after_stop)
    out << "  resync delay after stop: " << fixed6(to_seconds(*v.resync_delay_after_stop))
        << " s\n";
  out << "  calibration attempts: " << v.calibration_attempts << " (" << v.failed_attempts
      << " failed)\n";
  if (v.attack_start)
    out << "  probe responses in window: " << v.probe_responses_in_window
        << (v.probe_reference_constant ? " (reference frozen)" : " (reference advanced)") << "\n";
  out << "counts (sent):\n";
  char line[160];
  std::snprintf(line, sizeof(line), "  %-12s %-17s %7s %7s %7s %7s %7s\n", "host", "role",
                "mode3", "mode4", "mode5", "kod", "echo");
  out << line;
  for (const auto& [name, c] : v.counts) {
    std::snprintf(line, sizeof(line), "  %-12s %-17s %7d %7d %7d %7d %7d\n", name.c_str(),
                  c.role.c_str(), c.mode3, c.mode4, c.mode5, c.kod, c.echo);
    out << line;
  }
  return out.str();
}

std::string render_json(const ScenarioSpec& spec, uint64_t seed, const RunResult& result) {
  using json = nlohmann::ordered_json;
  json root;
  root["schema_version"] = "1";
  root["scenario"] = spec.name;
  root["seed"] = seed;
  root["duration_s"] = spec.duration_s;

  const Verdict& v = result.verdict;
  json verdict;
  verdict["kind"] = v.kind;
  verdict["attack_succeeded"] = v.attack_succeeded;
  if (v.attack_start) {
    verdict["attack_window"] = {{"start_s", to_seconds(*v.attack_start)},
                                {"stop_s", to_seconds(*v.attack_stop)}};
  } else {
    verdict["attack_window"] = nullptr;
  }
  verdict["initial_sync_s"] = v.initial_sync ? json(to_seconds(*v.initial_sync)) : json(nullptr);
  json windows = json::array();
  for (const auto& w : v.desync_windows)
    windows.push_back({{"from_s", to_seconds(w.first)}, {"to_s", to_seconds(w.second)}});
  verdict["desync_windows"] = std::move(windows);
  verdict["resync_delay_after_stop_s"] =
      v.resync_delay_after_stop ? json(to_seconds(*v.resync_delay_after_stop)) : json(nullptr);
  verdict["calibration_attempts"] = v.calibration_attempts;
  verdict["failed_attempts"] = v.failed_attempts;
  verdict["probe_responses_in_window"] = v.probe_responses_in_window;
  verdict["probe_reference_constant"] = v.probe_reference_constant;
  json counts;
  for (const auto& [name, c] : v.counts) {
    counts[name] = {{"role", c.role}, {"mode3", c.mode3}, {"mode4", c.mode4},
                    {"mode5", c.mode5}, {"kod", c.kod},   {"echo", c.echo}};
  }
  verdict["counts"] = std::move(counts);
  root["verdict"] = std::move(verdict);

  json timeline = json::array();
  for (const auto& e : result.events) {
    timeline.push_back({{"t_s", to_seconds(e.t)},
                        {"actor", e.actor},
                        {"event", to_string(e.kind)},
                        {"detail", e.detail}});
  }
  root["timeline"] = std::move(timeline);
  return root.dump(2) + "\n";
}

}  // namespace ntpsim
