#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "ntpsim/report.hpp"
#include "ntpsim/runner.hpp"
#include "ntpsim/scenario.hpp"

// Exit codes: 0 = ran clean (baseline or attack failed), 2 = the simulated
// attack succeeded, 1 = usage or scenario error.

int main(int argc, char** argv) {
  CLI::App app{"Discrete-event simulator for broadcast-mode NTP under attack"};
  app.require_subcommand(1);

  std::string run_path;
  std::string format = "text";
  std::string out_path;
  uint64_t seed_value = 0;
  auto* run = app.add_subcommand("run", "Run a scenario and report the outcome");
  run->add_option("scenario", run_path, "Scenario file (.scn)")->required();
  run->add_option("--format", format, "Report format: text or json")
      ->check(CLI::IsMember({"text", "json"}));
  auto* seed_opt = run->add_option("--seed", seed_value, "Override the scenario seed");
  run->add_option("--out", out_path, "Write the report to this file instead of stdout");

  std::string validate_path;
  auto* validate = app.add_subcommand("validate", "Parse and validate a scenario file");
  validate->add_option("scenario", validate_path, "Scenario file (.scn)")->required();

  CLI11_PARSE(app, argc, argv);

  if (validate->parsed()) {
    auto spec = ntpsim::load_scenario_file(validate_path);
    if (!spec.ok()) {
      std::cerr << "error: " << validate_path << ": " << spec.error << "\n";
      return 1;
    }
    std::cout << "ok: " << spec->hosts.size() << " hosts on " << spec->segments.size()
              << " segments, duration " << spec->duration_s << " s\n";
    return 0;
  }

  auto spec = ntpsim::load_scenario_file(run_path);
  if (!spec.ok()) {
    std::cerr << "error: " << run_path << ": " << spec.error << "\n";
    return 1;
  }

  // Seed precedence: --seed, then NTPSIM_SEED, then the scenario's own.
  uint64_t seed = spec->seed;
  if (const char* env = std::getenv("NTPSIM_SEED")) {
    char* end = nullptr;
    unsigned long long v = std::strtoull(env, &end, 10);
    if (end == env || *end != '\0') {
      std::cerr << "error: NTPSIM_SEED is not a number: " << env << "\n";
      return 1;
    }
    seed = v;
  }
  if (seed_opt->count() > 0) seed = seed_value;

  auto result = ntpsim::run_scenario(*spec, seed);
  if (!result.ok()) {
    std::cerr << "error: " << result.error << "\n";
    return 1;
  }

  std::string report = format == "json" ? ntpsim::render_json(*spec, seed, *result)
                                        : ntpsim::render_text(*spec, seed, *result);
  if (!out_path.empty()) {
    std::ofstream f(out_path, std::ios::binary);
    if (!f) {
      std::cerr << "error: cannot write " << out_path << "\n";
      return 1;
    }
    f << report;
  } else {
    std::cout << report;
  }
  return result->verdict.attack_succeeded ? 2 : 0;
}
