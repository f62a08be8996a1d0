#pragma once

#include <string>

#include "ntpsim/runner.hpp"
#include "ntpsim/scenario.hpp"

namespace ntpsim {

// Human-readable run log: header, one line per timeline event
// ("H:MM:SS actor event detail"), then the verdict and a counts table.
std::string render_text(const ScenarioSpec& spec, uint64_t seed, const RunResult& result);

// Machine-readable form. Deterministic inputs yield byte-identical output.
std::string render_json(const ScenarioSpec& spec, uint64_t seed, const RunResult& result);

}  // namespace ntpsim
