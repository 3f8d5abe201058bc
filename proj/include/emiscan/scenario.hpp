#pragma once

#include <cstdint>
#include <string>

#include "emiscan/imaging.hpp"

namespace emiscan::scenario {

// Scenario files are JSON with explicit units in key names (side_mm,
// drive_freq_khz, ...). Unknown keys are rejected; missing keys take the
// documented defaults. See docs/scenario_format.md.
imaging::ScanScenario parse(const std::string& json_text);
imaging::ScanScenario load(const std::string& path);

// Canonical serialized form: fixed key order, SI values converted back to
// the unit-suffixed keys. parse(serialize(parse(x))) == parse(x).
std::string serialize(const imaging::ScanScenario& scenario);

// FNV-1a over the canonical serialization.
std::uint64_t hash(const imaging::ScanScenario& scenario);

imaging::ScanScenario default_scenario();

} // namespace emiscan::scenario
