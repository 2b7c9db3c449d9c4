#pragma once

#include <json.hpp>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "decide/protocol.hpp"

namespace decide::io {

struct SweepSpec {
  std::string axis;
  std::vector<double> values;  ///< SI
  std::vector<std::string> columns;  ///< empty: all
};

struct LoadedScenario {
  Scenario scenario;
  /// Every field that was not present in the file, with the value used.
  nlohmann::json defaults;
  std::optional<SweepSpec> sweep;
};

/// Strict parse: unknown keys and missing required keys are InvalidInput
/// naming the dotted field path.
LoadedScenario parse_scenario(const nlohmann::json& doc);
LoadedScenario parse_scenario_text(std::string_view text);
/// Throws IoError when the file cannot be read.
LoadedScenario load_scenario(const std::string& path);

/// Fully resolved scenario in SI units.
nlohmann::json scenario_to_json(const Scenario& s);

}  // namespace decide::io
