#pragma once

#include <fstream>
#include <json.hpp>
#include <sstream>
#include <string>

#include "decide/scenario_io.hpp"

namespace fixture {

inline nlohmann::json baseline_json() {
  std::ifstream in(std::string(DECIDE_SOURCE_DIR) + "/scenarios/baseline.json");
  std::ostringstream ss;
  ss << in.rdbuf();
  return nlohmann::json::parse(ss.str());
}

inline decide::Scenario scenario(const nlohmann::json& doc) {
  return decide::io::parse_scenario(doc).scenario;
}

inline decide::Scenario baseline() { return scenario(baseline_json()); }

/// Baseline with every decoherence channel and collapse model off and no readout blur.
inline nlohmann::json ideal_json() {
  auto j = baseline_json();
  j["environment"]["channels"] = {
      {"bb_scatter", false}, {"bb_absorb", false}, {"bb_emit", false}, {"gas", false}};
  j["collapse"] = {{"csl", {{"enabled", false}}}, {"dp", {{"enabled", false}}}, {"k", {{"enabled", false}}}};
  j["detection"] = {{"readout_blur", "0 m"}};
  return j;
}

}  // namespace fixture
