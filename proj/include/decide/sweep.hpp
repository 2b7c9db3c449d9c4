#pragma once

#include <string>
#include <vector>

#include "decide/protocol.hpp"
#include "decide/scenario_io.hpp"

namespace decide::sweep {

/// Columns available after the axis column; "error" is always last.
const std::vector<std::string>& available_columns();

/// Scenario with the sweep axis set to `value` (SI).
Scenario apply_axis(const Scenario& scenario, const std::string& axis, double value);

/// True for axes that leave the prepared state and detection pattern unchanged.
bool axis_reuses_preparation(const std::string& axis);

/// One CSV row per value in input order. Per-point failures fill the error
/// column and leave the other cells empty. `jobs` workers evaluate points.
std::string run_sweep(const Scenario& scenario, const io::SweepSpec& spec, unsigned jobs = 1);

}  // namespace decide::sweep
