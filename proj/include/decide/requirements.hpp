#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "decide/protocol.hpp"

namespace decide::requirements {

enum class Axis { EnvTemp, InternalTemp, Pressure, CslLambda };

std::string_view to_string(Axis axis);
/// Accepts "env-temp", "internal-temp", "pressure", "csl-lambda".
Axis parse_axis(std::string_view name);
std::string_view axis_unit(Axis axis);

/// Scenario with the axis quantity replaced. InternalTemp drops any
/// bulk-absorption equilibrium; CslLambda enables CSL.
Scenario with_axis_value(const Scenario& scenario, Axis axis, double value);

/// The prediction an axis acts on: collapse visibility for CslLambda, quantum otherwise.
VisibilityKind forward_kind(Axis axis);

struct TracePoint {
  double lo;
  double hi;
  double value;
  double visibility;
};

struct RequirementResult {
  Axis axis;
  double critical_value;
  double threshold_used;
  std::pair<double, double> bracket;
  int iterations;
  double forward_check_residual;  ///< |V(critical_value) - threshold|
  double visibility_at_critical;
  std::vector<std::pair<double, double>> monotonicity_samples;  ///< (value, V)
  std::vector<TracePoint> trace;
};

/// Bisection on the axis for V = threshold. The threshold defaults to the
/// competing prediction: the collapse-model visibility for quantum axes and the
/// quantum visibility for CslLambda.
RequirementResult invert(const Scenario& scenario, Axis axis, std::optional<double> threshold,
                         std::pair<double, double> bracket);

/// Same with a precomputed preparation.
RequirementResult invert(const Scenario& scenario, const PreparedRun& prepared, Axis axis,
                         std::optional<double> threshold, std::pair<double, double> bracket);

struct ThrusterNoise {
  double force_noise;         ///< N / sqrt(Hz)
  double spacecraft_mass;     ///< kg
  double acceleration_noise;  ///< m s^-2 / sqrt(Hz)
  double quoted_bound;        ///< mission figure for 1 uN/sqrt(Hz) at 700 kg
  double relative_discrepancy;  ///< (quoted - computed) / computed
  bool discrepancy_flag;        ///< |relative_discrepancy| > 1%
};

inline constexpr double kQuotedAccelerationBound = 1.6e-9;

ThrusterNoise thruster_accel_noise(double force_noise, double spacecraft_mass);

}  // namespace decide::requirements
