#include "decide/requirements.hpp"

#include <cmath>

#include "decide/error.hpp"
#include "decide/numfmt.hpp"

namespace decide::requirements {

using detail::require;

namespace {

constexpr double kAxisTolerance = 1e-4;
constexpr double kForwardTolerance = 1e-3;
constexpr int kMonotoneSamples = 5;

bool log_axis(Axis axis, double lo) {
  return (axis == Axis::Pressure || axis == Axis::CslLambda) && lo > 0.0;
}

double interpolate(Axis axis, double lo, double hi, double f) {
  if (log_axis(axis, lo)) return std::exp(std::log(lo) + f * (std::log(hi) - std::log(lo)));
  return lo + f * (hi - lo);
}

std::string pair_text(double a, double b) { return "[" + fmt_double(a) + ", " + fmt_double(b) + "]"; }

}  // namespace

std::string_view to_string(Axis axis) {
  switch (axis) {
    case Axis::EnvTemp: return "env-temp";
    case Axis::InternalTemp: return "internal-temp";
    case Axis::Pressure: return "pressure";
    case Axis::CslLambda: return "csl-lambda";
  }
  return "unknown";
}

Axis parse_axis(std::string_view name) {
  for (Axis a : {Axis::EnvTemp, Axis::InternalTemp, Axis::Pressure, Axis::CslLambda}) {
    if (name == to_string(a)) return a;
  }
  throw InvalidInput("axis", "unknown axis '" + std::string(name) +
                                 "' (expected env-temp, internal-temp, pressure, csl-lambda)");
}

std::string_view axis_unit(Axis axis) {
  switch (axis) {
    case Axis::EnvTemp:
    case Axis::InternalTemp: return "K";
    case Axis::Pressure: return "Pa";
    case Axis::CslLambda: return "1/s";
  }
  return "";
}

Scenario with_axis_value(const Scenario& scenario, Axis axis, double value) {
  Scenario s = scenario;
  switch (axis) {
    case Axis::EnvTemp:
      s.environment = s.environment.with_temperature(value);
      break;
    case Axis::InternalTemp:
      s.particle = s.particle.with_internal_temperature(value);
      s.bulk_absorption.reset();
      break;
    case Axis::Pressure:
      s.environment = s.environment.with_pressure(value);
      break;
    case Axis::CslLambda:
      s.collapse.csl_enabled = true;
      s.collapse.csl_lambda = value;
      s.collapse.validate();
      break;
  }
  return s;
}

VisibilityKind forward_kind(Axis axis) {
  return axis == Axis::CslLambda ? VisibilityKind::Collapse : VisibilityKind::Quantum;
}

RequirementResult invert(const Scenario& scenario, Axis axis, std::optional<double> threshold,
                         std::pair<double, double> bracket) {
  return invert(scenario, prepare_run(scenario), axis, threshold, bracket);
}

RequirementResult invert(const Scenario& scenario, const PreparedRun& prepared, Axis axis,
                         std::optional<double> threshold, std::pair<double, double> bracket) {
  auto [lo, hi] = bracket;
  require(std::isfinite(lo) && std::isfinite(hi) && hi > lo, "bracket", "requires lo < hi");
  require(lo >= 0.0, "bracket", "axis values must be >= 0");
  if (axis == Axis::EnvTemp) require(lo > 0.0, "bracket", "environment temperature must be > 0");

  const VisibilityKind kind = forward_kind(axis);
  const auto forward = [&](double v) {
    return forward_visibility(with_axis_value(scenario, axis, v), prepared, kind);
  };

  RequirementResult out{};
  out.axis = axis;
  out.bracket = bracket;
  if (threshold) {
    out.threshold_used = *threshold;
  } else {
    const auto base = run_protocol(scenario, prepared);
    out.threshold_used = kind == VisibilityKind::Quantum ? base.v_collapse : base.v_quantum;
  }
  const double thr = out.threshold_used;
  require(std::isfinite(thr) && thr > 0.0 && thr < 1.0, "threshold", "must lie in (0, 1)");

  // Monotonicity pre-check on 5 points spanning the bracket.
  int rising = 0;
  int falling = 0;
  for (int i = 0; i < kMonotoneSamples; ++i) {
    const double v = interpolate(axis, lo, hi, static_cast<double>(i) / (kMonotoneSamples - 1));
    out.monotonicity_samples.emplace_back(v, forward(v));
    if (i > 0) {
      const double d = out.monotonicity_samples[i].second - out.monotonicity_samples[i - 1].second;
      if (d > 1e-12) ++rising;
      if (d < -1e-12) ++falling;
    }
  }
  if (rising > 0 && falling > 0) {
    std::string detail;
    for (const auto& [v, vis] : out.monotonicity_samples) {
      detail += " V(" + fmt_double(v) + ")=" + fmt_double(vis);
    }
    throw InvalidInput("bracket", "forward visibility is not monotone over " + pair_text(lo, hi) +
                                      ":" + detail);
  }
  double f_lo = out.monotonicity_samples.front().second - thr;
  const double f_hi = out.monotonicity_samples.back().second - thr;
  if (f_lo * f_hi > 0.0) {
    throw InvalidInput("bracket", "does not straddle the threshold " + fmt_double(thr) + ": V(" +
                                      fmt_double(lo) + ") = " + fmt_double(f_lo + thr) + ", V(" +
                                      fmt_double(hi) + ") = " + fmt_double(f_hi + thr));
  }

  int it = 0;
  while (it < 200) {
    const double mid = log_axis(axis, lo) ? std::sqrt(lo * hi) : 0.5 * (lo + hi);
    if (hi - lo <= kAxisTolerance * mid) break;
    const double v = forward(mid);
    out.trace.push_back({lo, hi, mid, v});
    if ((v - thr) * f_lo > 0.0) {
      lo = mid;
      f_lo = v - thr;
    } else {
      hi = mid;
    }
    ++it;
  }
  out.iterations = it;
  out.critical_value = log_axis(axis, lo) ? std::sqrt(lo * hi) : 0.5 * (lo + hi);
  out.visibility_at_critical = forward(out.critical_value);
  out.forward_check_residual = std::abs(out.visibility_at_critical - thr);
  if (!(out.forward_check_residual < kForwardTolerance)) {
    throw NumericalError("inversion re-check failed: |V - threshold| = " +
                         fmt_double(out.forward_check_residual) + " at " +
                         fmt_double(out.critical_value));
  }
  return out;
}

ThrusterNoise thruster_accel_noise(double force_noise, double spacecraft_mass) {
  require(std::isfinite(force_noise) && force_noise >= 0.0, "force_noise", "must be >= 0");
  require(std::isfinite(spacecraft_mass) && spacecraft_mass > 0.0, "spacecraft_mass",
          "must be > 0 kg");
  ThrusterNoise out{};
  out.force_noise = force_noise;
  out.spacecraft_mass = spacecraft_mass;
  out.acceleration_noise = force_noise / spacecraft_mass;
  out.quoted_bound = kQuotedAccelerationBound;
  out.relative_discrepancy = out.acceleration_noise > 0.0
                                 ? (out.quoted_bound - out.acceleration_noise) / out.acceleration_noise
                                 : 0.0;
  out.discrepancy_flag = std::abs(out.relative_discrepancy) > 0.01;
  return out;
}

}  // namespace decide::requirements
