#include <doctest.h>

#include <cmath>

#include "decide/error.hpp"
#include "decide/requirements.hpp"
#include "fixture.hpp"

using namespace decide;
using namespace decide::requirements;

TEST_CASE("thruster noise conversion") {
  const auto t = thruster_accel_noise(1e-6, 700.0);
  CHECK(std::abs(t.acceleration_noise - 1e-6 / 700.0) < 1e-24);
  // 1e-6 / 700 = 1.4286e-9, quoted to three figures as 1.43e-9.
  CHECK(std::abs(std::round(t.acceleration_noise * 1e11) / 1e11 - 1.43e-9) < 1e-15);
  CHECK(t.quoted_bound == 1.6e-9);
  CHECK(t.discrepancy_flag);
  CHECK(t.relative_discrepancy == doctest::Approx(1.6e-9 * 700.0 / 1e-6 - 1.0).epsilon(1e-12));
  CHECK_FALSE(thruster_accel_noise(1.12e-6, 700.0).discrepancy_flag);
  CHECK_THROWS_AS(thruster_accel_noise(1e-6, 0.0), InvalidInput);
}

TEST_CASE("axis names") {
  for (auto a : {Axis::EnvTemp, Axis::InternalTemp, Axis::Pressure, Axis::CslLambda}) {
    CHECK(parse_axis(to_string(a)) == a);
  }
  CHECK_THROWS_AS(parse_axis("radius"), InvalidInput);
  CHECK(forward_kind(Axis::CslLambda) == VisibilityKind::Collapse);
  CHECK(forward_kind(Axis::EnvTemp) == VisibilityKind::Quantum);
}

TEST_CASE("axis substitution is idempotent") {
  const Scenario s = fixture::baseline();
  const auto once = with_axis_value(s, Axis::Pressure, 3e-14);
  const auto twice = with_axis_value(once, Axis::Pressure, 3e-14);
  CHECK(twice.environment.pressure() == once.environment.pressure());
  CHECK(with_axis_value(s, Axis::CslLambda, 1e-17).collapse.csl_enabled);
  CHECK(with_axis_value(s, Axis::InternalTemp, 20.0).particle.internal_temperature() == 20.0);
}

TEST_CASE("gas-limited pressure requirement matches the closed form") {
  // Only gas collisions act, so V(p) = exp(-rate(p) t) V_ideal with rate linear in p.
  auto j = fixture::ideal_json();
  j["environment"]["channels"]["gas"] = true;
  const Scenario s = fixture::scenario(j);
  const auto prepared = prepare_run(s);
  const auto base = run_protocol(with_axis_value(s, Axis::Pressure, 1e-13), prepared);
  const double threshold = 0.5;
  const double events_per_pa = base.gas.expected_events / 1e-13;
  const double expected = std::log(base.v_ideal / threshold) / events_per_pa;

  const auto r = invert(s, prepared, Axis::Pressure, threshold, {1e-14, 1e-11});
  CHECK(r.forward_check_residual < 1e-3);
  CHECK(std::abs(r.critical_value / expected - 1.0) < 2e-3);
  CHECK(r.threshold_used == threshold);
  for (std::size_t i = 1; i < r.monotonicity_samples.size(); ++i) {
    CHECK(r.monotonicity_samples[i].second <= r.monotonicity_samples[i - 1].second);
  }

  // The same requirement reached from a different bracket.
  const auto again = invert(s, prepared, Axis::Pressure, threshold, {1e-13, 5e-12});
  CHECK(std::abs(again.critical_value / r.critical_value - 1.0) < 2e-3);

  try {
    invert(s, prepared, Axis::Pressure, threshold, {1e-14, 2e-14});
    FAIL("expected a straddle error");
  } catch (const InvalidInput& e) {
    CHECK(e.field() == "bracket");
    CHECK(e.message().find("straddle") != std::string::npos);
  }
}

TEST_CASE("environment temperature requirement on the baseline") {
  const Scenario s = fixture::baseline();
  const auto r = invert(s, Axis::EnvTemp, std::nullopt, {5.0, 40.0});
  CHECK(r.critical_value > 10.0);
  CHECK(r.critical_value < 30.0);
  CHECK(r.forward_check_residual < 1e-3);
  const auto prepared = prepare_run(s);
  try {
    // V(T) peaks near 8 K: gas collisions win below, blackbody absorption above.
    invert(s, prepared, Axis::EnvTemp, 0.79, {4.0, 12.0});
    FAIL("expected a monotonicity error");
  } catch (const InvalidInput& e) {
    CHECK(e.field() == "bracket");
    CHECK(e.message().find("not monotone") != std::string::npos);
  }
  const auto at = run_protocol(with_axis_value(s, Axis::EnvTemp, r.critical_value), prepared);
  CHECK(std::abs(at.v_quantum - r.threshold_used) < 1e-3);
  CHECK(r.threshold_used == doctest::Approx(at.v_collapse).epsilon(1e-12));
}
