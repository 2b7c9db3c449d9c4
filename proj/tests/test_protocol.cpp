#include <doctest.h>

#include <cmath>

#include "decide/error.hpp"
#include "decide/protocol.hpp"
#include "fixture.hpp"
#include "oracles.hpp"

using namespace decide;

TEST_CASE("ideal run has unit visibility") {
  const auto r = run_protocol(fixture::scenario(fixture::ideal_json()));
  CHECK(std::abs(r.v_ideal - 1.0) < 1e-3);
  CHECK(std::abs(r.v_quantum - 1.0) < 1e-3);
  CHECK(std::abs(r.v_collapse - 1.0) < 1e-3);
  CHECK(r.decay_quantum == 1.0);
  CHECK(r.decay_collapse == 1.0);
  const double d = 2 * oracle::pi * oracle::hbar * 100.0 / (oracle::sphere_mass(100e-9, 2300.0) * 100e-9);
  CHECK(oracle::rel(r.pattern.nominal_spacing, d) < 1e-3);
  CHECK(oracle::rel(r.pattern.fringe_spacing, r.pattern.nominal_spacing) < 1e-3);
}

TEST_CASE("gas collisions alone scale the visibility by the survival probability") {
  auto j = fixture::ideal_json();
  j["environment"]["pressure"] = "1e-13 Pa";
  j["environment"]["channels"]["gas"] = true;
  const auto r = run_protocol(fixture::scenario(j));
  CHECK(r.gas.expected_events > 0.1);
  CHECK(r.decay_quantum == doctest::Approx(std::exp(-r.gas.expected_events)).epsilon(1e-12));
  CHECK(std::abs(r.v_quantum - r.gas.survival * r.v_ideal) < 1e-3);
}

TEST_CASE("budget exponents compose into the decay factors") {
  const auto r = run_protocol(fixture::baseline());
  double q = 0.0;
  for (const auto& e : r.budget.entries) q += e.exponent_t1 + e.exponent_t2;
  double c = 0.0;
  for (const auto& e : r.collapse_budget.entries) c += e.exponent_t1 + e.exponent_t2;
  CHECK(r.decay_quantum == doctest::Approx(std::exp(-q)).epsilon(1e-9));
  CHECK(r.decay_collapse == doctest::Approx(std::exp(-c)).epsilon(1e-9));
  CHECK(r.v_quantum < r.v_ideal);
  CHECK(r.v_combined <= std::min(r.v_quantum, r.v_collapse) + 1e-9);
  CHECK(r.threshold == r.v_collapse);
  CHECK(r.readout_blur == doctest::Approx(r.pattern.nominal_spacing / 10).epsilon(1e-9));
}

TEST_CASE("forward visibility reproduces the full run") {
  const Scenario s = fixture::baseline();
  const auto prepared = prepare_run(s);
  const auto r = run_protocol(s, prepared);
  CHECK(forward_visibility(s, prepared, VisibilityKind::Quantum) == doctest::Approx(r.v_quantum).epsilon(1e-12));
  CHECK(forward_visibility(s, prepared, VisibilityKind::Collapse) == doctest::Approx(r.v_collapse).epsilon(1e-12));
}

TEST_CASE("phase jitter multiplies the cross terms") {
  auto j = fixture::ideal_json();
  j["protocol"]["phase_jitter"] = "0.5 rad";
  const auto r = run_protocol(fixture::scenario(j));
  CHECK(r.jitter_factor == doctest::Approx(std::exp(-0.125)).epsilon(1e-14));
  CHECK(std::abs(r.v_combined - std::exp(-0.125)) < 1e-3);
}

TEST_CASE("scatter slit without fringes fails with the step named") {
  auto j = fixture::baseline_json();
  j["protocol"].erase("x2");
  j["protocol"]["method"] = "scatter_slit";
  j["protocol"]["scatter_slit"] = {{"waist", "20 nm"}};
  try {
    run_protocol(fixture::scenario(j));
    FAIL("expected a numerical error");
  } catch (const NumericalError& e) {
    CHECK(std::string(e.what()).find("step") != std::string::npos);
  }
  j["protocol"]["scatter_slit"]["power"] = "0 W";
  CHECK_THROWS_AS(run_protocol(fixture::scenario(j)), NumericalError);
}
