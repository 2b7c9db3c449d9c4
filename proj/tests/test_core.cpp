#include <doctest.h>

#include "decide/core.hpp"
#include "decide/error.hpp"
#include "oracles.hpp"

using namespace decide;

namespace {
Particle silica(double r) { return {r, 2300.0, {2.1, 0.0}, {2.1, 0.57}, 12.0}; }

template <class F>
std::string rejected_field(F&& f) {
  try {
    f();
  } catch (const InvalidInput& e) {
    return e.field();
  }
  return "";
}
}  // namespace

TEST_CASE("particle mass of a 120 nm silica sphere") {
  const double m = particle_mass(silica(120e-9));
  CHECK(oracle::rel(m, oracle::sphere_mass(120e-9, 2300.0)) < 1e-14);
  CHECK(oracle::rel(m, 1.664e-17) < 1e-3);
}

TEST_CASE("particle mass scaling") {
  CHECK(particle_mass(silica(100e-9)) / particle_mass(silica(50e-9)) == doctest::Approx(8.0).epsilon(1e-15));
  const Particle p = silica(100e-9);
  CHECK(particle_mass(p.with_density(4600.0)) / particle_mass(p) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(particle_mass(silica(1e-12)) < 1e-32);
}

TEST_CASE("thermal wavelength") {
  CHECK(oracle::rel(thermal_wavelength(16.0), oracle::hbar * oracle::c / (oracle::kB * 16.0)) < 1e-14);
  CHECK(oracle::rel(thermal_wavelength(16.0), 1.43e-4) < 5e-3);
  CHECK(oracle::rel(thermal_wavelength(300.0), 7.6e-6) < 5e-3);
  CHECK(thermal_wavelength(8.0) / thermal_wavelength(16.0) == doctest::Approx(2.0).epsilon(1e-15));
  const double ref = thermal_wavelength(1.0);
  for (double t : {0.01, 3.7, 16.0, 300.0, 1e4}) {
    CHECK(oracle::rel(thermal_wavelength(t) * t, ref) < 1e-12);
  }
  CHECK_THROWS_AS(thermal_wavelength(0.0), InvalidInput);
  CHECK_THROWS_AS(thermal_wavelength(-1.0), InvalidInput);
}

TEST_CASE("invalid construction names the field") {
  CHECK(rejected_field([] { silica(-1e-9); }) == "particle.radius");
  CHECK(rejected_field([] { silica(200e-9); }) == "particle.radius");
  CHECK(rejected_field([] { Particle(1e-7, 0.0, 2.1, 2.1, 1.0); }) == "particle.density");
  CHECK(rejected_field([] { Particle(1e-7, 2300, {2.1, -0.1}, 2.1, 1.0); }) == "particle.eps_trap");
  CHECK(rejected_field([] { Particle(1e-7, 2300, 2.1, 2.1, -1.0); }) == "particle.internal_temperature");
  CHECK(rejected_field([] { Environment(0.0, 1e-13, 2 * oracle::amu); }) == "environment.temperature");
  CHECK(rejected_field([] { Environment(16.0, -1.0, 2 * oracle::amu); }) == "environment.pressure");
  CHECK(rejected_field([] { Trap(0.0, 1064e-9, 1e9); }) == "trap.omega");
  CHECK(rejected_field([] { X2Params{1e-9, 1e-9}.validate(); }) == "protocol.x2.sigma_m");
  CHECK(rejected_field([] {
          ScatterSlitParams{20e-9, 50e-9, 1e-15, 1e-9, {}, LocalizedWidth::BeamWaist}.validate();
        }) == "protocol.scatter_slit.wavelength");
  CHECK(rejected_field([] { Protocol(-1.0, 100.0, 1e-7, X2Params{5e-8, 5e-12}); }) == "protocol.t1");
}

TEST_CASE("clausius mossotti factor") {
  const complex cm = clausius_mossotti({2.1, 0.57});
  const complex ref = (complex(2.1, 0.57) - 1.0) / (complex(2.1, 0.57) + 2.0);
  CHECK(std::abs(cm - ref) < 1e-15);
  CHECK(clausius_mossotti(1.0) == complex(0.0));
}
