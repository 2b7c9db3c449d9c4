#include "decide/core.hpp"

#include <cmath>
#include <string>

#include "decide/error.hpp"
#include "decide/numfmt.hpp"

namespace decide {

using detail::require;

namespace {
bool finite(double v) { return std::isfinite(v); }
bool finite(complex v) { return std::isfinite(v.real()) && std::isfinite(v.imag()); }
}  // namespace

Particle::Particle(double radius, double density, complex eps_trap, complex eps_bb,
                   double internal_temperature)
    : radius_(radius),
      density_(density),
      eps_trap_(eps_trap),
      eps_bb_(eps_bb),
      internal_temperature_(internal_temperature) {
  require(finite(radius) && radius > 0.0 && radius <= kMaxRadius, "particle.radius",
          "must satisfy 0 < R <= 1.2e-7 m, got " + fmt_double(radius));
  require(finite(density) && density > 0.0, "particle.density", "must be > 0");
  require(finite(eps_trap) && eps_trap.imag() >= 0.0, "particle.eps_trap",
          "imaginary part must be >= 0");
  require(finite(eps_bb) && eps_bb.imag() >= 0.0, "particle.eps_bb",
          "imaginary part must be >= 0");
  require(finite(internal_temperature) && internal_temperature >= 0.0,
          "particle.internal_temperature", "must be >= 0 K");
}

Particle Particle::with_radius(double r) const {
  return {r, density_, eps_trap_, eps_bb_, internal_temperature_};
}
Particle Particle::with_density(double rho) const {
  return {radius_, rho, eps_trap_, eps_bb_, internal_temperature_};
}
Particle Particle::with_internal_temperature(double t) const {
  return {radius_, density_, eps_trap_, eps_bb_, t};
}

Environment::Environment(double temperature, double pressure, double gas_mass)
    : temperature_(temperature), pressure_(pressure), gas_mass_(gas_mass) {
  require(finite(temperature) && temperature > 0.0, "environment.temperature", "must be > 0 K");
  require(finite(pressure) && pressure >= 0.0, "environment.pressure", "must be >= 0 Pa");
  require(finite(gas_mass) && gas_mass > 0.0, "environment.gas_mass", "must be > 0 kg");
}

Environment Environment::with_temperature(double t) const { return {t, pressure_, gas_mass_}; }
Environment Environment::with_pressure(double p) const { return {temperature_, p, gas_mass_}; }

Trap::Trap(double omega, double wavelength, double intensity)
    : omega_(omega), wavelength_(wavelength), intensity_(intensity) {
  require(finite(omega) && omega > 0.0, "trap.omega", "must be > 0 rad/s");
  require(finite(wavelength) && wavelength > 0.0, "trap.wavelength", "must be > 0 m");
  require(finite(intensity) && intensity >= 0.0, "trap.intensity", "must be >= 0 W/m^2");
}

void X2Params::validate() const {
  require(finite(half_separation) && half_separation > 0.0, "protocol.x2.half_separation",
          "must be > 0");
  require(finite(sigma_m) && sigma_m > 0.0, "protocol.x2.sigma_m", "must be > 0");
  require(half_separation >= 2.0 * sigma_m, "protocol.x2.sigma_m",
          "peaks not separated: need X >= 2 sigma_m");
}

void ScatterSlitParams::validate() const {
  require(finite(waist) && waist > 0.0, "protocol.scatter_slit.waist", "must be > 0");
  require(finite(wavelength) && wavelength > 0.0 && wavelength <= kMaxWavelength,
          "protocol.scatter_slit.wavelength", "must satisfy 0 < lambda <= 40 nm");
  require(finite(power) && power >= 0.0, "protocol.scatter_slit.power", "must be >= 0");
  require(finite(duration) && duration >= 0.0, "protocol.scatter_slit.duration",
          "must be >= 0");
  if (cross_section) {
    require(finite(*cross_section) && *cross_section >= 0.0,
            "protocol.scatter_slit.cross_section", "must be >= 0");
  }
}

Protocol::Protocol(double t1, double t2, double delta_x, Method method, double phase_jitter,
                   SeparationPathMode path)
    : t1_(t1),
      t2_(t2),
      delta_x_(delta_x),
      method_(std::move(method)),
      phase_jitter_(phase_jitter),
      path_(path) {
  require(finite(t1) && t1 > 0.0, "protocol.t1", "must be > 0 s");
  require(finite(t2) && t2 > t1, "protocol.t2", "must exceed t1");
  require(finite(delta_x) && delta_x > 0.0, "protocol.delta_x", "must be > 0 m");
  require(finite(phase_jitter) && phase_jitter >= 0.0, "protocol.phase_jitter",
          "must be >= 0 rad");
  std::visit([](const auto& p) { p.validate(); }, method_);
  if (const auto* x2 = std::get_if<X2Params>(&method_)) {
    require(std::abs(2.0 * x2->half_separation - delta_x) <= 1e-12 * delta_x,
            "protocol.x2.half_separation", "must equal delta_x / 2");
  }
}

Protocol Protocol::with_t2(double t2) const {
  return {t1_, t2, delta_x_, method_, phase_jitter_, path_};
}

Protocol Protocol::with_delta_x(double dx) const {
  Method m = method_;
  if (auto* x2 = std::get_if<X2Params>(&m)) x2->half_separation = 0.5 * dx;
  return {t1_, t2_, dx, m, phase_jitter_, path_};
}

double particle_mass(const Particle& particle) {
  const double r = particle.radius();
  return 4.0 / 3.0 * kPi * r * r * r * particle.density();
}

double thermal_wavelength(double temperature) {
  require(std::isfinite(temperature) && temperature > 0.0, "temperature", "must be > 0 K");
  return kConstants.hbar * kConstants.c / (kConstants.k_B * temperature);
}

}  // namespace decide
