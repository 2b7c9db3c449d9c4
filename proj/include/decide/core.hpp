#pragma once

#include <complex>
#include <optional>
#include <variant>

namespace decide {

using complex = std::complex<double>;

/// CODATA 2018 exact and recommended values, SI units.
struct Constants {
  double hbar;  ///< J s
  double k_B;   ///< J/K
  double c;     ///< m/s
  double G;     ///< m^3/(kg s^2)
  double amu;   ///< kg
};

inline constexpr Constants kConstants{
    1.054571817e-34,
    1.380649e-23,
    299792458.0,
    6.67430e-11,
    1.66053906660e-27,
};

inline constexpr double kPi = 3.14159265358979323846;

/// Dielectric nanosphere. All fields SI.
class Particle {
 public:
  static constexpr double kMaxRadius = 1.2e-7;

  Particle(double radius, double density, complex eps_trap, complex eps_bb,
           double internal_temperature);

  double radius() const { return radius_; }
  double density() const { return density_; }
  complex eps_trap() const { return eps_trap_; }
  complex eps_bb() const { return eps_bb_; }
  double internal_temperature() const { return internal_temperature_; }

  Particle with_radius(double r) const;
  Particle with_density(double rho) const;
  Particle with_internal_temperature(double t) const;

 private:
  double radius_;
  double density_;
  complex eps_trap_;
  complex eps_bb_;
  double internal_temperature_;
};

class Environment {
 public:
  Environment(double temperature, double pressure, double gas_mass);

  double temperature() const { return temperature_; }
  double pressure() const { return pressure_; }
  double gas_mass() const { return gas_mass_; }

  Environment with_temperature(double t) const;
  Environment with_pressure(double p) const;

 private:
  double temperature_;
  double pressure_;
  double gas_mass_;
};

class Trap {
 public:
  Trap(double omega, double wavelength, double intensity);

  double omega() const { return omega_; }
  double wavelength() const { return wavelength_; }
  double intensity() const { return intensity_; }

 private:
  double omega_;
  double wavelength_;
  double intensity_;
};

/// Post-selection on a squared-position measurement.
struct X2Params {
  double half_separation;  ///< X: branch centers at +-X, m
  double sigma_m;          ///< measurement resolution, m

  /// Scenario-level check: X > 0, sigma_m > 0, X >= 2 sigma_m.
  void validate() const;
};

enum class LocalizedWidth { BeamWaist, Wavelength };

/// Local-decoherence slit: a weak focused short-wavelength beam at the packet center.
struct ScatterSlitParams {
  static constexpr double kMaxWavelength = 4e-8;

  double waist;       ///< 1/e^2 intensity radius, m
  double wavelength;  ///< m
  double power;       ///< W
  double duration;    ///< s
  std::optional<double> cross_section;  ///< overrides the Rayleigh estimate, m^2
  LocalizedWidth localized_width = LocalizedWidth::BeamWaist;

  void validate() const;
};

enum class SeparationPathMode {
  Nominal,  ///< zero during t1, constant slit separation during t2
  Tracked,  ///< zero during t1, closed-form branch-center distance during t2
};

class Protocol {
 public:
  using Method = std::variant<X2Params, ScatterSlitParams>;

  Protocol(double t1, double t2, double delta_x, Method method, double phase_jitter = 0.0,
           SeparationPathMode path = SeparationPathMode::Nominal);

  double t1() const { return t1_; }
  double t2() const { return t2_; }
  double delta_x() const { return delta_x_; }
  const Method& method() const { return method_; }
  bool is_x2() const { return std::holds_alternative<X2Params>(method_); }
  double phase_jitter() const { return phase_jitter_; }
  SeparationPathMode separation_path() const { return path_; }

  Protocol with_t2(double t2) const;
  Protocol with_delta_x(double dx) const;

 private:
  double t1_;
  double t2_;
  double delta_x_;
  Method method_;
  double phase_jitter_;
  SeparationPathMode path_;
};

/// (4/3) pi R^3 rho.
double particle_mass(const Particle& particle);

/// hbar c / (k_B T): characteristic blackbody wavelength scale.
double thermal_wavelength(double temperature);

/// Clausius-Mossotti factor (eps - 1) / (eps + 2).
inline complex clausius_mossotti(complex eps) { return (eps - 1.0) / (eps + 2.0); }

}  // namespace decide
