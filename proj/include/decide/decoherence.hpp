#pragma once

#include <functional>
#include <limits>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "decide/core.hpp"

namespace decide::decoherence {

enum class ChannelName { BBScatter, BBAbsorb, BBEmit, Gas, CSL, DP, K };

std::string_view to_string(ChannelName name);

/// Off-diagonal decay at separation s proceeds at min(Lambda s^2, gamma_sat).
struct LocalizationChannel {
  ChannelName name;
  double Lambda;     ///< m^-2 s^-1
  double gamma_sat;  ///< s^-1

  double rate(double separation) const;
};

LocalizationChannel bb_scatter(const Particle& particle, double temperature);
LocalizationChannel bb_absorb(const Particle& particle, double temperature);
/// Thermal emission at the particle's internal temperature.
LocalizationChannel bb_emit(const Particle& particle);

struct GasCollisions {
  double rate;             ///< s^-1
  double expected_events;  ///< over run_time
  double survival;         ///< exp(-expected_events)
};

/// Every collision counts as a full which-path measurement.
GasCollisions gas_collisions(const Particle& particle, const Environment& env, double run_time);

/// Thermally emitted power of the sphere at temperature T, W.
double emitted_power(const Particle& particle, double temperature);

/// Im(eps) at the trap wavelength implied by a bulk absorption coefficient a (1/m):
/// Im eps = n_r a lambda / (2 pi), n_r = Re sqrt(eps_trap).
double absorbing_imag_eps(complex eps_trap, double bulk_absorption, double wavelength);

/// Dipole absorption cross-section 4 pi k R^3 Im[(eps - 1) / (eps + 2)].
double absorption_cross_section(double radius, complex eps, double wavelength);

struct InternalTemperature {
  double temperature;       ///< K
  double absorbed_power;    ///< W
  double imag_eps_trap;     ///< Im eps used for the trap-light absorption
  double residual;          ///< |P_abs - P_em(T_i) + P_em(T_env)| / P_abs (0 when P_abs == 0)
  std::pair<double, double> bracket;
  int iterations;
};

/// Solves I sigma_abs(lambda_trap) = P_em(T_i) - P_em(T_env) for T_i.
InternalTemperature internal_temperature_equilibrium(const Particle& particle, const Trap& trap,
                                                     double env_temperature,
                                                     double bulk_absorption);

/// Branch separation as a piecewise-linear function of time. Repeated knot
/// times encode jumps (e.g. the slit opening at t1); the value at a jump is the
/// right-hand limit.
class SeparationPath {
 public:
  struct Knot {
    double t;
    double dx;
  };

  explicit SeparationPath(std::vector<Knot> knots);

  /// Zero during [0, t1], constant dx during (t1, t1 + t2].
  static SeparationPath nominal(double t1, double t2, double dx);
  /// Zero during [0, t1], then dx + v (t - t1): the distance between free branch centers.
  static SeparationPath linear(double t1, double t2, double dx, double relative_velocity);

  double at(double t) const;
  double start() const { return knots_.front().t; }
  double end() const { return knots_.back().t; }
  double max_separation() const;
  const std::vector<Knot>& knots() const { return knots_; }

 private:
  std::vector<Knot> knots_;
};

using RateFunction = std::function<double(double separation)>;

/// integral over [from, to] of rate(path(t)) dt. Piecewise adaptive
/// quadrature; constant segments are evaluated exactly.
double integrated_exponent(const SeparationPath& path, const RateFunction& rate, double from,
                           double to);

struct DecayResult {
  double factor;    ///< in [0, 1]
  double exponent;  ///< -log(factor)
  std::vector<std::string> warnings;
};

/// exp(-integral_0^duration sum_ch min(Lambda_ch dx(t)^2, gamma_ch) dt). Emits a
/// long-wavelength validity warning when max dx exceeds thermal_length / 10.
DecayResult visibility_decay(const SeparationPath& path,
                             const std::vector<LocalizationChannel>& channels, double duration,
                             double thermal_length = std::numeric_limits<double>::infinity());

struct BudgetEntry {
  ChannelName name;
  double Lambda;
  double gamma_sat;
  double exponent_t1;
  double exponent_t2;
};

struct DecoherenceBudget {
  std::vector<BudgetEntry> entries;
  double total_t1 = 0.0;
  double total_t2 = 0.0;

  double factor() const;
  void add(const BudgetEntry& e);
};

/// Budget over the windows [0, t1] and [t1, t1 + t2] of the path.
DecoherenceBudget make_budget(const std::vector<LocalizationChannel>& channels,
                              const SeparationPath& path, double t1, double t2);

}  // namespace decide::decoherence
