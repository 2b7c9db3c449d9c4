#pragma once

#include <optional>
#include <vector>

#include "decide/core.hpp"
#include "decide/decoherence.hpp"

namespace decide::collapse {

struct CollapseParams {
  bool csl_enabled = false;
  double csl_lambda = 1e-16;  ///< s^-1
  double csl_rc = 1e-7;       ///< m
  bool dp_enabled = true;
  /// Radius of the uniform mass distribution used to regularize DP; default R.
  std::optional<double> dp_cutoff;
  bool k_enabled = true;

  void validate() const;
};

/// CSL off-diagonal decay rate at separation dx for a uniform sphere.
double csl_rate(const Particle& particle, double dx, const CollapseParams& params);
/// lim dx->0 of csl_rate / dx^2.
double csl_small_dx_coefficient(const Particle& particle, const CollapseParams& params);
/// lim dx->inf of csl_rate.
double csl_plateau(const Particle& particle, const CollapseParams& params);

/// Mutual gravitational energy U(d) of two uniform spheres (mass m, radius a),
/// by a radial shell integral for d < 2a and -G m^2 / d beyond.
double sphere_interaction_energy(double mass, double radius, double d);
/// Same for every d through the shell integral; used to cross-check the two regimes.
double sphere_interaction_energy_shell(double mass, double radius, double d);

/// (U(0) - U(dx)) / hbar.
double dp_rate(const Particle& particle, double dx, const CollapseParams& params);
double dp_plateau(const Particle& particle, const CollapseParams& params);

struct KRate {
  double a_c;   ///< coherence-cell length, m
  double rate;  ///< s^-1
};

/// a_c = (hbar^2 / G)^(1/3) R^(2/3) / m; rate = hbar / (m a_c^2) min(1, (dx / a_c)^2).
KRate k_rate(const Particle& particle, double dx);

struct CollapseDecay {
  double factor;
  double csl_exponent;
  double dp_exponent;
  double k_exponent;
};

/// exp(-integral_0^duration sum_enabled Gamma(dx(t)) dt).
CollapseDecay collapse_visibility(const CollapseParams& params, const Particle& particle,
                                  const decoherence::SeparationPath& path, double duration);

/// Budget rows for the enabled models over [0, t1] and [t1, t1 + t2]; Lambda is
/// the small-separation coefficient and gamma_sat the large-separation plateau.
std::vector<decoherence::BudgetEntry> collapse_entries(const CollapseParams& params,
                                                       const Particle& particle,
                                                       const decoherence::SeparationPath& path,
                                                       double t1, double t2);

}  // namespace decide::collapse
