#pragma once

#include <optional>
#include <string>
#include <vector>

#include "decide/core.hpp"
#include "decide/gridprop.hpp"
#include "decide/wavepacket.hpp"

namespace decide::prepare {

struct X2Result {
  wavepacket::BranchEnsemble state;
  double success_weight;  ///< ||K psi||^2 / ||psi||^2 of the post-selected projection
  double branch_overlap;  ///< |<b+|b->| of the individually normalized branches
  std::vector<std::string> warnings;
};

/// Multiplies the input by the sign-blind double-Gaussian kernel
/// exp(-(x - X)^2 / (4 sm^2)) + exp(-(x + X)^2 / (4 sm^2)) and renormalizes.
/// Accepts X >= 0; X == 0 collapses to a single branch.
X2Result prepare_x2(const wavepacket::GaussianBranch& input, const X2Params& params);

/// The no-scatter (notched) wavefunction on a grid, split into two lobes by a
/// smooth partition of unity centered on the beam. The stored lobes have the
/// input's quadratic phase removed; `chirp_time` restores it analytically during
/// propagation (see gridprop::propagate_chirped). chirp_time == 0 means no chirp.
struct NotchedState {
  gridprop::GridState left;
  gridprop::GridState right;
  double chirp_time;
  double weight;
};

struct ScatterSlitResult {
  /// Localized component (weight p_s) plus the two-lobe branch fit of the
  /// notched component (weight 1 - p_s).
  wavepacket::BranchEnsemble state;
  /// Grid representation of the notched component; empty when p_s == 0.
  std::optional<NotchedState> notched;
  double p_peak;
  double p_scatter;
  double cross_section;  ///< m^2
  bool rayleigh_valid;
  double lobe_separation;  ///< distance between the fitted lobe centers, m
  std::vector<std::string> warnings;
};

/// Photon flux times cross-section over the beam area pi w^2 / 2, times duration.
double scatter_peak_probability(const ScatterSlitParams& params, double cross_section);

/// (8 pi / 3) k^4 R^6 |(eps - 1) / (eps + 2)|^2 with eps taken from the trap band.
double rayleigh_cross_section(const Particle& particle, double wavelength);

ScatterSlitResult prepare_scatter_slit(const wavepacket::GaussianBranch& input,
                                       const ScatterSlitParams& params, const Particle& particle,
                                       double mass);

/// Ensemble-averaged coherence left by a Gaussian relative-phase jitter: exp(-sigma^2 / 2).
double phase_jitter_factor(double sigma_phi);

}  // namespace decide::prepare
