#pragma once

#include <optional>
#include <string>
#include <vector>

#include "decide/collapse.hpp"
#include "decide/core.hpp"
#include "decide/decoherence.hpp"
#include "decide/interference.hpp"

namespace decide {

/// Which standard-decoherence channels enter the quantum prediction.
struct ChannelToggles {
  bool bb_scatter = true;
  bool bb_absorb = true;
  bool bb_emit = true;
  bool gas = true;
};

struct DetectionSettings {
  /// Gaussian readout blur, m; default is a tenth of the nominal fringe spacing.
  std::optional<double> readout_blur;
  std::size_t samples_per_fringe = 16;
  /// Default: the collapse-model visibility of the same scenario.
  std::optional<double> visibility_threshold;
  std::optional<interference::MonteCarloOptions> monte_carlo;
};

struct Scenario {
  Particle particle;
  Environment environment;
  Trap trap;
  Protocol protocol;
  collapse::CollapseParams collapse;
  DetectionSettings detection;
  ChannelToggles channels;
  /// When set, the internal temperature is the trap-heating equilibrium for this
  /// bulk absorption coefficient (1/m) and particle.internal_temperature is ignored.
  std::optional<double> bulk_absorption;
};

/// Everything up to (not including) decoherence: prepared state and its
/// coherence-independent pattern terms at detection.
struct PreparedRun {
  double mass;
  double nominal_spacing;     ///< 2 pi hbar t2 / (m dx_eff)
  double slit_separation;     ///< dx_eff: the separation that enters decoherence
  double relative_velocity;   ///< of the dominant branch pair after preparation, m/s
  double success_weight;      ///< x2 post-selection weight (1 for scatter-slit)
  double scatter_probability; ///< p_s (0 for x2)
  double branch_overlap;      ///< x2 only
  interference::PatternTerms terms;
  std::vector<std::string> warnings;
};

PreparedRun prepare_run(const Scenario& scenario);

struct ProtocolResult {
  interference::InterferencePattern pattern;  ///< combined prediction
  decoherence::DecoherenceBudget budget;          ///< standard decoherence (incl. gas)
  decoherence::DecoherenceBudget collapse_budget;
  decoherence::GasCollisions gas;
  double internal_temperature;
  double readout_blur;
  double decay_quantum;
  double decay_collapse;
  double jitter_factor;
  double v_ideal;
  double v_quantum;
  double v_collapse;
  double v_combined;
  double threshold;
  std::optional<interference::MonteCarloResult> monte_carlo;
  std::vector<std::string> warnings;
};

/// Steps 2-7: ground state, release for t1, slit preparation, decoherence and
/// collapse over the separation path, detection after t2.
ProtocolResult run_protocol(const Scenario& scenario);
/// Same with a precomputed preparation (valid when only environment,
/// internal-temperature, channel or collapse settings differ).
ProtocolResult run_protocol(const Scenario& scenario, const PreparedRun& prepared);

enum class VisibilityKind { Quantum, Collapse };

/// One visibility prediction without the others (for inversion).
double forward_visibility(const Scenario& scenario, const PreparedRun& prepared,
                          VisibilityKind kind);

/// Internal temperature used by the scenario (equilibrium when bulk_absorption is set).
double effective_internal_temperature(const Scenario& scenario);

/// Separation path over [0, t1 + t2] for the prepared run.
decoherence::SeparationPath separation_path(const Scenario& scenario, const PreparedRun& prepared);

}  // namespace decide
