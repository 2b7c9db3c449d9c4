#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "decide/core.hpp"
#include "decide/prepare.hpp"
#include "decide/wavepacket.hpp"

namespace decide::interference {

/// Far-field double-slit period 2 pi hbar t2 / (m dx).
double fringe_spacing(double mass, double t2, double dx);

/// State at the end of preparation. When `notched` is set it replaces
/// component `notched_component` of the ensemble on the detection path.
struct PreparedState {
  wavepacket::BranchEnsemble ensemble;
  std::optional<prepare::NotchedState> notched;
  std::size_t notched_component = 0;
};

/// Density at detection split into the part that does not depend on coherence
/// and the cross terms between coherent branches: rho = incoherent + D * cross.
struct PatternTerms {
  std::vector<double> x;
  std::vector<double> incoherent;
  std::vector<double> cross;
  double fringe_hint;  ///< local fringe period of the dominant coherent pair, m
  bool grid_path;
};

struct DetectionOptions {
  std::size_t samples_per_fringe = 16;
  double span_sigmas = 7.0;
  std::size_t max_samples = std::size_t{1} << 20;
};

PatternTerms pattern_terms(const PreparedState& state, double t2, double mass,
                           const DetectionOptions& options = {});

struct VisibilityFit {
  double visibility;
  double fringe_spacing;
  double residual;  ///< rms misfit over the fit region relative to the peak density
  double region_lo;
  double region_hi;
  int degree;
};

/// Least-squares fit of P(x) (1 + V cos(2 pi x / d + phi)) over the half-max
/// envelope region; P is a Chebyshev polynomial, d is refined around the hint.
/// Throws NumericalError if the fit residual exceeds 5% of the peak density
/// (unless check_residual is false) or fewer than 8 samples cover a fringe.
VisibilityFit extract_visibility(std::span<const double> x, std::span<const double> density,
                                 double spacing_hint, bool check_residual = true);

/// Gaussian smoothing of uniformly sampled data with zero extension;
/// sigma in samples. Direct sum for short kernels, FFT otherwise.
std::vector<double> gaussian_smooth(std::span<const double> data, double sigma_samples);

struct InterferencePattern {
  std::vector<double> x;
  std::vector<double> density;
  double nominal_spacing;
  double fringe_spacing;
  double visibility;
  double fit_residual;
  double coherence;  ///< product of all factors applied to the cross terms
  std::vector<std::string> warnings;
};

/// rho = incoherent + coherence * cross, blurred by a Gaussian of width
/// readout_blur, normalized, and fitted.
InterferencePattern assemble(const PatternTerms& terms, double coherence, double readout_blur);

InterferencePattern detect(const PreparedState& state, double t2, double mass,
                           double decay_quantum, double decay_collapse, double phase_jitter,
                           double readout_blur, const DetectionOptions& options = {});

struct MonteCarloOptions {
  std::size_t draws = 1000000;
  std::size_t batches = 10;
  std::uint64_t seed = 1;
};

struct MonteCarloResult {
  double mean;
  double stddev;
  std::vector<double> batch_visibilities;
};

/// Draws detection positions from the pattern, histograms them on the pattern
/// grid and re-extracts the visibility per batch.
MonteCarloResult monte_carlo_visibility(const InterferencePattern& pattern,
                                        const MonteCarloOptions& options);

}  // namespace decide::interference
