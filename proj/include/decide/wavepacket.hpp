#pragma once

#include <span>
#include <vector>

#include "decide/core.hpp"

namespace decide::wavepacket {

/// Coefficients of a complex quadratic exponent: psi(x) = exp(-A x^2 + B x + C).
struct QuadraticExponent {
  complex A;
  complex B;
  complex C;
};

/// One normalized Gaussian times a complex amplitude:
///
///   psi(x) = amp * N(s) * exp(-(x - x0)^2 / (4 s) + i p0 (x - x0) / hbar)
///
/// with complex width parameter s (Re(1/s) > 0) and N(s) the positive constant
/// that gives the Gaussian unit L2 norm. Free evolution only shifts s by
/// i hbar t / (2 m), so the branch stays in this family exactly.
class GaussianBranch {
 public:
  GaussianBranch(double x0, double p0, complex s, complex amp);

  /// Re-express exp(-A x^2 + B x + C) in branch form. Requires Re(A) > 0.
  static GaussianBranch from_exponent(const QuadraticExponent& e);

  double x0() const { return x0_; }
  double p0() const { return p0_; }
  complex s() const { return s_; }
  complex amp() const { return amp_; }

  /// Position variance of |psi|^2: 1 / Re(1/s).
  double position_variance() const;
  double position_sigma() const;
  /// Wavenumber variance of |psi~|^2: 1 / (4 Re s). Invariant under free evolution.
  double wavenumber_variance() const;

  complex value(double x) const;
  /// Exponent about an arbitrary origin: psi(origin + y) = exp(-A y^2 + B y + C).
  QuadraticExponent exponent(double origin = 0.0) const;

  GaussianBranch with_amp(complex a) const { return {x0_, p0_, s_, a}; }
  GaussianBranch evolved(double t, double mass) const;

 private:
  double x0_;
  double p0_;
  complex s_;
  complex amp_;
};

/// <a|b> in closed form.
complex overlap(const GaussianBranch& a, const GaussianBranch& b);
/// integral of conj(exp(e1)) * exp(e2) over the real line; requires Re(A1* + A2) > 0.
complex exponent_overlap(const QuadraticExponent& e1, const QuadraticExponent& e2);

/// A coherent superposition of branches with a classical weight.
struct PureState {
  double weight = 1.0;
  std::vector<GaussianBranch> branches;
};

/// Classical mixture of pure states.
class BranchEnsemble {
 public:
  static constexpr double kWeightTolerance = 1e-12;
  static constexpr double kNormTolerance = 1e-9;

  explicit BranchEnsemble(std::vector<PureState> components);
  static BranchEnsemble pure(std::vector<GaussianBranch> branches);

  const std::vector<PureState>& components() const { return components_; }

 private:
  std::vector<PureState> components_;
};

/// sum_ij conj(a_i) a_j <g_i|g_j>
double norm_squared(std::span<const GaussianBranch> branches);
/// Rescale amplitudes so the superposition has unit norm.
std::vector<GaussianBranch> normalized(std::span<const GaussianBranch> branches);
complex superposition_value(std::span<const GaussianBranch> branches, double x);

/// sqrt(hbar / (2 m omega)) centered at rest.
GaussianBranch ground_state(double mass, double omega);

BranchEnsemble free_evolve(const BranchEnsemble& state, double t, double mass);

/// Asymptotic width-growth velocity of the released ground state: sqrt(hbar omega / (2 m)).
double expansion_velocity(double mass, double omega);

/// Characteristic dispersion time 2 m sigma^2 / hbar of a real-width Gaussian.
double dispersion_time(double mass, double sigma);

}  // namespace decide::wavepacket
