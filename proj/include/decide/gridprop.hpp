#pragma once

#include <iosfwd>
#include <span>
#include <vector>

#include "decide/core.hpp"
#include "decide/wavepacket.hpp"

namespace decide::gridprop {

/// Uniform periodic grid: x_i = x_min + i dx, dx = (x_max - x_min) / n.
struct GridSpec {
  double x_min;
  double x_max;
  std::size_t n;

  double dx() const { return (x_max - x_min) / static_cast<double>(n); }
  double x(std::size_t i) const { return x_min + static_cast<double>(i) * dx(); }
  /// Validates: n a power of two, n >= 2^8, x_max > x_min.
  void validate() const;
};

class GridState {
 public:
  static constexpr std::size_t kMinPoints = 256;
  static constexpr double kBoundaryLeak = 1e-8;

  /// Checks geometry and the boundary-leak bound; does not require unit norm.
  GridState(GridSpec spec, std::vector<complex> psi);

  const GridSpec& spec() const { return spec_; }
  std::span<const complex> psi() const { return psi_; }
  std::size_t size() const { return psi_.size(); }
  double dx() const { return spec_.dx(); }
  double x(std::size_t i) const { return spec_.x(i); }

  double norm_squared() const;

 private:
  GridSpec spec_;
  std::vector<complex> psi_;
};

struct Moments {
  double mean_x;
  double var_x;
  double mean_p;
  double var_p;
  double cov_xp;  ///< symmetrized <(xp + px)/2> - <x><p>

  /// Free-evolution prediction of the position spread at time t.
  double predicted_sigma(double t, double mass) const;
  double predicted_mean(double t, double mass) const { return mean_x + mean_p * t / mass; }
};

/// Evaluates the branch superposition pointwise and normalizes it.
/// Throws InvalidInput naming the required half-width if the state leaks at the boundary.
GridState sample(std::span<const wavepacket::GaussianBranch> branches, const GridSpec& spec);

/// Grid that holds every branch at times 0 and t with a 10-sigma margin and
/// resolves their wavenumber content; n >= min_points.
GridSpec default_grid(std::span<const wavepacket::GaussianBranch> branches, double mass, double t,
                      std::size_t min_points = std::size_t{1} << 14);

Moments moments(const GridState& state);

/// Exact spectral free propagation. Rejects evolutions whose predicted support
/// (mean +- 10 sigma) leaves the grid, or whose spectrum reaches Nyquist.
GridState propagate(const GridState& state, double mass, double t);

/// Propagates phi(x) * exp(i m x^2 / (2 hbar T)) by time t using the Fresnel
/// scaling identity: the chirp is handled analytically and phi is propagated for
/// t / M on the grid, M = 1 + t / T. The result lives on the grid scaled by M and
/// includes the outgoing chirp.
GridState propagate_chirped(const GridState& phi, double chirp_time, double mass, double t);

/// psi_1 - psi_2 in L2, relative to ||psi_2||. Grids must match.
double l2_distance(std::span<const complex> a, std::span<const complex> b, double dx);

/// Two-column CSV "x,density" with header, '.' decimal, LF endings.
void write_density_csv(const GridState& state, std::ostream& out);

/// Forward/inverse DFT (unnormalized forward, inverse divides by n).
void fft_forward(std::vector<complex>& data);
void fft_inverse(std::vector<complex>& data);

}  // namespace decide::gridprop
