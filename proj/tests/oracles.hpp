#pragma once

// Independent reference computations used by the tests. Nothing here calls into
// the library's numerics.

#include <cmath>
#include <complex>
#include <functional>
#include <vector>

namespace oracle {

inline constexpr double hbar = 1.054571817e-34;
inline constexpr double kB = 1.380649e-23;
inline constexpr double c = 299792458.0;
inline constexpr double G = 6.67430e-11;
inline constexpr double amu = 1.66053906660e-27;
inline constexpr double pi = 3.14159265358979323846;

/// Composite Simpson rule with n (even) panels.
inline double simpson(const std::function<double(double)>& f, double a, double b, int n) {
  if (n % 2) ++n;
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return s * h / 3.0;
}

inline double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

inline double sphere_mass(double r, double rho) { return 4.0 / 3.0 * pi * r * r * r * rho; }

/// Unnormalized Gaussian packet psi(x) after free evolution, from the textbook
/// propagator kernel applied analytically to exp(-(x-x0)^2/(4 s0) + i k0 x).
inline std::complex<double> free_gaussian(double x, double x0, double k0, double s0, double t,
                                          double m) {
  using C = std::complex<double>;
  const C st = C(s0, hbar * t / (2.0 * m));
  const double v = hbar * k0 / m;
  const C arg = -(x - x0 - v * t) * (x - x0 - v * t) / (4.0 * st) + C(0.0, k0 * (x - x0)) -
                C(0.0, 0.5 * k0 * v * t);
  const C norm = std::pow(2.0 * pi * s0, -0.25) * std::sqrt(s0 / st);
  return norm * std::exp(arg);
}

}  // namespace oracle
