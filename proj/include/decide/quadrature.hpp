#pragma once

#include <functional>
#include <span>

namespace decide::quad {

struct Result {
  double value;
  double error_estimate;
};

/// Adaptive Gauss-Kronrod on [a, b]. Throws NumericalError when the error
/// estimate exceeds rel_tol * |value| + abs_tol after max_depth bisections.
Result integrate(const std::function<double(double)>& f, double a, double b,
                 double rel_tol = 1e-12, double abs_tol = 0.0, unsigned max_depth = 25);

/// Same over [a, inf).
Result integrate_to_infinity(const std::function<double(double)>& f, double a,
                             double rel_tol = 1e-12, double abs_tol = 0.0);

/// Sum of integrals over consecutive panels [breaks[i], breaks[i+1]].
Result integrate_piecewise(const std::function<double(double)>& f, std::span<const double> breaks,
                           double rel_tol = 1e-12, double abs_tol = 0.0);

}  // namespace decide::quad
