#include "decide/quadrature.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>
#include <sstream>

#include "decide/error.hpp"

namespace decide::quad {

namespace {

using GK = boost::math::quadrature::gauss_kronrod<double, 61>;

Result checked(double value, double err, double rel_tol, double abs_tol, double a, double b) {
  if (!std::isfinite(value)) {
    std::ostringstream os;
    os << "quadrature produced a non-finite value on [" << a << ", " << b << "]";
    throw NumericalError(os.str());
  }
  // The GK estimate is pessimistic near double precision; allow a small floor.
  const double allowed = std::max(rel_tol, 1e-13) * std::abs(value) + abs_tol;
  if (err > allowed && err > 1e3 * std::numeric_limits<double>::epsilon() * std::abs(value)) {
    std::ostringstream os;
    os << "quadrature did not converge on [" << a << ", " << b << "]: estimate " << value
       << ", error " << err;
    throw NumericalError(os.str());
  }
  return {value, err};
}

}  // namespace

Result integrate(const std::function<double(double)>& f, double a, double b, double rel_tol,
                 double abs_tol, unsigned max_depth) {
  if (a == b) return {0.0, 0.0};
  // Boost's error estimate misbehaves on very short intervals; integrate over [0, 1].
  const double h = b - a;
  const auto g = [&](double t) { return f(a + h * t); };
  double err = 0.0;
  const double v = h * GK::integrate(g, 0.0, 1.0, max_depth, rel_tol, &err);
  return checked(v, std::abs(h) * err, rel_tol, abs_tol, a, b);
}

Result integrate_to_infinity(const std::function<double(double)>& f, double a, double rel_tol,
                             double abs_tol) {
  double err = 0.0;
  const double v =
      GK::integrate(f, a, std::numeric_limits<double>::infinity(), 25, rel_tol, &err);
  return checked(v, err, rel_tol, abs_tol, a, std::numeric_limits<double>::infinity());
}

Result integrate_piecewise(const std::function<double(double)>& f, std::span<const double> breaks,
                           double rel_tol, double abs_tol) {
  Result total{0.0, 0.0};
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    const Result r = integrate(f, breaks[i], breaks[i + 1], rel_tol, abs_tol);
    total.value += r.value;
    total.error_estimate += r.error_estimate;
  }
  return total;
}

}  // namespace decide::quad
