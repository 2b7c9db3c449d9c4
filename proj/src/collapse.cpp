#include "decide/collapse.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "decide/error.hpp"
#include "decide/quadrature.hpp"

namespace decide::collapse {

using detail::require;
using decoherence::BudgetEntry;
using decoherence::ChannelName;
using decoherence::SeparationPath;

namespace {

constexpr double kHbar = kConstants.hbar;
constexpr double kG = kConstants.G;
constexpr double kM0 = kConstants.amu;
// e^{-u^2} is below 1e-35 past this point.
constexpr double kUMax = 9.0;

/// 3 (sin z - z cos z) / z^3, the normalized form factor of a uniform sphere.
double sphere_form_factor(double z) {
  if (z < 1e-2) {
    const double z2 = z * z;
    return 1.0 - z2 / 10.0 + z2 * z2 / 280.0;
  }
  return 3.0 * (std::sin(z) - z * std::cos(z)) / (z * z * z);
}

/// 1 - sin(y) / y without cancellation for small y.
double one_minus_sinc(double y) {
  if (y < 1e-2) {
    const double y2 = y * y;
    return y2 / 6.0 - y2 * y2 / 120.0 + y2 * y2 * y2 / 5040.0;
  }
  return 1.0 - std::sin(y) / y;
}

double csl_prefactor(double mass, const CollapseParams& p) {
  const double ratio = mass / kM0;
  // (lambda / m0^2) (4 pi)^{3/2} / (2 pi)^3 * 4 pi, with u = k rc absorbing rc^3.
  return p.csl_lambda * ratio * ratio * std::pow(4.0 * kPi, 1.5) / std::pow(2.0 * kPi, 3) * 4.0 *
         kPi;
}

/// integral_0^umax f(u) du on panels short enough to resolve an oscillation of wavenumber w.
double radial_integral(const std::function<double(double)>& f, double w) {
  const std::size_t panels =
      std::clamp<std::size_t>(static_cast<std::size_t>(std::ceil(kUMax * w / kPi)), 4, 4000);
  std::vector<double> breaks(panels + 1);
  for (std::size_t i = 0; i <= panels; ++i) breaks[i] = kUMax * static_cast<double>(i) / panels;
  return quad::integrate_piecewise(f, breaks, 1e-11, 0.0).value;
}

double dp_radius(const Particle& particle, const CollapseParams& p) {
  return p.dp_cutoff.value_or(particle.radius());
}

}  // namespace

void CollapseParams::validate() const {
  require(std::isfinite(csl_lambda) && csl_lambda >= 0.0, "collapse.csl.lambda", "must be >= 0");
  require(std::isfinite(csl_rc) && csl_rc > 0.0, "collapse.csl.rc", "must be > 0");
  if (dp_cutoff) {
    require(std::isfinite(*dp_cutoff) && *dp_cutoff > 0.0, "collapse.dp.cutoff", "must be > 0");
  }
}

double csl_rate(const Particle& particle, double dx, const CollapseParams& params) {
  params.validate();
  require(std::isfinite(dx) && dx >= 0.0, "dx", "must be >= 0");
  if (dx == 0.0 || params.csl_lambda == 0.0) return 0.0;
  const double rr = particle.radius() / params.csl_rc;
  const double dr = dx / params.csl_rc;
  const auto f = [&](double u) {
    const double ff = sphere_form_factor(u * rr);
    return u * u * ff * ff * std::exp(-u * u) * one_minus_sinc(u * dr);
  };
  return csl_prefactor(particle_mass(particle), params) * radial_integral(f, dr + rr);
}

double csl_small_dx_coefficient(const Particle& particle, const CollapseParams& params) {
  params.validate();
  const double rr = particle.radius() / params.csl_rc;
  const auto f = [&](double u) {
    const double ff = sphere_form_factor(u * rr);
    return u * u * ff * ff * std::exp(-u * u) * u * u / 6.0;
  };
  return csl_prefactor(particle_mass(particle), params) * radial_integral(f, rr) /
         (params.csl_rc * params.csl_rc);
}

double csl_plateau(const Particle& particle, const CollapseParams& params) {
  params.validate();
  const double rr = particle.radius() / params.csl_rc;
  const auto f = [&](double u) {
    const double ff = sphere_form_factor(u * rr);
    return u * u * ff * ff * std::exp(-u * u);
  };
  return csl_prefactor(particle_mass(particle), params) * radial_integral(f, rr);
}

namespace {

/// U(d) - U(0) by the shell integral. Shells with s <= a - d lie wholly inside
/// both placements and cancel exactly, so only [max(0, a - d), a + d] contributes.
double shell_energy_gain(double mass, double a, double d) {
  if (d == 0.0) return 0.0;
  const double rho = mass / (4.0 / 3.0 * kPi * a * a * a);
  // Potential of the second sphere at distance s from its center.
  const auto phi = [&](double s) {
    return s >= a ? -kG * mass / s : -kG * mass * (3.0 * a * a - s * s) / (2.0 * a * a * a);
  };
  // Area of the shell of radius s (about sphere 2) that lies inside sphere 1 offset by d.
  const auto area = [&](double s) {
    if (s <= a - d) return 4.0 * kPi * s * s;
    if (s <= std::abs(d - a) || s >= d + a) return 0.0;
    return kPi * s * (a - s + d) * (a + s - d) / d;
  };
  const auto area0 = [&](double s) { return s <= a ? 4.0 * kPi * s * s : 0.0; };
  const double lo = std::max(0.0, a - d);
  std::vector<double> breaks{lo, a, d + a};
  if (std::abs(d - a) > lo) breaks.push_back(std::abs(d - a));
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
  const auto f = [&](double s) { return rho * phi(s) * (area(s) - area0(s)); };
  return quad::integrate_piecewise(f, breaks, 1e-13, 0.0).value;
}

double self_energy(double mass, double a) { return -1.2 * kG * mass * mass / a; }

}  // namespace

double sphere_interaction_energy_shell(double mass, double radius, double d) {
  require(mass > 0.0 && radius > 0.0, "sphere", "mass and radius must be > 0");
  require(std::isfinite(d) && d >= 0.0, "dx", "must be >= 0");
  return self_energy(mass, radius) + shell_energy_gain(mass, radius, d);
}

double sphere_interaction_energy(double mass, double radius, double d) {
  require(std::isfinite(d) && d >= 0.0, "dx", "must be >= 0");
  if (d >= 2.0 * radius) return -kG * mass * mass / d;
  return sphere_interaction_energy_shell(mass, radius, d);
}

double dp_rate(const Particle& particle, double dx, const CollapseParams& params) {
  params.validate();
  require(std::isfinite(dx) && dx >= 0.0, "dx", "must be >= 0");
  if (dx == 0.0) return 0.0;
  const double m = particle_mass(particle);
  const double a = dp_radius(particle, params);
  const double gain = dx >= 2.0 * a ? -self_energy(m, a) - kG * m * m / dx
                                    : shell_energy_gain(m, a, dx);
  return std::max(0.0, gain) / kHbar;
}

double dp_plateau(const Particle& particle, const CollapseParams& params) {
  const double m = particle_mass(particle);
  return 1.2 * kG * m * m / (dp_radius(particle, params) * kHbar);
}

KRate k_rate(const Particle& particle, double dx) {
  require(std::isfinite(dx) && dx >= 0.0, "dx", "must be >= 0");
  const double m = particle_mass(particle);
  const double a_c =
      std::cbrt(kHbar * kHbar / kG) * std::pow(particle.radius(), 2.0 / 3.0) / m;
  const double plateau = kHbar / (m * a_c * a_c);
  const double q = dx / a_c;
  return {a_c, plateau * std::min(1.0, q * q)};
}

CollapseDecay collapse_visibility(const CollapseParams& params, const Particle& particle,
                                  const SeparationPath& path, double duration) {
  params.validate();
  require(std::isfinite(duration) && duration >= 0.0, "duration", "must be >= 0 s");
  require(path.start() <= 0.0 && path.end() >= duration * (1.0 - 1e-12), "separation_path",
          "path does not cover [0, duration]");
  const double end = std::min(duration, path.end());
  CollapseDecay out{1.0, 0.0, 0.0, 0.0};
  if (params.csl_enabled) {
    out.csl_exponent = decoherence::integrated_exponent(
        path, [&](double s) { return csl_rate(particle, s, params); }, 0.0, end);
  }
  if (params.dp_enabled) {
    out.dp_exponent = decoherence::integrated_exponent(
        path, [&](double s) { return dp_rate(particle, s, params); }, 0.0, end);
  }
  if (params.k_enabled) {
    out.k_exponent = decoherence::integrated_exponent(
        path, [&](double s) { return k_rate(particle, s).rate; }, 0.0, end);
  }
  out.factor = std::exp(-(out.csl_exponent + out.dp_exponent + out.k_exponent));
  return out;
}

std::vector<BudgetEntry> collapse_entries(const CollapseParams& params, const Particle& particle,
                                          const SeparationPath& path, double t1, double t2) {
  std::vector<BudgetEntry> out;
  const auto row = [&](ChannelName name, double lambda, double gamma,
                       const decoherence::RateFunction& rate) {
    out.push_back({name, lambda, gamma, decoherence::integrated_exponent(path, rate, 0.0, t1),
                   decoherence::integrated_exponent(path, rate, t1, t1 + t2)});
  };
  if (params.csl_enabled) {
    row(ChannelName::CSL, csl_small_dx_coefficient(particle, params), csl_plateau(particle, params),
        [&](double s) { return csl_rate(particle, s, params); });
  }
  if (params.dp_enabled) {
    // U(d) = U(0) + (G m^2 / 2a^3) d^2 + ... for small d.
    const double m = particle_mass(particle);
    const double a = dp_radius(particle, params);
    row(ChannelName::DP, kG * m * m / (2.0 * a * a * a * kHbar), dp_plateau(particle, params),
        [&](double s) { return dp_rate(particle, s, params); });
  }
  if (params.k_enabled) {
    const KRate k = k_rate(particle, 0.0);
    const double plateau = kHbar / (particle_mass(particle) * k.a_c * k.a_c);
    row(ChannelName::K, plateau / (k.a_c * k.a_c), plateau,
        [&](double s) { return k_rate(particle, s).rate; });
  }
  return out;
}

}  // namespace decide::collapse
