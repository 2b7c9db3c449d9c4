#include "decide/prepare.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>

#include "decide/error.hpp"
#include "decide/numfmt.hpp"

namespace decide::prepare {

using detail::require;
using wavepacket::BranchEnsemble;
using wavepacket::GaussianBranch;
using wavepacket::PureState;
using wavepacket::QuadraticExponent;

namespace {
constexpr double kHbar = kConstants.hbar;
constexpr double kDegenerateOverlap = 1e-3;
}  // namespace

X2Result prepare_x2(const GaussianBranch& input, const X2Params& params) {
  require(std::isfinite(params.half_separation) && params.half_separation >= 0.0,
          "protocol.x2.half_separation", "must be >= 0");
  require(std::isfinite(params.sigma_m) && params.sigma_m > 0.0, "protocol.x2.sigma_m",
          "must be > 0");
  const double X = params.half_separation;
  const double sm2 = params.sigma_m * params.sigma_m;
  const QuadraticExponent e = input.exponent(0.0);
  const complex dA = 1.0 / (4.0 * sm2);

  std::vector<QuadraticExponent> parts;
  if (X == 0.0) {
    parts.push_back({e.A + dA, e.B, e.C + std::log(2.0)});
  } else {
    const complex dB = X / (2.0 * sm2);
    const complex dC = -X * X / (4.0 * sm2);
    parts.push_back({e.A + dA, e.B + dB, e.C + dC});
    parts.push_back({e.A + dA, e.B - dB, e.C + dC});
  }

  double projected = 0.0;
  for (const auto& a : parts) {
    for (const auto& b : parts) projected += wavepacket::exponent_overlap(a, b).real();
  }
  const double input_norm = wavepacket::norm_squared(std::span(&input, 1));
  if (!(projected > 0.0)) throw NumericalError("x2 projection has zero norm");

  const double shift = -0.5 * std::log(projected);
  std::vector<GaussianBranch> branches;
  for (auto p : parts) {
    p.C += shift;
    branches.push_back(GaussianBranch::from_exponent(p));
  }
  // The completed square cancels terms of order X^2/sigma_m^2; renormalize from the amplitudes.
  branches = wavepacket::normalized(branches);

  X2Result out{BranchEnsemble::pure(branches), projected / input_norm, 0.0, {}};
  if (branches.size() == 2) {
    const double na = std::abs(branches[0].amp());
    const double nb = std::abs(branches[1].amp());
    out.branch_overlap = std::abs(wavepacket::overlap(branches[0], branches[1])) / (na * nb);
    if (out.branch_overlap > kDegenerateOverlap) {
      out.warnings.push_back("degenerate slit: branch overlap " + fmt_double(out.branch_overlap) +
                             " exceeds 1e-3; X is too small for the branch widths");
    }
  } else {
    out.branch_overlap = 1.0;
    out.warnings.push_back("degenerate slit: X = 0 gives a single branch");
  }
  return out;
}

double rayleigh_cross_section(const Particle& particle, double wavelength) {
  const double k = 2.0 * kPi / wavelength;
  const double r3 = std::pow(particle.radius(), 3);
  return 8.0 * kPi / 3.0 * std::pow(k, 4) * r3 * r3 *
         std::norm(clausius_mossotti(particle.eps_trap()));
}

double scatter_peak_probability(const ScatterSlitParams& params, double cross_section) {
  const double photon_energy = kHbar * 2.0 * kPi * kConstants.c / params.wavelength;
  const double flux = params.power / photon_energy;
  const double area = kPi * params.waist * params.waist / 2.0;
  return flux * cross_section / area * params.duration;
}

double phase_jitter_factor(double sigma_phi) {
  require(std::isfinite(sigma_phi) && sigma_phi >= 0.0, "protocol.phase_jitter", "must be >= 0");
  return std::exp(-0.5 * sigma_phi * sigma_phi);
}

namespace {

struct LobeMoments {
  double weight;
  double mean;
  double variance;
};

LobeMoments lobe_moments(const gridprop::GridState& g) {
  double w = 0.0;
  double m = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double d = std::norm(g.psi()[i]);
    w += d;
    m += d * g.x(i);
  }
  m /= w;
  double v = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double u = g.x(i) - m;
    v += std::norm(g.psi()[i]) * u * u;
  }
  return {w * g.dx(), m, v / w};
}

}  // namespace

ScatterSlitResult prepare_scatter_slit(const GaussianBranch& input, const ScatterSlitParams& params,
                                       const Particle& particle, double mass) {
  params.validate();
  require(mass > 0.0, "mass", "must be > 0");
  const double width = input.position_sigma();
  require(params.waist < width, "protocol.scatter_slit.waist",
          "beam waist " + fmt_double(params.waist) + " m must be smaller than the wavepacket width " +
              fmt_double(width) + " m");

  ScatterSlitResult out{BranchEnsemble::pure({input}), std::nullopt, 0.0, 0.0, 0.0, true, 0.0, {}};
  out.cross_section = params.cross_section.value_or(rayleigh_cross_section(particle, params.wavelength));
  const double size_parameter = 2.0 * kPi * particle.radius() / params.wavelength;
  out.rayleigh_valid = params.cross_section.has_value() || size_parameter <= 1.0;
  if (!out.rayleigh_valid) {
    out.warnings.push_back("Rayleigh cross-section used outside its validity (2 pi R / lambda = " +
                           fmt_double(size_parameter) + " > 1); supply cross_section to override");
  }
  if (params.wavelength / 2.0 > params.waist) {
    out.warnings.push_back("scattered-photon resolution lambda/2 = " +
                           fmt_double(params.wavelength / 2.0) + " m exceeds the beam waist");
  }
  out.p_peak = scatter_peak_probability(params, out.cross_section);
  require(out.p_peak <= 1.0, "protocol.scatter_slit.power",
          "peak scatter probability " + fmt_double(out.p_peak) +
              " > 1: beam too strong for the single-photon model");
  if (out.p_peak == 0.0) return out;

  const QuadraticExponent e = input.exponent(0.0);
  const double chirp_rate = e.A.imag();
  const double chirp_time = chirp_rate == 0.0 ? 0.0 : -mass / (2.0 * kHbar * chirp_rate);

  // Unchirped profile phi(x) = exp(-Re(A) x^2 + B x + C) on a grid fine enough for the notch.
  const double center = input.x0();
  const double beam = center;
  const double half = 12.0 * width;
  const double kmax = std::abs(e.B.imag()) + 10.0 * (1.0 / (2.0 * width) + 2.0 / params.waist);
  const double dx_target = std::min(params.waist / 16.0, kPi / kmax);
  const auto n = std::bit_ceil(
      std::max<std::size_t>(static_cast<std::size_t>(std::ceil(2.0 * half / dx_target)), 4096));
  const gridprop::GridSpec spec{center - half, center + half, n};

  std::vector<complex> left(n);
  std::vector<complex> right(n);
  double full = 0.0;
  double scattered = 0.0;
  double notched_norm = 0.0;
  const double w2 = params.waist * params.waist;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = spec.x(i);
    const complex phi = std::exp(-e.A.real() * x * x + e.B * x + e.C);
    const double p = out.p_peak * std::exp(-2.0 * (x - beam) * (x - beam) / w2);
    const double dens = std::norm(phi);
    full += dens;
    scattered += p * dens;
    const complex notched = phi * std::sqrt(1.0 - p);
    notched_norm += std::norm(notched);
    const double chi = 0.5 * std::erfc((x - beam) / params.waist);
    left[i] = chi * notched;
    right[i] = (1.0 - chi) * notched;
  }
  out.p_scatter = scattered / full;
  const double scale = 1.0 / std::sqrt(notched_norm * spec.dx());
  for (auto& z : left) z *= scale;
  for (auto& z : right) z *= scale;
  out.notched.emplace(NotchedState{gridprop::GridState(spec, std::move(left)),
                                   gridprop::GridState(spec, std::move(right)), chirp_time,
                                   1.0 - out.p_scatter});

  // Two-lobe branch approximation: matched weight, mean and variance; the
  // parent's chirp and local phase carried over.
  std::vector<GaussianBranch> lobes;
  for (const auto* g : {&out.notched->left, &out.notched->right}) {
    const LobeMoments lm = lobe_moments(*g);
    const complex A = 1.0 / (4.0 * lm.variance) + complex(0.0, chirp_rate);
    const double k_local = e.B.imag() - 2.0 * chirp_rate * lm.mean;
    const double phase = (-e.A * lm.mean * lm.mean + e.B * lm.mean + e.C).imag();
    lobes.emplace_back(lm.mean, kHbar * k_local, 1.0 / (4.0 * A),
                       std::polar(std::sqrt(std::min(lm.weight, 1.0)), phase));
  }
  out.lobe_separation = lobes[1].x0() - lobes[0].x0();

  const double local_width =
      params.localized_width == LocalizedWidth::BeamWaist ? params.waist / 2.0 : params.wavelength / 2.0;
  const GaussianBranch localized(beam, kHbar * (e.B.imag() - 2.0 * chirp_rate * beam),
                                 complex(local_width * local_width, 0.0), 1.0);

  out.state = BranchEnsemble({PureState{out.p_scatter, {localized}},
                              PureState{1.0 - out.p_scatter, wavepacket::normalized(lobes)}});
  return out;
}

}  // namespace decide::prepare
