#include "decide/wavepacket.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "decide/error.hpp"

namespace decide::wavepacket {

using detail::require;

namespace {

constexpr double kHbar = kConstants.hbar;

double norm_constant(complex s) { return std::pow((1.0 / s).real() / (2.0 * kPi), 0.25); }

bool finite(complex z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

}  // namespace

GaussianBranch::GaussianBranch(double x0, double p0, complex s, complex amp)
    : x0_(x0), p0_(p0), s_(s), amp_(amp) {
  require(std::isfinite(x0) && std::isfinite(p0), "branch", "center must be finite");
  require(finite(s) && (1.0 / s).real() > 0.0, "branch.s", "requires Re(1/s) > 0");
  require(finite(amp) && std::abs(amp) <= 1.0 + 1e-9, "branch.amp", "requires |amp| <= 1");
}

GaussianBranch GaussianBranch::from_exponent(const QuadraticExponent& e) {
  require(e.A.real() > 0.0, "branch", "exponent is not normalizable (Re A <= 0)");
  const double x0 = e.B.real() / (2.0 * e.A.real());
  const double k0 = e.B.imag() - 2.0 * e.A.imag() * x0;
  const complex s = 1.0 / (4.0 * e.A);
  const complex at_center = -e.A * x0 * x0 + e.B * x0 + e.C;
  const complex amp = std::exp(at_center) / norm_constant(s);
  return {x0, kHbar * k0, s, amp};
}

double GaussianBranch::position_variance() const { return 1.0 / (1.0 / s_).real(); }
double GaussianBranch::position_sigma() const { return std::sqrt(position_variance()); }
double GaussianBranch::wavenumber_variance() const { return 1.0 / (4.0 * s_.real()); }

complex GaussianBranch::value(double x) const {
  const double u = x - x0_;
  const complex arg = -u * u / (4.0 * s_) + complex(0.0, p0_ * u / kHbar);
  return amp_ * norm_constant(s_) * std::exp(arg);
}

QuadraticExponent GaussianBranch::exponent(double origin) const {
  // psi(origin + y) with u = y - d, d = x0 - origin
  const complex a = 1.0 / (4.0 * s_);
  const double d = x0_ - origin;
  const double k0 = p0_ / kHbar;
  const complex c0 = std::log(amp_ * norm_constant(s_));
  return {a, 2.0 * a * d + complex(0.0, k0), -a * d * d - complex(0.0, k0 * d) + c0};
}

GaussianBranch GaussianBranch::evolved(double t, double mass) const {
  if (t == 0.0) return *this;
  const complex s_t = s_ + complex(0.0, kHbar * t / (2.0 * mass));
  const complex ratio = std::sqrt(s_) / std::sqrt(s_t);
  const complex phase = ratio / std::abs(ratio);
  const complex galilei = std::polar(1.0, p0_ * p0_ * t / (2.0 * mass * kHbar));
  return {x0_ + p0_ * t / mass, p0_, s_t, amp_ * phase * galilei};
}

complex exponent_overlap(const QuadraticExponent& e1, const QuadraticExponent& e2) {
  const complex A = std::conj(e1.A) + e2.A;
  const complex B = std::conj(e1.B) + e2.B;
  const complex C = std::conj(e1.C) + e2.C;
  return std::sqrt(kPi / A) * std::exp(B * B / (4.0 * A) + C);
}

complex overlap(const GaussianBranch& a, const GaussianBranch& b) {
  if (a.amp() == 0.0 || b.amp() == 0.0) return 0.0;
  return exponent_overlap(a.exponent(a.x0()), b.exponent(a.x0()));
}

double norm_squared(std::span<const GaussianBranch> branches) {
  double total = 0.0;
  for (std::size_t i = 0; i < branches.size(); ++i) {
    total += std::norm(branches[i].amp());
    for (std::size_t j = i + 1; j < branches.size(); ++j) {
      total += 2.0 * overlap(branches[i], branches[j]).real();
    }
  }
  return total;
}

std::vector<GaussianBranch> normalized(std::span<const GaussianBranch> branches) {
  const double n2 = norm_squared(branches);
  if (!(n2 > 0.0)) throw NumericalError("cannot normalize a superposition with zero norm");
  const double scale = 1.0 / std::sqrt(n2);
  std::vector<GaussianBranch> out;
  out.reserve(branches.size());
  for (const auto& b : branches) out.push_back(b.with_amp(b.amp() * scale));
  return out;
}

complex superposition_value(std::span<const GaussianBranch> branches, double x) {
  complex v = 0.0;
  for (const auto& b : branches) v += b.value(x);
  return v;
}

BranchEnsemble::BranchEnsemble(std::vector<PureState> components)
    : components_(std::move(components)) {
  require(!components_.empty(), "ensemble", "needs at least one component");
  double total = 0.0;
  for (const auto& c : components_) {
    require(c.weight >= 0.0, "ensemble.weight", "must be >= 0");
    require(!c.branches.empty(), "ensemble.branches", "pure component without branches");
    const double n2 = norm_squared(c.branches);
    require(std::abs(n2 - 1.0) <= kNormTolerance, "ensemble.norm",
            "pure component not normalized (norm^2 = " + std::to_string(n2) + ")");
    total += c.weight;
  }
  require(std::abs(total - 1.0) <= kWeightTolerance, "ensemble.weight", "weights must sum to 1");
}

BranchEnsemble BranchEnsemble::pure(std::vector<GaussianBranch> branches) {
  return BranchEnsemble({PureState{1.0, std::move(branches)}});
}

GaussianBranch ground_state(double mass, double omega) {
  require(std::isfinite(mass) && mass > 0.0, "mass", "must be > 0");
  require(std::isfinite(omega) && omega > 0.0, "omega", "must be > 0");
  const double var = kHbar / (2.0 * mass * omega);
  return {0.0, 0.0, complex(var, 0.0), complex(1.0, 0.0)};
}

BranchEnsemble free_evolve(const BranchEnsemble& state, double t, double mass) {
  require(std::isfinite(t) && t >= 0.0, "t", "evolution time must be >= 0");
  require(mass > 0.0, "mass", "must be > 0");
  std::vector<PureState> out;
  out.reserve(state.components().size());
  for (const auto& c : state.components()) {
    PureState next{c.weight, {}};
    next.branches.reserve(c.branches.size());
    for (const auto& b : c.branches) next.branches.push_back(b.evolved(t, mass));
    out.push_back(std::move(next));
  }
  return BranchEnsemble(std::move(out));
}

double expansion_velocity(double mass, double omega) {
  require(std::isfinite(mass) && mass > 0.0, "mass", "must be > 0");
  require(std::isfinite(omega) && omega > 0.0, "omega", "must be > 0");
  return std::sqrt(kHbar * omega / (2.0 * mass));
}

double dispersion_time(double mass, double sigma) { return 2.0 * mass * sigma * sigma / kHbar; }

}  // namespace decide::wavepacket
