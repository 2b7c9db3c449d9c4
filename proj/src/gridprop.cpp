#include "decide/gridprop.hpp"

#include <fftw3.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <mutex>
#include <ostream>
#include <sstream>

#include "decide/error.hpp"
#include "decide/numfmt.hpp"

namespace decide::gridprop {

using detail::require;
using wavepacket::GaussianBranch;

namespace {

constexpr double kHbar = kConstants.hbar;
constexpr double kSupportSigmas = 10.0;

// FFTW's planner is not thread-safe; execution with the new-array API is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

void run_fft(std::vector<complex>& data, int sign) {
  const int n = static_cast<int>(data.size());
  auto* buf = reinterpret_cast<fftw_complex*>(data.data());
  fftw_plan plan;
  {
    std::lock_guard lock(planner_mutex());
    plan = fftw_plan_dft_1d(n, buf, buf, sign, FFTW_ESTIMATE);
  }
  fftw_execute_dft(plan, buf, buf);
  {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(plan);
  }
}

std::vector<double> wavenumbers(std::size_t n, double dx) {
  std::vector<double> k(n);
  const double dk = 2.0 * kPi / (static_cast<double>(n) * dx);
  for (std::size_t j = 0; j < n; ++j) {
    const auto jj = static_cast<long long>(j);
    const auto nn = static_cast<long long>(n);
    k[j] = dk * static_cast<double>(jj < nn / 2 ? jj : jj - nn);
  }
  return k;
}

double max_abs(std::span<const complex> v) {
  double m = 0.0;
  for (auto z : v) m = std::max(m, std::abs(z));
  return m;
}

}  // namespace

void fft_forward(std::vector<complex>& data) { run_fft(data, FFTW_FORWARD); }

void fft_inverse(std::vector<complex>& data) {
  run_fft(data, FFTW_BACKWARD);
  const double inv = 1.0 / static_cast<double>(data.size());
  for (auto& z : data) z *= inv;
}

void GridSpec::validate() const {
  require(std::isfinite(x_min) && std::isfinite(x_max) && x_max > x_min, "grid",
          "requires x_max > x_min");
  require(n >= GridState::kMinPoints && std::has_single_bit(n), "grid.n",
          "must be a power of two >= 256");
}

GridState::GridState(GridSpec spec, std::vector<complex> psi)
    : spec_(spec), psi_(std::move(psi)) {
  spec_.validate();
  require(psi_.size() == spec_.n, "grid.psi", "sample count does not match grid");
  const double peak = max_abs(psi_);
  const double edge = std::max(std::abs(psi_.front()), std::abs(psi_.back()));
  if (peak > 0.0 && edge >= kBoundaryLeak * peak) {
    throw InvalidInput("grid", "state leaks at the boundary (|psi| ratio " +
                                   fmt_double(edge / peak) + ")");
  }
}

double GridState::norm_squared() const {
  double s = 0.0;
  for (auto z : psi_) s += std::norm(z);
  return s * dx();
}

double Moments::predicted_sigma(double t, double mass) const {
  const double v = var_x + 2.0 * t * cov_xp / mass + t * t * var_p / (mass * mass);
  return std::sqrt(std::max(v, 0.0));
}

GridState sample(std::span<const GaussianBranch> branches, const GridSpec& spec) {
  spec.validate();
  std::vector<complex> psi(spec.n);
  for (std::size_t i = 0; i < spec.n; ++i) {
    psi[i] = wavepacket::superposition_value(branches, spec.x(i));
  }
  const double peak = max_abs(psi);
  const double edge = std::max(std::abs(psi.front()), std::abs(psi.back()));
  if (!(peak > 0.0)) throw InvalidInput("grid", "sampled state vanishes on the grid");
  if (edge >= GridState::kBoundaryLeak * peak) {
    double need = 0.0;
    for (const auto& b : branches) {
      need = std::max(need, std::abs(b.x0()) + kSupportSigmas * b.position_sigma());
    }
    throw InvalidInput("grid", "boundary leak: grid half-width must be at least " +
                                   fmt_double(need) + " m");
  }
  double n2 = 0.0;
  for (auto z : psi) n2 += std::norm(z);
  n2 *= spec.dx();
  const double scale = 1.0 / std::sqrt(n2);
  for (auto& z : psi) z *= scale;
  return GridState(spec, std::move(psi));
}

GridSpec default_grid(std::span<const GaussianBranch> branches, double mass, double t,
                      std::size_t min_points) {
  require(!branches.empty(), "branches", "empty superposition");
  double lo = INFINITY;
  double hi = -INFINITY;
  double kmax = 0.0;
  for (const auto& b : branches) {
    for (const auto& s : {b, b.evolved(t, mass)}) {
      const double w = kSupportSigmas * s.position_sigma();
      lo = std::min(lo, s.x0() - w);
      hi = std::max(hi, s.x0() + w);
    }
    kmax = std::max(kmax, std::abs(b.p0() / kHbar) + kSupportSigmas * std::sqrt(b.wavenumber_variance()));
  }
  const double dx_max = kPi / (1.1 * kmax);
  const auto make = [&](double a, double b) {
    const double center = 0.5 * (a + b);
    const double half = 0.5 * (b - a) * 1.05;
    const auto needed = static_cast<std::size_t>(std::ceil(2.0 * half / dx_max));
    return GridSpec{center - half, center + half, std::bit_ceil(std::max(needed, min_points))};
  };
  const GridSpec box = make(lo, hi);
  if (branches.size() == 1) return box;
  // propagate() guards with the superposition's overall spread, which exceeds the
  // per-branch boxes for separated branches; cover it too.
  const Moments m = moments(sample(branches, box));
  for (double tt : {0.0, t}) {
    const double mean = m.predicted_mean(tt, mass);
    const double w = kSupportSigmas * m.predicted_sigma(tt, mass);
    lo = std::min(lo, mean - w);
    hi = std::max(hi, mean + w);
  }
  return make(lo, hi);
}

Moments moments(const GridState& state) {
  const std::size_t n = state.size();
  const double dx = state.dx();
  const auto psi = state.psi();
  const double norm = state.norm_squared();

  std::vector<complex> spec(psi.begin(), psi.end());
  fft_forward(spec);
  const auto k = wavenumbers(n, dx);
  std::vector<complex> deriv(n);
  double pk = 0.0;
  double pk2 = 0.0;
  double wsum = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double w = std::norm(spec[j]);
    wsum += w;
    pk += w * k[j];
    pk2 += w * k[j] * k[j];
    deriv[j] = complex(0.0, k[j]) * spec[j];
  }
  fft_inverse(deriv);

  double mx = 0.0;
  double mx2 = 0.0;
  double xp = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = state.x(i);
    const double w = std::norm(psi[i]);
    mx += w * x;
    mx2 += w * x * x;
    // Re <psi| x (-i d/dx) |psi>
    xp += (std::conj(psi[i]) * x * complex(0.0, -1.0) * deriv[i]).real();
  }
  mx *= dx / norm;
  mx2 *= dx / norm;
  xp *= dx / norm;
  const double mean_k = pk / wsum;
  const double var_k = pk2 / wsum - mean_k * mean_k;

  Moments m{};
  m.mean_x = mx;
  m.var_x = mx2 - mx * mx;
  m.mean_p = kHbar * mean_k;
  m.var_p = kHbar * kHbar * var_k;
  m.cov_xp = kHbar * xp - m.mean_x * m.mean_p;
  return m;
}

GridState propagate(const GridState& state, double mass, double t) {
  require(std::isfinite(t) && t >= 0.0, "t", "propagation time must be >= 0");
  require(mass > 0.0, "mass", "must be > 0");
  if (t == 0.0) return state;

  const GridSpec& g = state.spec();
  const Moments m = moments(state);
  const double mean = m.predicted_mean(t, mass);
  const double sigma = m.predicted_sigma(t, mass);
  if (mean - kSupportSigmas * sigma < g.x_min || mean + kSupportSigmas * sigma > g.x_max) {
    std::ostringstream os;
    os << "predicted wrap-around: support [" << fmt_double(mean - kSupportSigmas * sigma) << ", "
       << fmt_double(mean + kSupportSigmas * sigma) << "] m exceeds grid [" << fmt_double(g.x_min)
       << ", " << fmt_double(g.x_max) << "] m";
    throw NumericalError(os.str());
  }

  std::vector<complex> data(state.psi().begin(), state.psi().end());
  fft_forward(data);
  const auto k = wavenumbers(g.n, g.dx());
  double peak = 0.0;
  double nyquist_band = 0.0;
  const double k_nyq = kPi / g.dx();
  for (std::size_t j = 0; j < g.n; ++j) {
    const double a = std::abs(data[j]);
    peak = std::max(peak, a);
    if (std::abs(k[j]) > 0.9 * k_nyq) nyquist_band = std::max(nyquist_band, a);
  }
  if (nyquist_band > GridState::kBoundaryLeak * peak) {
    throw NumericalError("spectrum reaches the Nyquist band; refine the grid");
  }
  const double c = kHbar * t / (2.0 * mass);
  for (std::size_t j = 0; j < g.n; ++j) data[j] *= std::polar(1.0, -c * k[j] * k[j]);
  fft_inverse(data);
  return GridState(g, std::move(data));
}

GridState propagate_chirped(const GridState& phi, double chirp_time, double mass, double t) {
  require(std::isfinite(chirp_time) && chirp_time != 0.0, "chirp_time", "must be finite, nonzero");
  const double magnification = 1.0 + t / chirp_time;
  require(magnification > 0.0, "chirp_time", "focus reached before t (M <= 0)");
  const GridState inner = propagate(phi, mass, t / magnification);
  const GridSpec& g = inner.spec();
  const GridSpec scaled{g.x_min * magnification, g.x_max * magnification, g.n};
  const double amp = 1.0 / std::sqrt(magnification);
  const double q = mass / (2.0 * kHbar * (chirp_time + t));
  std::vector<complex> out(g.n);
  for (std::size_t i = 0; i < g.n; ++i) {
    const double x = scaled.x(i);
    out[i] = amp * std::polar(1.0, q * x * x) * inner.psi()[i];
  }
  return GridState(scaled, std::move(out));
}

double l2_distance(std::span<const complex> a, std::span<const complex> b, double dx) {
  require(a.size() == b.size(), "l2_distance", "size mismatch");
  double d = 0.0;
  double nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    d += std::norm(a[i] - b[i]);
    nb += std::norm(b[i]);
  }
  return std::sqrt(d * dx) / std::sqrt(nb * dx);
}

void write_density_csv(const GridState& state, std::ostream& out) {
  out << "x,density\n";
  for (std::size_t i = 0; i < state.size(); ++i) {
    out << fmt_double(state.x(i)) << ',' << fmt_double(std::norm(state.psi()[i])) << '\n';
  }
}

}  // namespace decide::gridprop
