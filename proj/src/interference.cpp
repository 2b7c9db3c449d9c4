#include "decide/interference.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <optional>
#include <random>

#include "decide/error.hpp"
#include "decide/gridprop.hpp"
#include "decide/numfmt.hpp"

namespace decide::interference {

using detail::require;
using wavepacket::GaussianBranch;

namespace {

constexpr double kHbar = kConstants.hbar;
constexpr std::size_t kDirectKernelLimit = 512;
constexpr double kMaxResidual = 0.05;
constexpr double kMinSamplesPerFringe = 8.0;

struct Pair {
  GaussianBranch a;
  GaussianBranch b;
  double weight;
};

/// Strongest coherent pair (by weight |amp_a amp_b|) among the evolved components.
std::optional<Pair> dominant_pair(const std::vector<wavepacket::PureState>& comps) {
  std::optional<Pair> best;
  for (const auto& c : comps) {
    for (std::size_t i = 0; i < c.branches.size(); ++i) {
      for (std::size_t j = i + 1; j < c.branches.size(); ++j) {
        const double w = c.weight * std::abs(c.branches[i].amp()) * std::abs(c.branches[j].amp());
        if (!best || w > best->weight) best = Pair{c.branches[i], c.branches[j], w};
      }
    }
  }
  return best;
}

/// Local period of conj(psi_a) psi_b at the center of its envelope.
double local_period(const GaussianBranch& a, const GaussianBranch& b) {
  const auto ea = a.exponent(0.0);
  const auto eb = b.exponent(0.0);
  const complex A = std::conj(ea.A) + eb.A;
  const complex B = std::conj(ea.B) + eb.B;
  const double xc = B.real() / (2.0 * A.real());
  const double k = B.imag() - 2.0 * A.imag() * xc;
  return k == 0.0 ? 0.0 : 2.0 * kPi / std::abs(k);
}

void add_branch_terms(const wavepacket::PureState& c, std::span<const double> x,
                      std::vector<double>& inc, std::vector<double>& cross) {
  const std::size_t nb = c.branches.size();
  std::vector<complex> v(nb);
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t b = 0; b < nb; ++b) v[b] = c.branches[b].value(x[i]);
    double d = 0.0;
    double xr = 0.0;
    for (std::size_t p = 0; p < nb; ++p) {
      d += std::norm(v[p]);
      for (std::size_t q = p + 1; q < nb; ++q) xr += 2.0 * (std::conj(v[p]) * v[q]).real();
    }
    inc[i] += c.weight * d;
    cross[i] += c.weight * xr;
  }
}

/// Band-limited interpolation onto a grid `factor` times finer over the same interval.
gridprop::GridState refine(const gridprop::GridState& g, std::size_t factor) {
  if (factor <= 1) return g;
  const std::size_t n = g.size();
  std::vector<complex> spec(g.psi().begin(), g.psi().end());
  gridprop::fft_forward(spec);
  std::vector<complex> big(n * factor);
  for (std::size_t j = 0; j < n / 2; ++j) big[j] = spec[j];
  for (std::size_t j = n / 2; j < n; ++j) big[n * factor - n + j] = spec[j];
  gridprop::fft_inverse(big);
  for (auto& z : big) z *= static_cast<double>(factor);
  const gridprop::GridSpec s = g.spec();
  return gridprop::GridState({s.x_min, s.x_max, n * factor}, std::move(big));
}

gridprop::GridState evolve_lobe(const gridprop::GridState& g, double chirp_time, double mass,
                                double t) {
  if (chirp_time == 0.0) return gridprop::propagate(g, mass, t);
  return gridprop::propagate_chirped(g, chirp_time, mass, t);
}

double uniform_step(std::span<const double> x) {
  require(x.size() >= 16, "pattern", "needs at least 16 samples");
  const double dx = (x.back() - x.front()) / static_cast<double>(x.size() - 1);
  require(dx > 0.0, "pattern", "positions must increase");
  return dx;
}

// Chebyshev basis on the fit region.
Eigen::MatrixXd chebyshev_basis(std::span<const double> x, std::size_t lo, std::size_t hi,
                                int degree) {
  const std::size_t m = hi - lo + 1;
  const double a = x[lo];
  const double b = x[hi];
  Eigen::MatrixXd t(m, degree + 1);
  for (std::size_t i = 0; i < m; ++i) {
    const double u = (2.0 * x[lo + i] - a - b) / (b - a);
    t(i, 0) = 1.0;
    if (degree >= 1) t(i, 1) = u;
    for (int j = 2; j <= degree; ++j) t(i, j) = 2.0 * u * t(i, j - 1) - t(i, j - 2);
  }
  return t;
}

struct AlsFit {
  Eigen::VectorXd c;
  double a;
  double b;
  double rss;
};

/// Least squares for y = (T c) (1 + a cos + b sin): linearized start (or `warm`),
/// then Gauss-Newton on the joint parameters.
AlsFit als(const Eigen::MatrixXd& t, const Eigen::VectorXd& y, const Eigen::VectorXd& cs,
           const Eigen::VectorXd& sn, const AlsFit* warm = nullptr) {
  const Eigen::Index m = t.rows();
  const Eigen::Index p = t.cols();
  Eigen::MatrixXd j(m, p + 2);
  Eigen::VectorXd c;
  double a = 0.0;
  double b = 0.0;
  if (warm) {
    c = warm->c;
    a = warm->a;
    b = warm->b;
  } else {
    j << t, cs, sn;
    const Eigen::VectorXd z = j.colPivHouseholderQr().solve(y);
    c = z.head(p);
    const double mean = (t * c).mean();
    a = mean != 0.0 ? z(p) / mean : 0.0;
    b = mean != 0.0 ? z(p + 1) / mean : 0.0;
  }

  Eigen::VectorXd env = t * c;
  Eigen::ArrayXd g = 1.0 + a * cs.array() + b * sn.array();
  double rss = (y.array() - env.array() * g).square().sum();
  for (int it = 0; it < 50; ++it) {
    j.leftCols(p) = t.array().colwise() * g;
    j.col(p) = env.array() * cs.array();
    j.col(p + 1) = env.array() * sn.array();
    const Eigen::VectorXd r = y.array() - env.array() * g;
    Eigen::MatrixXd normal = Eigen::MatrixXd::Zero(p + 2, p + 2);
    normal.selfadjointView<Eigen::Lower>().rankUpdate(j.transpose());
    const Eigen::VectorXd step =
        normal.selfadjointView<Eigen::Lower>().ldlt().solve(j.transpose() * r);
    const Eigen::VectorXd c_new = c + step.head(p);
    const double a_new = a + step(p);
    const double b_new = b + step(p + 1);
    const Eigen::VectorXd env_new = t * c_new;
    const Eigen::ArrayXd g_new = 1.0 + a_new * cs.array() + b_new * sn.array();
    const double rss_new = (y.array() - env_new.array() * g_new).square().sum();
    if (!(rss_new <= rss)) break;
    c = c_new;
    a = a_new;
    b = b_new;
    env = env_new;
    g = g_new;
    const double change = std::abs(step(p)) + std::abs(step(p + 1));
    rss = rss_new;
    if (change < 1e-13 * (1.0 + std::hypot(a, b))) break;
  }
  return {c, a, b, rss};
}

/// Wavenumber correction from the drift of the local fringe phase across blocks
/// of roughly two periods each.
double phase_slope(std::span<const double> x, std::span<const double> y, std::size_t lo,
                   std::size_t hi, double k, double x_ref) {
  const double dx = x[1] - x[0];
  const auto block = std::max<std::size_t>(8, static_cast<std::size_t>(2.0 * 2.0 * kPi / k / dx));
  std::vector<double> centers;
  std::vector<double> phases;
  std::vector<double> weights;
  for (std::size_t s = lo; s + block <= hi + 1; s += block) {
    Eigen::Matrix4d n = Eigen::Matrix4d::Zero();
    Eigen::Vector4d r = Eigen::Vector4d::Zero();
    const double xm = x[s + block / 2];
    for (std::size_t i = s; i < s + block; ++i) {
      const double u = x[i] - x_ref;
      const Eigen::Vector4d f(1.0, x[i] - xm, std::cos(k * u), std::sin(k * u));
      n += f * f.transpose();
      r += f * y[i];
    }
    const Eigen::Vector4d c = n.ldlt().solve(r);
    centers.push_back(xm - x_ref);
    phases.push_back(std::atan2(-c(3), c(2)));
    weights.push_back(c(2) * c(2) + c(3) * c(3));
  }
  if (centers.size() < 3) return 0.0;
  for (std::size_t i = 1; i < phases.size(); ++i) {
    double d = phases[i] - phases[i - 1];
    d -= 2.0 * kPi * std::round(d / (2.0 * kPi));
    phases[i] = phases[i - 1] + d;
  }
  double sw = 0.0;
  double sx = 0.0;
  double sp = 0.0;
  for (std::size_t i = 0; i < centers.size(); ++i) {
    sw += weights[i];
    sx += weights[i] * centers[i];
    sp += weights[i] * phases[i];
  }
  if (!(sw > 0.0)) return 0.0;
  const double mx = sx / sw;
  const double mp = sp / sw;
  double sxx = 0.0;
  double sxp = 0.0;
  for (std::size_t i = 0; i < centers.size(); ++i) {
    sxx += weights[i] * (centers[i] - mx) * (centers[i] - mx);
    sxp += weights[i] * (centers[i] - mx) * (phases[i] - mp);
  }
  return sxx > 0.0 ? sxp / sxx : 0.0;
}

}  // namespace

double fringe_spacing(double mass, double t2, double dx) {
  require(std::isfinite(mass) && mass > 0.0, "mass", "must be > 0");
  require(std::isfinite(t2) && t2 > 0.0, "protocol.t2", "must be > 0");
  require(std::isfinite(dx) && dx > 0.0, "protocol.delta_x", "must be > 0");
  return 2.0 * kPi * kHbar * t2 / (mass * dx);
}

std::vector<double> gaussian_smooth(std::span<const double> data, double sigma_samples) {
  require(std::isfinite(sigma_samples) && sigma_samples >= 0.0, "sigma", "must be >= 0");
  std::vector<double> out(data.begin(), data.end());
  if (sigma_samples == 0.0 || data.empty()) return out;
  const auto hw = static_cast<std::size_t>(std::ceil(6.0 * sigma_samples));
  std::vector<double> w(2 * hw + 1);
  for (std::size_t j = 0; j < w.size(); ++j) {
    const double u = (static_cast<double>(j) - static_cast<double>(hw)) / sigma_samples;
    w[j] = std::exp(-0.5 * u * u);
  }
  const double ws = std::accumulate(w.begin(), w.end(), 0.0);
  for (auto& v : w) v /= ws;
  const std::size_t n = data.size();

  if (hw <= kDirectKernelLimit) {
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      const std::size_t j0 = i >= hw ? 0 : hw - i;
      const std::size_t j1 = std::min(2 * hw, hw + (n - 1 - i));
      for (std::size_t j = j0; j <= j1; ++j) s += w[j] * data[i + j - hw];
      out[i] = s;
    }
    return out;
  }

  const std::size_t m = std::bit_ceil(n + 2 * hw);
  std::vector<complex> fd(m);
  std::vector<complex> fk(m);
  for (std::size_t i = 0; i < n; ++i) fd[i] = data[i];
  for (std::size_t j = 0; j < w.size(); ++j) fk[(j + m - hw) % m] = w[j];
  gridprop::fft_forward(fd);
  gridprop::fft_forward(fk);
  for (std::size_t j = 0; j < m; ++j) fd[j] *= fk[j];
  gridprop::fft_inverse(fd);
  for (std::size_t i = 0; i < n; ++i) out[i] = fd[i].real();
  return out;
}

PatternTerms pattern_terms(const PreparedState& state, double t2, double mass,
                           const DetectionOptions& options) {
  require(std::isfinite(t2) && t2 > 0.0, "protocol.t2", "must be > 0");
  require(mass > 0.0, "mass", "must be > 0");
  require(options.samples_per_fringe >= 8, "detection.samples_per_fringe", "must be >= 8");
  const auto evolved = wavepacket::free_evolve(state.ensemble, t2, mass);
  const auto& comps = evolved.components();
  if (state.notched) {
    require(state.notched_component < comps.size(), "notched_component", "out of range");
  }

  const auto pair = dominant_pair(comps);
  const double hint = pair ? local_period(pair->a, pair->b) : 0.0;
  const double fringe_dx = hint > 0.0 ? hint / static_cast<double>(options.samples_per_fringe)
                                      : std::numeric_limits<double>::infinity();

  PatternTerms out{{}, {}, {}, hint, false};

  if (!state.notched) {
    double lo = INFINITY;
    double hi = -INFINITY;
    double narrowest = INFINITY;
    for (const auto& c : comps) {
      for (const auto& b : c.branches) {
        const double s = b.position_sigma();
        lo = std::min(lo, b.x0() - options.span_sigmas * s);
        hi = std::max(hi, b.x0() + options.span_sigmas * s);
        narrowest = std::min(narrowest, s);
      }
    }
    const double dx = std::min(fringe_dx, narrowest / 8.0);
    const double center = 0.5 * (lo + hi);
    const double half = 0.5 * (hi - lo);
    const double cells = std::ceil(2.0 * half / dx);
    if (!(cells + 1.0 <= static_cast<double>(options.max_samples))) {
      throw NumericalError("detection pattern unresolvable: needs " + fmt_double(cells + 1.0) +
                           " samples (limit " + std::to_string(options.max_samples) + ")");
    }
    const auto n = static_cast<std::size_t>(cells) + 1;
    const double step = 2.0 * half / cells;
    out.x.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      out.x[i] = center + (static_cast<double>(i) - 0.5 * static_cast<double>(n - 1)) * step;
    }
    out.incoherent.assign(n, 0.0);
    out.cross.assign(n, 0.0);
    for (const auto& c : comps) add_branch_terms(c, out.x, out.incoherent, out.cross);
    return out;
  }

  // Grid path: the notched component is propagated on its grid.
  const auto& notch = *state.notched;
  const double magnification = notch.chirp_time == 0.0 ? 1.0 : 1.0 + t2 / notch.chirp_time;
  std::size_t factor = 1;
  if (std::isfinite(fringe_dx)) {
    const double need = fringe_dx / magnification;
    while (notch.left.dx() / static_cast<double>(factor) > need) factor *= 2;
  }
  if (notch.left.size() * factor > options.max_samples) {
    throw NumericalError("detection pattern unresolvable: grid path needs " +
                         std::to_string(notch.left.size() * factor) + " samples (limit " +
                         std::to_string(options.max_samples) + ")");
  }
  const auto left = evolve_lobe(refine(notch.left, factor), notch.chirp_time, mass, t2);
  const auto right = evolve_lobe(refine(notch.right, factor), notch.chirp_time, mass, t2);
  const std::size_t n = left.size();
  out.grid_path = true;
  out.x.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.x[i] = left.x(i);
  out.incoherent.assign(n, 0.0);
  out.cross.assign(n, 0.0);
  const double w = comps[state.notched_component].weight;
  for (std::size_t i = 0; i < n; ++i) {
    const complex l = left.psi()[i];
    const complex r = right.psi()[i];
    out.incoherent[i] = w * (std::norm(l) + std::norm(r));
    out.cross[i] = w * 2.0 * (std::conj(l) * r).real();
  }
  for (std::size_t c = 0; c < comps.size(); ++c) {
    if (c != state.notched_component) add_branch_terms(comps[c], out.x, out.incoherent, out.cross);
  }
  return out;
}

VisibilityFit extract_visibility(std::span<const double> x, std::span<const double> density,
                                 double spacing_hint, bool check_residual) {
  require(x.size() == density.size(), "pattern", "x and density sizes differ");
  const double dx = uniform_step(x);
  require(std::isfinite(spacing_hint) && spacing_hint > 0.0, "spacing_hint", "must be > 0");
  if (spacing_hint / dx < kMinSamplesPerFringe) {
    throw NumericalError("fringes unresolvable: " + fmt_double(spacing_hint / dx) +
                         " samples per period (need >= 8)");
  }

  if (2.0 * spacing_hint > x.back() - x.front()) {
    throw NumericalError("fringe period " + fmt_double(spacing_hint) +
                         " m exceeds half the pattern width " + fmt_double(x.back() - x.front()) +
                         " m: no resolvable fringes");
  }
  const auto env = gaussian_smooth(density, spacing_hint / dx);
  const auto peak_it = std::max_element(env.begin(), env.end());
  if (!(*peak_it > 0.0)) throw NumericalError("pattern has no positive density");
  std::size_t lo = 0;
  while (env[lo] < 0.5 * *peak_it) ++lo;
  std::size_t hi = env.size() - 1;
  while (env[hi] < 0.5 * *peak_it) --hi;
  const double periods = (x[hi] - x[lo]) / spacing_hint;
  if (periods < 2.0) {
    throw NumericalError("fewer than two fringe periods inside the half-max envelope");
  }
  const int degree = std::clamp(static_cast<int>(periods / 3.0), 2, 12);

  const double x_ref = 0.5 * (x[lo] + x[hi]);
  const Eigen::MatrixXd t = chebyshev_basis(x, lo, hi, degree);
  const Eigen::Index m = t.rows();
  Eigen::VectorXd y(m);
  for (Eigen::Index i = 0; i < m; ++i) y(i) = density[lo + static_cast<std::size_t>(i)];

  const double k0 = 2.0 * kPi / spacing_hint;
  double k = k0;
  for (int pass = 0; pass < 3; ++pass) {
    k += phase_slope(x, density, lo, hi, k, x_ref);
    k = std::clamp(k, 0.98 * k0, 1.02 * k0);
  }

  // Neighbouring probes start from the previous solution.
  std::optional<AlsFit> warm;
  const auto fit_at = [&](double kk) {
    Eigen::VectorXd cs(m);
    Eigen::VectorXd sn(m);
    for (Eigen::Index i = 0; i < m; ++i) {
      const double u = x[lo + static_cast<std::size_t>(i)] - x_ref;
      cs(i) = std::cos(kk * u);
      sn(i) = std::sin(kk * u);
    }
    warm = als(t, y, cs, sn, warm ? &*warm : nullptr);
    return *warm;
  };

  // Golden-section polish of the residual in a window narrower than one fringe drift.
  const double half_window = std::min(0.02, 0.25 / periods) * k0;
  double a = std::max(k - half_window, 0.98 * k0);
  double b = std::min(k + half_window, 1.02 * k0);
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double c1 = b - g * (b - a);
  double c2 = a + g * (b - a);
  double f1 = fit_at(c1).rss;
  double f2 = fit_at(c2).rss;
  for (int it = 0; it < 16; ++it) {
    if (f1 < f2) {
      b = c2;
      c2 = c1;
      f2 = f1;
      c1 = b - g * (b - a);
      f1 = fit_at(c1).rss;
    } else {
      a = c1;
      c1 = c2;
      f1 = f2;
      c2 = a + g * (b - a);
      f2 = fit_at(c2).rss;
    }
  }
  const double k_mid = 0.5 * (a + b);
  AlsFit best = fit_at(k);
  double k_best = k;
  for (double kk : {k_mid, c1, c2}) {
    AlsFit f = fit_at(kk);
    if (f.rss < best.rss) {
      best = std::move(f);
      k_best = kk;
    }
  }

  double ymax = 0.0;
  for (Eigen::Index i = 0; i < m; ++i) ymax = std::max(ymax, y(i));
  const double residual = std::sqrt(best.rss / static_cast<double>(m)) / ymax;
  if (check_residual && residual > kMaxResidual) {
    throw NumericalError("visibility fit residual " + fmt_double(residual) +
                         " exceeds 5% of the peak density");
  }
  const double v = std::clamp(std::hypot(best.a, best.b), 0.0, 1.0);
  return {v, 2.0 * kPi / k_best, residual, x[lo], x[hi], degree};
}

InterferencePattern assemble(const PatternTerms& terms, double coherence, double readout_blur) {
  require(std::isfinite(coherence) && coherence >= 0.0 && coherence <= 1.0 + 1e-12, "coherence",
          "must lie in [0, 1]");
  require(std::isfinite(readout_blur) && readout_blur >= 0.0, "detection.readout_blur",
          "must be >= 0");
  const std::size_t n = terms.x.size();
  const double dx = uniform_step(terms.x);
  if (!(terms.fringe_hint > 0.0)) {
    throw NumericalError("single-envelope pattern: no coherent branch pair, visibility undefined");
  }
  if (terms.fringe_hint < 4.0 * dx) {
    throw NumericalError("fringe spacing " + fmt_double(terms.fringe_hint) +
                         " m is below 4 grid steps");
  }

  InterferencePattern out;
  out.x = terms.x;
  out.density.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.density[i] = std::max(0.0, terms.incoherent[i] + coherence * terms.cross[i]);
  }
  if (readout_blur > 0.0) out.density = gaussian_smooth(out.density, readout_blur / dx);
  const double total = std::accumulate(out.density.begin(), out.density.end(), 0.0) * dx;
  if (!(total > 0.0)) throw NumericalError("pattern has zero total probability");
  for (auto& d : out.density) d /= total;

  out.nominal_spacing = terms.fringe_hint;
  out.coherence = coherence;
  if (terms.fringe_hint < 2.0 * readout_blur) {
    out.warnings.push_back("blur-dominated: fringe spacing " + fmt_double(terms.fringe_hint) +
                           " m is below twice the readout blur");
  }
  const VisibilityFit fit = extract_visibility(out.x, out.density, terms.fringe_hint);
  out.visibility = fit.visibility;
  out.fringe_spacing = fit.fringe_spacing;
  out.fit_residual = fit.residual;
  return out;
}

InterferencePattern detect(const PreparedState& state, double t2, double mass,
                           double decay_quantum, double decay_collapse, double phase_jitter,
                           double readout_blur, const DetectionOptions& options) {
  require(decay_quantum >= 0.0 && decay_quantum <= 1.0, "decay_quantum", "must lie in [0, 1]");
  require(decay_collapse >= 0.0 && decay_collapse <= 1.0, "decay_collapse", "must lie in [0, 1]");
  const double jitter = prepare::phase_jitter_factor(phase_jitter);
  return assemble(pattern_terms(state, t2, mass, options), decay_quantum * decay_collapse * jitter,
                  readout_blur);
}

MonteCarloResult monte_carlo_visibility(const InterferencePattern& pattern,
                                        const MonteCarloOptions& options) {
  require(options.draws >= 1000, "detection.monte_carlo.draws", "must be >= 1000");
  require(options.batches >= 2, "detection.monte_carlo.batches", "must be >= 2");
  const std::size_t n = pattern.x.size();
  const double dx = uniform_step(pattern.x);
  std::vector<double> cdf(n);
  std::partial_sum(pattern.density.begin(), pattern.density.end(), cdf.begin());
  const double total = cdf.back();
  for (auto& c : cdf) c /= total;

  // Explicit 53-bit conversion keeps draws identical across standard libraries.
  std::mt19937_64 rng(options.seed);
  const auto uniform = [&rng] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };

  MonteCarloResult out{0.0, 0.0, {}};
  std::vector<double> hist(n);
  for (std::size_t b = 0; b < options.batches; ++b) {
    std::fill(hist.begin(), hist.end(), 0.0);
    for (std::size_t d = 0; d < options.draws; ++d) {
      const auto it = std::upper_bound(cdf.begin(), cdf.end(), uniform());
      hist[std::min<std::size_t>(static_cast<std::size_t>(it - cdf.begin()), n - 1)] += 1.0;
    }
    for (auto& h : hist) h /= static_cast<double>(options.draws) * dx;
    const VisibilityFit fit = extract_visibility(pattern.x, hist, pattern.fringe_spacing, false);
    out.batch_visibilities.push_back(fit.visibility);
  }
  const double nb = static_cast<double>(options.batches);
  out.mean = std::accumulate(out.batch_visibilities.begin(), out.batch_visibilities.end(), 0.0) / nb;
  double var = 0.0;
  for (double v : out.batch_visibilities) var += (v - out.mean) * (v - out.mean);
  out.stddev = std::sqrt(var / (nb - 1.0));
  return out;
}

}  // namespace decide::interference
