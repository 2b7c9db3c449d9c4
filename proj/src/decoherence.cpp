#include "decide/decoherence.hpp"

#include <algorithm>
#include <boost/math/special_functions/zeta.hpp>
#include <cmath>

#include "decide/error.hpp"
#include "decide/numfmt.hpp"
#include "decide/quadrature.hpp"

namespace decide::decoherence {

using detail::require;

namespace {

constexpr double kHbar = kConstants.hbar;
constexpr double kB = kConstants.k_B;
constexpr double kC = kConstants.c;

/// integral_0^inf x^n / (e^x - 1) dx by quadrature.
double bose_integral(int n) {
  const auto f = [n](double x) {
    if (x == 0.0) return n == 1 ? 1.0 : 0.0;
    const double d = std::expm1(x);
    return std::isinf(d) ? 0.0 : std::pow(x, n) / d;
  };
  return quad::integrate_to_infinity(f, 0.0, 1e-13).value;
}

// Each moment is needed over and over in sweeps; compute once.
double bose(int n) {
  static const double b3 = bose_integral(3);
  static const double b4 = bose_integral(4);
  static const double b6 = bose_integral(6);
  switch (n) {
    case 3: return b3;
    case 4: return b4;
    case 6: return b6;
    default: return bose_integral(n);
  }
}

double thermal_wavenumber(double temperature) { return kB * temperature / (kHbar * kC); }

void check_temperature(double t, const char* field) {
  require(std::isfinite(t) && t >= 0.0, field, "must be >= 0 K");
}

LocalizationChannel absorption_like(ChannelName name, const Particle& particle, double temperature) {
  const double im_cm = clausius_mossotti(particle.eps_bb()).imag();
  if (temperature == 0.0 || im_cm == 0.0) return {name, 0.0, 0.0};
  const double r3 = std::pow(particle.radius(), 3);
  const double kt = thermal_wavenumber(temperature);
  const double lambda = 16.0 * std::pow(kPi, 5) * kC * r3 / 189.0 * std::pow(kt, 6) * im_cm;
  // Absorption event rate: integral c n(w) sigma_abs(w) dw.
  const double gamma = 4.0 / kPi * r3 * im_cm * kC * std::pow(kt, 4) * bose(3);
  return {name, lambda, gamma};
}

}  // namespace

std::string_view to_string(ChannelName name) {
  switch (name) {
    case ChannelName::BBScatter: return "bb_scatter";
    case ChannelName::BBAbsorb: return "bb_absorb";
    case ChannelName::BBEmit: return "bb_emit";
    case ChannelName::Gas: return "gas";
    case ChannelName::CSL: return "csl";
    case ChannelName::DP: return "dp";
    case ChannelName::K: return "k";
  }
  return "unknown";
}

double LocalizationChannel::rate(double separation) const {
  return std::min(Lambda * separation * separation, gamma_sat);
}

LocalizationChannel bb_scatter(const Particle& particle, double temperature) {
  check_temperature(temperature, "environment.temperature");
  const double re_cm = clausius_mossotti(particle.eps_bb()).real();
  if (temperature == 0.0 || re_cm == 0.0) return {ChannelName::BBScatter, 0.0, 0.0};
  const double r6 = std::pow(particle.radius(), 6);
  const double kt = thermal_wavenumber(temperature);
  const double a2 = re_cm * re_cm;
  const double lambda = 40320.0 * boost::math::zeta(9.0) * 8.0 * kC * r6 / (9.0 * kPi) *
                        std::pow(kt, 9) * a2;
  const double gamma = 8.0 / (3.0 * kPi) * r6 * a2 * kC * std::pow(kt, 7) * bose(6);
  return {ChannelName::BBScatter, lambda, gamma};
}

LocalizationChannel bb_absorb(const Particle& particle, double temperature) {
  check_temperature(temperature, "environment.temperature");
  return absorption_like(ChannelName::BBAbsorb, particle, temperature);
}

LocalizationChannel bb_emit(const Particle& particle) {
  return absorption_like(ChannelName::BBEmit, particle, particle.internal_temperature());
}

GasCollisions gas_collisions(const Particle& particle, const Environment& env, double run_time) {
  require(std::isfinite(run_time) && run_time >= 0.0, "run_time", "must be >= 0 s");
  const double n = env.pressure() / (kB * env.temperature());
  const double v = std::sqrt(8.0 * kB * env.temperature() / (kPi * env.gas_mass()));
  const double rate = n * v * kPi * particle.radius() * particle.radius();
  const double events = rate * run_time;
  return {rate, events, std::exp(-events)};
}

double emitted_power(const Particle& particle, double temperature) {
  check_temperature(temperature, "temperature");
  if (temperature == 0.0) return 0.0;
  // sigma_abs(w) = 4 pi (w / c) R^3 Im CM against the spectral energy flux hbar w^3 / (pi^2 c^2).
  const double im_cm = clausius_mossotti(particle.eps_bb()).imag();
  const double r3 = std::pow(particle.radius(), 3);
  const double w = kB * temperature / kHbar;
  return 4.0 * kPi * r3 * im_cm / kC * kHbar / (kPi * kPi * kC * kC) * std::pow(w, 5) * bose(4);
}

double absorbing_imag_eps(complex eps_trap, double bulk_absorption, double wavelength) {
  const double n_r = std::sqrt(eps_trap).real();
  return n_r * bulk_absorption * wavelength / (2.0 * kPi);
}

double absorption_cross_section(double radius, complex eps, double wavelength) {
  const double k = 2.0 * kPi / wavelength;
  return 4.0 * kPi * k * std::pow(radius, 3) * clausius_mossotti(eps).imag();
}

InternalTemperature internal_temperature_equilibrium(const Particle& particle, const Trap& trap,
                                                     double env_temperature,
                                                     double bulk_absorption) {
  require(std::isfinite(env_temperature) && env_temperature > 0.0, "environment.temperature",
          "must be > 0 K");
  require(std::isfinite(bulk_absorption) && bulk_absorption >= 0.0, "particle.bulk_absorption",
          "must be >= 0 1/m");
  const double im_eps = absorbing_imag_eps(particle.eps_trap(), bulk_absorption, trap.wavelength());
  const complex eps(particle.eps_trap().real(), im_eps);
  const double p_abs =
      trap.intensity() * absorption_cross_section(particle.radius(), eps, trap.wavelength());

  InternalTemperature out{env_temperature, p_abs, im_eps, 0.0, {env_temperature, env_temperature}, 0};
  if (p_abs == 0.0) return out;

  const double p_env = emitted_power(particle, env_temperature);
  const auto balance = [&](double t) { return emitted_power(particle, t) - p_env - p_abs; };

  double lo = env_temperature;
  double hi = 2.0 * env_temperature;
  int expansions = 0;
  while (balance(hi) < 0.0) {
    lo = hi;
    hi *= 2.0;
    if (++expansions > 60) {
      throw NumericalError("internal temperature: no power balance in bracket [" +
                           fmt_double(env_temperature) + ", " + fmt_double(hi) +
                           "] K (particle cannot radiate the absorbed power)");
    }
  }
  out.bracket = {lo, hi};
  int it = 0;
  while (hi - lo > 1e-14 * hi && it < 200) {
    const double mid = 0.5 * (lo + hi);
    if (balance(mid) < 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
    ++it;
  }
  out.temperature = 0.5 * (lo + hi);
  out.iterations = it;
  out.residual = std::abs(balance(out.temperature)) / p_abs;
  if (!(out.residual < 1e-6)) {
    throw NumericalError("internal temperature: bisection residual " + fmt_double(out.residual) +
                         " in bracket [" + fmt_double(lo) + ", " + fmt_double(hi) + "] K");
  }
  return out;
}

SeparationPath::SeparationPath(std::vector<Knot> knots) : knots_(std::move(knots)) {
  require(knots_.size() >= 2, "separation_path", "needs at least two knots");
  for (std::size_t i = 0; i < knots_.size(); ++i) {
    require(std::isfinite(knots_[i].t) && std::isfinite(knots_[i].dx), "separation_path",
            "knots must be finite");
    require(knots_[i].dx >= 0.0, "separation_path", "separation must be >= 0");
    if (i > 0) {
      require(knots_[i].t >= knots_[i - 1].t, "separation_path", "knot times must not decrease");
    }
  }
  require(knots_.back().t > knots_.front().t, "separation_path", "path has zero length");
}

SeparationPath SeparationPath::nominal(double t1, double t2, double dx) {
  return SeparationPath({{0.0, 0.0}, {t1, 0.0}, {t1, dx}, {t1 + t2, dx}});
}

SeparationPath SeparationPath::linear(double t1, double t2, double dx, double relative_velocity) {
  const double end = dx + relative_velocity * t2;
  if (end >= 0.0) return SeparationPath({{0.0, 0.0}, {t1, 0.0}, {t1, dx}, {t1 + t2, end}});
  // Branches cross: |dx + v t| has a kink at the crossing.
  const double tc = t1 - dx / relative_velocity;
  return SeparationPath({{0.0, 0.0}, {t1, 0.0}, {t1, dx}, {tc, 0.0}, {t1 + t2, -end}});
}

double SeparationPath::at(double t) const {
  if (t <= knots_.front().t) return knots_.front().dx;
  if (t >= knots_.back().t) return knots_.back().dx;
  // Last knot with knot.t <= t gives the right-hand limit at jumps.
  const auto it = std::upper_bound(knots_.begin(), knots_.end(), t,
                                   [](double v, const Knot& k) { return v < k.t; });
  const Knot& b = *it;
  const Knot& a = *(it - 1);
  if (b.t == a.t) return b.dx;
  return a.dx + (b.dx - a.dx) * (t - a.t) / (b.t - a.t);
}

double SeparationPath::max_separation() const {
  double m = 0.0;
  for (const auto& k : knots_) m = std::max(m, k.dx);
  return m;
}

double integrated_exponent(const SeparationPath& path, const RateFunction& rate, double from,
                           double to) {
  require(from >= path.start() && to <= path.end() + 1e-12 * std::abs(path.end()),
          "separation_path", "integration window outside the defined path");
  if (!(to > from)) return 0.0;
  const auto& k = path.knots();
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < k.size(); ++i) {
    const double a = std::max(k[i].t, from);
    const double b = std::min(k[i + 1].t, to);
    if (!(b > a)) continue;
    const double span = k[i + 1].t - k[i].t;
    const auto dx_at = [&](double t) {
      return k[i].dx + (k[i + 1].dx - k[i].dx) * (t - k[i].t) / span;
    };
    if (k[i].dx == k[i + 1].dx) {
      total += rate(k[i].dx) * (b - a);
      continue;
    }
    total += quad::integrate([&](double t) { return rate(dx_at(t)); }, a, b, 1e-10,
                             1e-300)
                 .value;
  }
  return total;
}

DecayResult visibility_decay(const SeparationPath& path,
                             const std::vector<LocalizationChannel>& channels, double duration,
                             double thermal_length) {
  require(std::isfinite(duration) && duration >= 0.0, "duration", "must be >= 0 s");
  require(path.start() <= 0.0 && path.end() >= duration * (1.0 - 1e-12), "separation_path",
          "path does not cover [0, duration]");
  DecayResult out{1.0, 0.0, {}};
  for (const auto& ch : channels) {
    require(ch.Lambda >= 0.0 && ch.gamma_sat >= 0.0, "channel", "Lambda and gamma must be >= 0");
    if (ch.Lambda == 0.0 || ch.gamma_sat == 0.0) continue;
    // min(Lambda s^2, gamma) is piecewise smooth; the saturated part is constant.
    out.exponent += integrated_exponent(
        path, [&ch](double s) { return ch.rate(s); }, 0.0, std::min(duration, path.end()));
  }
  out.factor = std::exp(-out.exponent);
  if (path.max_separation() > thermal_length / 10.0) {
    out.warnings.push_back("long-wavelength limit questionable: separation " +
                           fmt_double(path.max_separation()) + " m exceeds thermal wavelength/10 (" +
                           fmt_double(thermal_length / 10.0) + " m)");
  }
  return out;
}

double DecoherenceBudget::factor() const { return std::exp(-(total_t1 + total_t2)); }

void DecoherenceBudget::add(const BudgetEntry& e) {
  entries.push_back(e);
  total_t1 += e.exponent_t1;
  total_t2 += e.exponent_t2;
}

DecoherenceBudget make_budget(const std::vector<LocalizationChannel>& channels,
                              const SeparationPath& path, double t1, double t2) {
  DecoherenceBudget budget;
  for (const auto& ch : channels) {
    const auto rate = [&ch](double s) { return ch.rate(s); };
    budget.add({ch.name, ch.Lambda, ch.gamma_sat, integrated_exponent(path, rate, 0.0, t1),
                integrated_exponent(path, rate, t1, t1 + t2)});
  }
  return budget;
}

}  // namespace decide::decoherence
