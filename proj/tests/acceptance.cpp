// Acceptance suite: one PASS/FAIL line per criterion; nonzero exit on any failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

#include "cli_runner.hpp"
#include "decide/collapse.hpp"
#include "decide/decoherence.hpp"
#include "decide/error.hpp"
#include "decide/gridprop.hpp"
#include "decide/interference.hpp"
#include "decide/requirements.hpp"
#include "decide/scenario_io.hpp"
#include "decide/wavepacket.hpp"
#include "fixture.hpp"
#include "oracles.hpp"

using namespace decide;
using wavepacket::BranchEnsemble;
using wavepacket::GaussianBranch;
using nlohmann::json;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

// 1. Released ground-state expansion velocity.
Outcome expansion() {
  const double v = wavepacket::expansion_velocity(1e-17, 63000.0);
  const double ref = std::sqrt(oracle::hbar * 63000.0 / (2 * 1e-17));
  const bool ok = oracle::rel(v, 5.8e-7) < 0.01 && oracle::rel(v, ref) < 1e-12;
  return {ok, "v = " + num(v) + " m/s, target 5.8e-07 +- 1%"};
}

// 2. Closed-form free evolution against spectral grid propagation.
std::vector<GaussianBranch> random_state(std::mt19937_64& rng, int branches, double sigma0) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<GaussianBranch> out;
  for (int i = 0; i < branches; ++i) {
    const double s = sigma0 * sigma0 * (1.25 + 0.75 * u(rng));
    const double p0 = oracle::hbar / sigma0 * 0.5 * u(rng);
    out.emplace_back(sigma0 * (8.0 * i + u(rng)), p0, complex(s, 0.3 * s * u(rng)),
                     std::polar(1.0, oracle::pi * u(rng)));
  }
  return wavepacket::normalized(out);
}

double moment_change(const gridprop::Moments& a, const gridprop::Moments& b) {
  const double sx = std::sqrt(b.var_x);
  const double sp = std::sqrt(b.var_p);
  return std::max({std::abs(a.mean_x - b.mean_x) / sx, oracle::rel(a.var_x, b.var_x),
                   std::abs(a.mean_p - b.mean_p) / sp, oracle::rel(a.var_p, b.var_p),
                   std::abs(a.cov_xp - b.cov_xp) / (sx * sp)});
}

Outcome oracle_equivalence() {
  constexpr double kMass = 1e-17;
  std::mt19937_64 rng(2024);
  double worst_l2 = 0.0;
  double worst_gate = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const auto b = random_state(rng, 1 + trial % 4, 1e-11);
    const double t = 2e-5 * (1 + trial);
    auto spec = gridprop::default_grid(b, kMass, t);
    // Convergence gate: refine until doubling n moves no moment by 1e-6.
    for (;;) {
      const gridprop::GridSpec fine{spec.x_min, spec.x_max, 2 * spec.n};
      const double change =
          moment_change(gridprop::moments(gridprop::propagate(gridprop::sample(b, spec), kMass, t)),
                        gridprop::moments(gridprop::propagate(gridprop::sample(b, fine), kMass, t)));
      if (change < 1e-6) {
        worst_gate = std::max(worst_gate, change);
        break;
      }
      if (fine.n > (std::size_t{1} << 22)) return {false, "grid did not converge on trial " + std::to_string(trial)};
      spec = fine;
    }
    const auto grid = gridprop::propagate(gridprop::sample(b, spec), kMass, t);
    const auto closed = wavepacket::free_evolve(BranchEnsemble::pure(b), t, kMass);
    const auto ref = gridprop::sample(closed.components()[0].branches, spec);
    worst_l2 = std::max(worst_l2, gridprop::l2_distance(grid.psi(), ref.psi(), spec.dx()));
  }
  return {worst_l2 < 1e-8, "50 states, worst L2 " + num(worst_l2) + " (< 1e-8), worst gate change " + num(worst_gate)};
}

// 3. Blackbody scaling laws.
Outcome scaling_laws() {
  const Particle p(100e-9, 2300.0, {2.1, 0.0}, {2.1, 0.57}, 12.0);
  double worst = 0.0;
  for (double t : {4.0, 16.0, 64.0}) {
    worst = std::max(worst, std::abs(decoherence::bb_scatter(p, 2 * t).Lambda /
                                         decoherence::bb_scatter(p, t).Lambda / 512.0 - 1.0));
    worst = std::max(worst, std::abs(decoherence::bb_absorb(p, 2 * t).Lambda /
                                         decoherence::bb_absorb(p, t).Lambda / 64.0 - 1.0));
  }
  return {worst < 1e-12, "worst relative error of the 512 and 64 ratios " + num(worst)};
}

// 4. Visibility identities on a far-field double slit.
Outcome visibility_identities() {
  using namespace interference;
  constexpr double kMass = 1e-17;
  constexpr double kSigma = 1e-9;
  const double t2 = 2000 * 2 * kMass * kSigma * kSigma / oracle::hbar;
  const auto pair = wavepacket::normalized(std::vector<GaussianBranch>{
      GaussianBranch(-50e-9, 0.0, kSigma * kSigma, 1.0), GaussianBranch(50e-9, 0.0, kSigma * kSigma, 1.0)});
  const auto terms = pattern_terms({BranchEnsemble::pure(pair), std::nullopt, 0}, t2, kMass);
  const double v1 = assemble(terms, 1.0, 0.0).visibility;
  const double v0 = assemble(terms, 0.0, 0.0).visibility;
  bool ok = std::abs(v1 - 1.0) < 1e-3 && v0 < 1e-3;
  std::string detail = "ideal " + num(v1) + ", decohered " + num(v0);
  for (double beta : {0.25, 0.5, 0.9}) {
    const BranchEnsemble mix({{1 - beta, pair},
                              {beta / 2, {pair[0].with_amp(1.0)}},
                              {beta / 2, {pair[1].with_amp(1.0)}}});
    const double v = assemble(pattern_terms({mix, std::nullopt, 0}, t2, kMass), 1.0, 0.0).visibility;
    ok = ok && std::abs(v - (1 - beta)) < 1e-2;
    detail += ", beta " + num(beta) + " -> " + num(v);
  }
  // The full protocol with every channel off, and with gas collisions overwhelming.
  const double vp = run_protocol(fixture::scenario(fixture::ideal_json())).v_quantum;
  auto dense = fixture::ideal_json();
  dense["environment"]["channels"]["gas"] = true;
  dense["environment"]["pressure"] = "1e-9 Pa";
  const double vd = run_protocol(fixture::scenario(dense)).v_quantum;
  ok = ok && std::abs(vp - 1.0) < 1e-3 && vd < 1e-3;
  return {ok, detail + "; protocol ideal " + num(vp) + ", protocol decohered " + num(vd)};
}

// 5. Requirement band on the baseline scenario.
Outcome requirement_band() {
  using namespace requirements;
  const auto s = io::load_scenario(std::string(DECIDE_SOURCE_DIR) + "/scenarios/baseline.json").scenario;
  const auto prepared = prepare_run(s);
  const auto env = invert(s, prepared, Axis::EnvTemp, std::nullopt, {5.0, 40.0});
  const auto internal = invert(s, prepared, Axis::InternalTemp, std::nullopt, {5.0, 60.0});
  bool ok = true;
  for (const auto& r : {env, internal}) {
    ok = ok && r.critical_value >= 10.0 && r.critical_value <= 30.0 && r.forward_check_residual < 1e-3;
  }
  return {ok, "T_env " + num(env.critical_value) + " K (residual " + num(env.forward_check_residual) +
                  "), T_i " + num(internal.critical_value) + " K (residual " +
                  num(internal.forward_check_residual) + "), threshold " + num(env.threshold_used)};
}

// 6. Gas collision rate.
Outcome gas_rate() {
  const Particle p(120e-9, 2300.0, {2.1, 0.0}, {2.1, 0.57}, 16.0);
  const Environment env(16.0, 1e-13, 2 * oracle::amu);
  const double rate = decoherence::gas_collisions(p, env, 1.0).rate;
  const double n = 1e-13 / (oracle::kB * 16.0);
  const double vbar = std::sqrt(8 * oracle::kB * 16.0 / (oracle::pi * 2 * oracle::amu));
  const double ref = n * vbar * oracle::pi * 120e-9 * 120e-9;
  bool linear = true;
  for (double f : {2.0, 4.0, 0.5, 0.25}) {
    linear = linear && decoherence::gas_collisions(p, env.with_pressure(f * 1e-13), 1.0).rate == f * rate;
  }
  const bool ok = oracle::rel(rate, 8.4e-3) < 0.02 && oracle::rel(rate, ref) < 1e-12 && linear;
  return {ok, "rate " + num(rate) + " 1/s, oracle " + num(ref) + ", linear in p: " + (linear ? "exact" : "no")};
}

// 7. Thruster force noise to acceleration noise.
Outcome thruster() {
  const auto t = requirements::thruster_accel_noise(1e-6, 700.0);
  const double exact = 1e-6 / 700.0;
  // The quoted 1.43e-9 is F/M to three significant figures; the 1e-12 tolerance applies to F/M.
  const bool ok = std::abs(t.acceleration_noise - exact) < 1e-12 &&
                  std::abs(std::round(t.acceleration_noise * 1e11) / 1e11 - 1.43e-9) < 1e-15 &&
                  t.quoted_bound == 1.6e-9 && t.discrepancy_flag;
  return {ok, "a = " + num(t.acceleration_noise) + " m/s^2/sqrt(Hz), quoted " + num(t.quoted_bound) +
                  ", discrepancy " + num(100 * t.relative_discrepancy) + "% flagged"};
}

// 8. Collapse-model structure.
Outcome collapse_structure() {
  using namespace collapse;
  const Particle p(100e-9, 2300.0, {2.1, 0.0}, {2.1, 0.57}, 12.0);
  CollapseParams params;
  params.csl_enabled = true;
  const double rc = params.csl_rc;
  const double c0 = csl_small_dx_coefficient(p, params);
  double onset = 0.0;
  for (double f : {1e-3, 1e-2, 3e-2}) {
    onset = std::max(onset, oracle::rel(csl_rate(p, f * rc, params) / (f * rc * f * rc), c0));
  }
  const double plateau = oracle::rel(csl_rate(p, 100 * rc, params), csl_plateau(p, params));
  const double r = p.radius();
  const double dp_gap = oracle::rel(dp_rate(p, 2 * r * (1 - 1e-12), params), dp_rate(p, 2 * r, params));
  const bool zeros = csl_rate(p, 0.0, params) == 0.0 && dp_rate(p, 0.0, params) == 0.0 && k_rate(p, 0.0).rate == 0.0;
  const bool ok = onset < 0.01 && plateau < 0.01 && dp_gap < 1e-6 && zeros;
  return {ok, "CSL onset " + num(onset) + ", plateau " + num(plateau) + ", DP jump at 2R " + num(dp_gap) +
                  ", zero at dx = 0: " + (zeros ? "yes" : "no")};
}

// 9. Internal-temperature power balance.
double emitted_power_closed(double r, complex eps, double t) {
  // sigma(w) = 4 pi (w/c) R^3 Im CM against the Planck spectrum: integral of w^4/(e^x - 1)
  // is 24 zeta(5) (kT/hbar)^5.
  constexpr double zeta5 = 1.0369277551433699;
  const double im = ((eps - 1.0) / (eps + 2.0)).imag();
  return 4 * oracle::pi * r * r * r * im / oracle::c * oracle::hbar / (oracle::pi * oracle::pi * oracle::c * oracle::c) *
         std::pow(oracle::kB * t / oracle::hbar, 5) * 24 * zeta5;
}

Outcome internal_balance() {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  bool monotone = true;
  for (int i = 0; i < 20; ++i) {
    const double radius = 50e-9 + 70e-9 * u(rng);
    const double tenv = 4.0 + 26.0 * u(rng);
    const double intensity = std::pow(10.0, 8.0 + 2.0 * u(rng));
    const double bulk = std::pow(10.0, -9.0 + 5.0 * u(rng));
    const complex eps_bb(2.1, 0.2 + 0.6 * u(rng));
    const Particle p(radius, 2300.0, {2.1, 0.0}, eps_bb, tenv);
    const Trap trap(63000.0, 1064e-9, intensity);
    const auto r = decoherence::internal_temperature_equilibrium(p, trap, tenv, bulk);
    const double nr = std::sqrt(complex(2.1, 0.0)).real();
    const double im = nr * bulk * 1064e-9 / (2 * oracle::pi);
    const complex eps(2.1, im);
    const double k = 2 * oracle::pi / 1064e-9;
    const double p_abs = intensity * 4 * oracle::pi * k * std::pow(radius, 3) * ((eps - 1.0) / (eps + 2.0)).imag();
    const double net = emitted_power_closed(radius, eps_bb, r.temperature) - emitted_power_closed(radius, eps_bb, tenv);
    worst = std::max(worst, std::abs(p_abs - net) / p_abs);
    const auto hotter = decoherence::internal_temperature_equilibrium(p, trap, tenv, 2 * bulk);
    monotone = monotone && hotter.temperature > r.temperature;
  }
  const Particle base(100e-9, 2300.0, {2.1, 0.0}, {2.1, 0.57}, 12.0);
  const Trap trap(63000.0, 1064e-9, 1e9);
  const double ppb = decoherence::internal_temperature_equilibrium(base, trap, 12.0, 0.25e-7).temperature;
  const double ppm = decoherence::internal_temperature_equilibrium(base, trap, 12.0, 0.25e-4).temperature;
  const bool ok = worst < 1e-6 && monotone && ppm - ppb > 0.0;
  return {ok, "worst residual " + num(worst) + ", monotone: " + (monotone ? "yes" : "no") +
                  ", T_i(0.25 ppb/cm) " + num(ppb) + " K < T_i(0.25 ppm/cm) " + num(ppm) + " K"};
}

// 10. CLI determinism and validation.
Outcome cli_checks() {
  auto seeded = fixture::baseline_json();
  seeded["detection"] = {{"monte_carlo", {{"enabled", true}, {"draws", 200000}, {"batches", 4}}}};
  seeded["sweep"] = {{"axis", "pressure"}, {"values", {"0 Pa", "1e-14 Pa", "1e-13 Pa"}}};
  const auto file = cli::scratch_dir() / "acceptance.json";
  cli::write(file, seeded.dump(2));
  const std::string f = "'" + file.string() + "'";
  const auto a = cli::run("simulate " + f + " --seed 5");
  const auto b = cli::run("simulate " + f + " --seed 5");
  const auto s1 = cli::run("sweep " + f + " --jobs 1");
  const auto s4 = cli::run("sweep " + f + " --jobs 3");
  const bool deterministic = a.exit_code == 0 && a.out == b.out && s1.exit_code == 0 && s1.out == s4.out;

  auto bad = fixture::baseline_json();
  bad["protocol"].erase("delta_x");
  cli::write(file, bad.dump(2));
  const auto missing = cli::run("simulate " + f);
  bad = fixture::baseline_json();
  bad["particle"]["radius"] = "100 Pa";
  cli::write(file, bad.dump(2));
  const auto wrong_unit = cli::run("simulate " + f);
  const bool validated = missing.exit_code == 2 && missing.err.find("protocol.delta_x") != std::string::npos &&
                         wrong_unit.exit_code == 2 && wrong_unit.err.find("particle.radius") != std::string::npos;
  std::filesystem::remove_all(cli::scratch_dir());
  return {deterministic && validated, std::string("repeated runs byte-identical: ") + (deterministic ? "yes" : "no") +
                                          "; malformed input exit " + std::to_string(missing.exit_code) + " naming " +
                                          (validated ? "the field" : "nothing")};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"expansion velocity", expansion},
      {"closed form vs grid propagation", oracle_equivalence},
      {"blackbody scaling laws", scaling_laws},
      {"visibility identities", visibility_identities},
      {"requirement band", requirement_band},
      {"gas collision rate", gas_rate},
      {"thruster conversion", thruster},
      {"collapse-model structure", collapse_structure},
      {"internal-temperature balance", internal_balance},
      {"CLI determinism and validation", cli_checks},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!o.pass) ++failures;
    std::cout << (o.pass ? "[PASS]" : "[FAIL]") << " criterion " << i + 1 << ": " << criteria[i].first << ": "
              << o.detail << " [" << num(secs) << " s]" << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
