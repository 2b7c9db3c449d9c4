#include <doctest.h>

#include <random>

#include "decide/error.hpp"
#include "decide/wavepacket.hpp"
#include "oracles.hpp"

using namespace decide;
using namespace decide::wavepacket;

namespace {
constexpr double kMass = 1e-17;
constexpr double kOmega = 63000.0;

std::vector<GaussianBranch> random_state(std::mt19937_64& rng, int branches, double sigma0) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<GaussianBranch> out;
  for (int i = 0; i < branches; ++i) {
    const double s = sigma0 * sigma0 * (1.25 + 0.75 * u(rng));
    const double p0 = oracle::hbar / sigma0 * 0.5 * u(rng);
    out.emplace_back(sigma0 * (8.0 * i + u(rng)), p0, complex(s, 0.3 * s * u(rng)),
                     std::polar(0.5, oracle::pi * u(rng)));
  }
  return normalized(out);
}
}  // namespace

TEST_CASE("ground state width") {
  const auto g = ground_state(kMass, kOmega);
  const double ref = std::sqrt(oracle::hbar / (2.0 * kMass * kOmega));
  CHECK(oracle::rel(g.position_sigma(), ref) < 1e-12);
  CHECK(oracle::rel(g.position_sigma(), 9.15e-12) < 2e-3);
  CHECK(g.x0() == 0.0);
  CHECK(g.p0() == 0.0);
  CHECK(std::abs(g.amp()) == doctest::Approx(1.0));
  CHECK(ground_state(kMass, 4 * kOmega).position_sigma() / g.position_sigma() == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(ground_state(4 * kMass, kOmega).position_sigma() / g.position_sigma() == doctest::Approx(0.5).epsilon(1e-12));
  CHECK_THROWS_AS(ground_state(0.0, kOmega), InvalidInput);
  CHECK_THROWS_AS(ground_state(kMass, -1.0), InvalidInput);
}

TEST_CASE("expansion velocity") {
  const double v = expansion_velocity(kMass, kOmega);
  CHECK(oracle::rel(v, 5.8e-7) < 1e-2);
  const double sigma0 = std::sqrt(oracle::hbar / (2.0 * kMass * kOmega));
  CHECK(oracle::rel(v, oracle::hbar / (2.0 * kMass * sigma0)) < 1e-12);
  CHECK(expansion_velocity(kMass, 4 * kOmega) / v == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(expansion_velocity(4 * kMass, kOmega) / v == doctest::Approx(0.5).epsilon(1e-12));
  CHECK_THROWS_AS(expansion_velocity(kMass, 0.0), InvalidInput);
}

TEST_CASE("free evolution of the ground state") {
  const auto g = ground_state(kMass, kOmega);
  const auto e0 = free_evolve(BranchEnsemble::pure({g}), 0.0, kMass);
  CHECK(e0.components()[0].branches[0].s() == g.s());
  const auto e1 = free_evolve(BranchEnsemble::pure({g}), 1.0, kMass).components()[0].branches[0];
  const double s0 = g.position_sigma();
  const double tau = 2.0 * kMass * s0 * s0 / oracle::hbar;
  CHECK(oracle::rel(e1.position_sigma(), s0 * std::sqrt(1.0 + 1.0 / (tau * tau))) < 1e-10);
  CHECK(oracle::rel(e1.position_sigma(), 5.8e-7) < 1e-2);
  CHECK_THROWS_AS(free_evolve(BranchEnsemble::pure({g}), -1.0, kMass), InvalidInput);
}

TEST_CASE("closed-form values match the propagator kernel") {
  const double s0 = 2e-23;
  const double k0 = 3e10;
  const GaussianBranch b(1e-11, oracle::hbar * k0, s0, 1.0);
  for (double t : {0.0, 1e-6, 3e-4, 0.1}) {
    const auto e = b.evolved(t, kMass);
    for (double x : {-3e-11, 0.0, 2e-11, 1e-10}) {
      const complex ref = oracle::free_gaussian(x, 1e-11, k0, s0, t, kMass);
      // Agreement up to a global phase: compare moduli and relative phases.
      CHECK(std::abs(std::abs(e.value(x)) - std::abs(ref)) <= 1e-10 * std::abs(oracle::free_gaussian(e.x0(), 1e-11, k0, s0, t, kMass)));
    }
    const complex r0 = e.value(0.0) / oracle::free_gaussian(0.0, 1e-11, k0, s0, t, kMass);
    const complex r1 = e.value(2e-11) / oracle::free_gaussian(2e-11, 1e-11, k0, s0, t, kMass);
    CHECK(std::abs(r0 - r1) < 1e-9);
  }
}

TEST_CASE("norm preservation of random superpositions") {
  std::mt19937_64 rng(7);
  const double sigma0 = 1e-11;
  for (int trial = 0; trial < 40; ++trial) {
    const auto b = random_state(rng, 1 + trial % 4, sigma0);
    CHECK(std::abs(norm_squared(b) - 1.0) < 1e-12);
    const double t = 1e-3 * (1 + trial);
    const auto e = free_evolve(BranchEnsemble::pure(b), t, kMass);
    CHECK(std::abs(norm_squared(e.components()[0].branches) - 1.0) < 1e-9);
  }
}

TEST_CASE("Galilei consistency") {
  const double s0 = 5e-23;
  const double p0 = 2e-24;
  const double t = 0.37;
  const auto boosted = GaussianBranch(0.0, p0, s0, 1.0).evolved(t, kMass);
  const auto rest = GaussianBranch(0.0, 0.0, s0, 1.0).evolved(t, kMass);
  CHECK(oracle::rel(boosted.x0(), p0 * t / kMass) < 1e-12);
  CHECK(std::abs(boosted.s() - rest.s()) <= 1e-12 * std::abs(rest.s()));
  for (double u : {-2e-7, 0.0, 1e-7}) {
    CHECK(std::abs(std::abs(boosted.value(boosted.x0() + u)) - std::abs(rest.value(u))) <=
          1e-12 * std::abs(rest.value(0.0)));
  }
}

TEST_CASE("width grows strictly") {
  const auto g = ground_state(kMass, kOmega);
  double prev = g.position_sigma();
  for (double t = 1e-7; t < 10.0; t *= 3.0) {
    const double s = g.evolved(t, kMass).position_sigma();
    CHECK(s > prev);
    prev = s;
  }
}

TEST_CASE("ensemble invariants") {
  const auto g = ground_state(kMass, kOmega);
  CHECK_THROWS_AS(BranchEnsemble({{0.6, {g}}, {0.6, {g}}}), InvalidInput);
  CHECK_THROWS_AS(BranchEnsemble({{1.0, {g.with_amp(0.9)}}}), InvalidInput);
  CHECK_NOTHROW(BranchEnsemble({{0.25, {g}}, {0.75, {g}}}));
  CHECK_THROWS_AS(GaussianBranch(0.0, 0.0, complex(-1e-22, 0.0), 1.0), InvalidInput);
}

TEST_CASE("overlap matches quadrature") {
  const GaussianBranch a(0.0, 1e-23, complex(4e-22, 1e-22), std::polar(0.7, 0.3));
  const GaussianBranch b(3e-11, -2e-23, complex(2e-22, -5e-23), std::polar(0.5, -1.1));
  const double lo = -4e-10;
  const double hi = 4e-10;
  const double re = oracle::simpson([&](double x) { return (std::conj(a.value(x)) * b.value(x)).real(); }, lo, hi, 20000);
  const double im = oracle::simpson([&](double x) { return (std::conj(a.value(x)) * b.value(x)).imag(); }, lo, hi, 20000);
  const complex ov = overlap(a, b);
  CHECK(std::abs(ov - complex(re, im)) < 1e-10);
}
