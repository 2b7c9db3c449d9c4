#include "decide/protocol.hpp"

#include <cmath>

#include "decide/error.hpp"
#include "decide/numfmt.hpp"
#include "decide/prepare.hpp"
#include "decide/wavepacket.hpp"

namespace decide {

namespace {

using decoherence::BudgetEntry;
using decoherence::ChannelName;
using decoherence::DecoherenceBudget;

template <class F>
auto in_step(const char* label, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const InvalidInput& e) {
    throw InvalidInput(e.field(), std::string(label) + ": " + e.message());
  } catch (const NumericalError& e) {
    throw NumericalError(std::string(label) + ": " + e.what());
  }
}

double relative_velocity_of(const wavepacket::BranchEnsemble& ens, double mass) {
  const wavepacket::PureState* best = nullptr;
  for (const auto& c : ens.components()) {
    if (c.branches.size() >= 2 && (!best || c.weight > best->weight)) best = &c;
  }
  if (!best) return 0.0;
  const auto& a = best->branches[0];
  const auto& b = best->branches[1];
  const double v = (b.p0() - a.p0()) / mass;
  return b.x0() >= a.x0() ? v : -v;
}

double blur_for(const Scenario& s, const PreparedRun& run) {
  return s.detection.readout_blur.value_or(run.nominal_spacing / 10.0);
}

struct Decays {
  DecoherenceBudget quantum;
  DecoherenceBudget collapse;
  decoherence::GasCollisions gas;
  double internal_temperature;
  std::vector<std::string> warnings;
};

Decays compute_decays(const Scenario& s, const PreparedRun& run, bool want_quantum,
                      bool want_collapse) {
  Decays d{{}, {}, {0.0, 0.0, 1.0}, 0.0, {}};
  const auto path = separation_path(s, run);
  const double t1 = s.protocol.t1();
  const double t2 = s.protocol.t2();
  if (want_quantum) {
    d.internal_temperature = effective_internal_temperature(s);
    const Particle p = s.particle.with_internal_temperature(d.internal_temperature);
    const double T = s.environment.temperature();
    std::vector<decoherence::LocalizationChannel> channels;
    in_step("step 6 (decoherence)", [&] {
      if (s.channels.bb_scatter) channels.push_back(decoherence::bb_scatter(p, T));
      if (s.channels.bb_absorb) channels.push_back(decoherence::bb_absorb(p, T));
      if (s.channels.bb_emit) channels.push_back(decoherence::bb_emit(p));
      d.quantum = decoherence::make_budget(channels, path, t1, t2);
      const auto check = decoherence::visibility_decay(path, channels, t1 + t2,
                                                       thermal_wavelength(T));
      d.warnings.insert(d.warnings.end(), check.warnings.begin(), check.warnings.end());
      if (s.channels.gas) {
        d.gas = decoherence::gas_collisions(p, s.environment, t1 + t2);
        d.quantum.add({ChannelName::Gas, 0.0, d.gas.rate, d.gas.rate * t1, d.gas.rate * t2});
      }
      return 0;
    });
  }
  if (want_collapse) {
    in_step("step 6 (collapse models)", [&] {
      for (const auto& e : collapse::collapse_entries(s.collapse, s.particle, path, t1, t2)) {
        d.collapse.add(e);
      }
      return 0;
    });
  }
  return d;
}

}  // namespace

double effective_internal_temperature(const Scenario& s) {
  if (!s.bulk_absorption) return s.particle.internal_temperature();
  return in_step("internal temperature", [&] {
    return decoherence::internal_temperature_equilibrium(s.particle, s.trap,
                                                         s.environment.temperature(),
                                                         *s.bulk_absorption)
        .temperature;
  });
}

decoherence::SeparationPath separation_path(const Scenario& s, const PreparedRun& run) {
  const double t1 = s.protocol.t1();
  const double t2 = s.protocol.t2();
  if (s.protocol.separation_path() == SeparationPathMode::Tracked) {
    return decoherence::SeparationPath::linear(t1, t2, run.slit_separation, run.relative_velocity);
  }
  return decoherence::SeparationPath::nominal(t1, t2, run.slit_separation);
}

PreparedRun prepare_run(const Scenario& s) {
  s.collapse.validate();
  const double mass = particle_mass(s.particle);
  const auto released = in_step("steps 2-4 (ground state and release)", [&] {
    const auto g = wavepacket::ground_state(mass, s.trap.omega());
    return g.evolved(s.protocol.t1(), mass);
  });

  PreparedRun run{mass, 0.0, s.protocol.delta_x(), 0.0, 1.0, 0.0, 0.0, {}, {}};
  interference::PreparedState prepared{wavepacket::BranchEnsemble::pure({released}), std::nullopt,
                                       0};
  in_step("step 5 (slit preparation)", [&] {
    if (const auto* x2 = std::get_if<X2Params>(&s.protocol.method())) {
      x2->validate();
      auto r = prepare::prepare_x2(released, *x2);
      run.success_weight = r.success_weight;
      run.branch_overlap = r.branch_overlap;
      run.warnings = std::move(r.warnings);
      prepared.ensemble = std::move(r.state);
    } else {
      const auto& sp = std::get<ScatterSlitParams>(s.protocol.method());
      auto r = prepare::prepare_scatter_slit(released, sp, s.particle, mass);
      run.scatter_probability = r.p_scatter;
      run.warnings = std::move(r.warnings);
      if (r.notched) {
        run.slit_separation = r.lobe_separation;
        if (std::abs(r.lobe_separation - s.protocol.delta_x()) > 0.1 * s.protocol.delta_x()) {
          run.warnings.push_back("scatter-slit lobe separation " + fmt_double(r.lobe_separation) +
                                 " m differs from protocol.delta_x; the lobe separation is used");
        }
      }
      prepared.ensemble = std::move(r.state);
      prepared.notched = std::move(r.notched);
      prepared.notched_component = 1;
    }
    return 0;
  });
  run.relative_velocity = relative_velocity_of(prepared.ensemble, mass);
  run.nominal_spacing = interference::fringe_spacing(mass, s.protocol.t2(), run.slit_separation);

  interference::DetectionOptions opts;
  opts.samples_per_fringe = s.detection.samples_per_fringe;
  run.terms = in_step("step 7 (detection pattern)", [&] {
    return interference::pattern_terms(prepared, s.protocol.t2(), mass, opts);
  });
  return run;
}

ProtocolResult run_protocol(const Scenario& s) { return run_protocol(s, prepare_run(s)); }

ProtocolResult run_protocol(const Scenario& s, const PreparedRun& run) {
  Decays d = compute_decays(s, run, true, true);
  ProtocolResult out{};
  out.budget = d.quantum;
  out.collapse_budget = d.collapse;
  out.gas = d.gas;
  out.internal_temperature = d.internal_temperature;
  out.readout_blur = blur_for(s, run);
  out.decay_quantum = d.quantum.factor();
  out.decay_collapse = d.collapse.factor();
  out.jitter_factor = prepare::phase_jitter_factor(s.protocol.phase_jitter());
  out.warnings = run.warnings;
  out.warnings.insert(out.warnings.end(), d.warnings.begin(), d.warnings.end());

  const auto fit = [&](double coherence) {
    return in_step("step 7 (detection)", [&] {
      return interference::assemble(run.terms, coherence, out.readout_blur);
    });
  };
  const double j = out.jitter_factor;
  out.v_ideal = fit(j).visibility;
  out.v_quantum = fit(j * out.decay_quantum).visibility;
  out.v_collapse = fit(j * out.decay_collapse).visibility;
  out.pattern = fit(j * out.decay_quantum * out.decay_collapse);
  out.v_combined = out.pattern.visibility;
  out.threshold = s.detection.visibility_threshold.value_or(out.v_collapse);
  out.warnings.insert(out.warnings.end(), out.pattern.warnings.begin(), out.pattern.warnings.end());
  if (s.detection.monte_carlo) {
    out.monte_carlo = in_step("step 7 (monte carlo detection)", [&] {
      return interference::monte_carlo_visibility(out.pattern, *s.detection.monte_carlo);
    });
  }
  return out;
}

double forward_visibility(const Scenario& s, const PreparedRun& run, VisibilityKind kind) {
  const bool quantum = kind == VisibilityKind::Quantum;
  const Decays d = compute_decays(s, run, quantum, !quantum);
  const double j = prepare::phase_jitter_factor(s.protocol.phase_jitter());
  const double coherence = j * (quantum ? d.quantum.factor() : d.collapse.factor());
  return in_step("step 7 (detection)", [&] {
    return interference::assemble(run.terms, coherence, blur_for(s, run)).visibility;
  });
}

}  // namespace decide
