// Command-line front end: simulate, sweep, invert, rates, thruster.

#include <CLI11.hpp>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <json.hpp>
#include <sstream>

#include "decide/collapse.hpp"
#include "decide/error.hpp"
#include "decide/numfmt.hpp"
#include "decide/protocol.hpp"
#include "decide/requirements.hpp"
#include "decide/scenario_io.hpp"
#include "decide/sweep.hpp"
#include "decide/units.hpp"

using nlohmann::json;
namespace dc = decide;

namespace {

constexpr const char* kVersion = "1.0.0";

enum Exit { kOk = 0, kInvalid = 2, kNumerical = 3, kIo = 4 };

json budget_json(const dc::decoherence::DecoherenceBudget& b) {
  json ch = json::array();
  for (const auto& e : b.entries) {
    ch.push_back({{"name", std::string(dc::decoherence::to_string(e.name))},
                  {"Lambda", e.Lambda},
                  {"gamma_sat", e.gamma_sat},
                  {"exponent_t1", e.exponent_t1},
                  {"exponent_t2", e.exponent_t2}});
  }
  return {{"channels", ch},
          {"total_t1", b.total_t1},
          {"total_t2", b.total_t2},
          {"factor", b.factor()}};
}

json notes(const dc::Scenario& s) {
  json n = json::array();
  if (s.collapse.dp_enabled) {
    const double a = s.collapse.dp_cutoff.value_or(s.particle.radius());
    n.push_back("DP regularized by a uniform sphere of radius " + dc::fmt_double(a) +
                " m; the rate scales as 1/cutoff");
  }
  if (s.collapse.k_enabled) {
    n.push_back("K coherence cell a_c = (hbar^2/G)^(1/3) R^(2/3) / m with unit prefactor");
  }
  if (s.bulk_absorption) {
    n.push_back("trap-light absorption from bulk coefficient via Im eps = n_r a lambda / (2 pi)");
  }
  return n;
}

json metadata(const dc::io::LoadedScenario& ls, const std::vector<std::string>& warnings) {
  return {{"version", kVersion},
          {"constants", "CODATA 2018"},
          {"defaults", ls.defaults},
          {"warnings", warnings},
          {"notes", notes(ls.scenario)}};
}

void emit(const json& j) { std::cout << j.dump(2) << '\n'; }

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw dc::IoError("cannot open '" + path + "' for writing");
  out << content;
  out.flush();
  if (!out) throw dc::IoError("failed writing '" + path + "'");
}

std::string pattern_csv(const dc::interference::InterferencePattern& p) {
  std::string s = "x,density\n";
  for (std::size_t i = 0; i < p.x.size(); ++i) {
    s += dc::fmt_double(p.x[i]);
    s += ',';
    s += dc::fmt_double(p.density[i]);
    s += '\n';
  }
  return s;
}

int cmd_simulate(const std::string& file, const std::string& pattern_out,
                 std::optional<std::uint64_t> seed, bool include_pattern) {
  auto ls = dc::io::load_scenario(file);
  if (seed) {
    auto mc = ls.scenario.detection.monte_carlo.value_or(dc::interference::MonteCarloOptions{});
    mc.seed = *seed;
    ls.scenario.detection.monte_carlo = mc;
  }
  const auto prepared = dc::prepare_run(ls.scenario);
  const auto r = dc::run_protocol(ls.scenario, prepared);

  json res;
  res["visibility"] = {{"ideal", r.v_ideal},
                       {"quantum", r.v_quantum},
                       {"collapse", r.v_collapse},
                       {"combined", r.v_combined},
                       {"threshold", r.threshold},
                       {"quantum_exceeds_threshold", r.v_quantum > r.threshold}};
  res["fringe_spacing"] = {{"nominal", r.pattern.nominal_spacing},
                           {"fitted", r.pattern.fringe_spacing}};
  res["fit_residual"] = r.pattern.fit_residual;
  res["readout_blur"] = r.readout_blur;
  res["decay"] = {{"quantum", r.decay_quantum},
                  {"collapse", r.decay_collapse},
                  {"phase_jitter", r.jitter_factor}};
  res["budget"] = budget_json(r.budget);
  res["collapse_budget"] = budget_json(r.collapse_budget);
  res["gas"] = {{"rate", r.gas.rate},
                {"expected_events", r.gas.expected_events},
                {"survival", r.gas.survival}};
  res["internal_temperature"] = r.internal_temperature;
  res["preparation"] = {{"mass", prepared.mass},
                        {"slit_separation", prepared.slit_separation},
                        {"relative_velocity", prepared.relative_velocity},
                        {"success_weight", prepared.success_weight},
                        {"scatter_probability", prepared.scatter_probability},
                        {"branch_overlap", prepared.branch_overlap},
                        {"grid_path", prepared.terms.grid_path}};
  res["pattern"] = {{"samples", r.pattern.x.size()},
                    {"x_min", r.pattern.x.front()},
                    {"x_max", r.pattern.x.back()},
                    {"coherence", r.pattern.coherence}};
  if (include_pattern) {
    res["pattern"]["x"] = r.pattern.x;
    res["pattern"]["density"] = r.pattern.density;
  }
  if (r.monte_carlo) {
    res["monte_carlo"] = {{"mean", r.monte_carlo->mean},
                          {"stddev", r.monte_carlo->stddev},
                          {"batches", r.monte_carlo->batch_visibilities},
                          {"seed", ls.scenario.detection.monte_carlo->seed},
                          {"draws", ls.scenario.detection.monte_carlo->draws}};
  }
  if (!pattern_out.empty()) write_file(pattern_out, pattern_csv(r.pattern));

  emit({{"metadata", metadata(ls, r.warnings)},
        {"scenario", dc::io::scenario_to_json(ls.scenario)},
        {"result", res}});
  return kOk;
}

int cmd_sweep(const std::string& file, const std::string& out, unsigned jobs) {
  const auto ls = dc::io::load_scenario(file);
  if (!ls.sweep) throw dc::InvalidInput("sweep", "required key missing for the sweep command");
  const std::string csv = dc::sweep::run_sweep(ls.scenario, *ls.sweep, jobs);
  if (out.empty()) {
    std::cout << csv;
  } else {
    write_file(out, csv);
  }
  return kOk;
}

std::pair<double, double> parse_bracket(const std::string& text, dc::requirements::Axis axis) {
  const auto comma = text.find(',');
  if (comma == std::string::npos) throw dc::InvalidInput("bracket", "expected 'lo,hi'");
  const auto dim = [&] {
    switch (axis) {
      case dc::requirements::Axis::EnvTemp:
      case dc::requirements::Axis::InternalTemp: return dc::units::Dimension::Temperature;
      case dc::requirements::Axis::Pressure: return dc::units::Dimension::Pressure;
      case dc::requirements::Axis::CslLambda: return dc::units::Dimension::Rate;
    }
    return dc::units::Dimension::Dimensionless;
  }();
  return {dc::units::parse(text.substr(0, comma), dim, "bracket"),
          dc::units::parse(text.substr(comma + 1), dim, "bracket")};
}

int cmd_invert(const std::string& file, const std::string& axis_name,
               std::optional<double> threshold, const std::string& bracket_text) {
  const auto ls = dc::io::load_scenario(file);
  const auto axis = dc::requirements::parse_axis(axis_name);
  const auto bracket = parse_bracket(bracket_text, axis);
  const auto r = dc::requirements::invert(ls.scenario, axis, threshold, bracket);

  json trace = json::array();
  for (const auto& t : r.trace) {
    trace.push_back({{"lo", t.lo}, {"hi", t.hi}, {"value", t.value}, {"visibility", t.visibility}});
  }
  json samples = json::array();
  for (const auto& [v, vis] : r.monotonicity_samples) samples.push_back({{"value", v}, {"visibility", vis}});
  emit({{"metadata", metadata(ls, {})},
        {"scenario", dc::io::scenario_to_json(ls.scenario)},
        {"result",
         {{"axis", std::string(dc::requirements::to_string(r.axis))},
          {"unit", std::string(dc::requirements::axis_unit(r.axis))},
          {"critical_value", r.critical_value},
          {"threshold_used", r.threshold_used},
          {"threshold_source", threshold ? "user" : (axis == dc::requirements::Axis::CslLambda
                                                         ? "quantum visibility"
                                                         : "collapse visibility")},
          {"bracket", {r.bracket.first, r.bracket.second}},
          {"iterations", r.iterations},
          {"forward_check_residual", r.forward_check_residual},
          {"visibility_at_critical", r.visibility_at_critical},
          {"monotonicity_samples", samples},
          {"trace", trace}}}});
  return kOk;
}

std::string budget_table(const dc::ProtocolResult& r) {
  std::ostringstream os;
  os << std::left << std::setw(12) << "channel" << std::right << std::setw(14) << "Lambda[m^-2/s]"
     << std::setw(14) << "gamma[1/s]" << std::setw(14) << "exp(t1)" << std::setw(14) << "exp(t2)"
     << '\n';
  const auto rows = [&](const dc::decoherence::DecoherenceBudget& b) {
    for (const auto& e : b.entries) {
      os << std::left << std::setw(12) << dc::decoherence::to_string(e.name) << std::right
         << std::scientific << std::setprecision(4) << std::setw(14) << e.Lambda << std::setw(14)
         << e.gamma_sat << std::setw(14) << e.exponent_t1 << std::setw(14) << e.exponent_t2
         << '\n';
    }
  };
  rows(r.budget);
  os << std::left << std::setw(12) << "quantum" << std::right << std::setw(28) << ""
     << std::setw(14) << r.budget.total_t1 << std::setw(14) << r.budget.total_t2 << '\n';
  rows(r.collapse_budget);
  os << std::left << std::setw(12) << "collapse" << std::right << std::setw(28) << ""
     << std::setw(14) << r.collapse_budget.total_t1 << std::setw(14) << r.collapse_budget.total_t2
     << '\n';
  return os.str();
}

int cmd_rates(const std::string& file, bool table) {
  const auto ls = dc::io::load_scenario(file);
  const auto r = dc::run_protocol(ls.scenario);
  if (table) {
    std::cout << budget_table(r);
    return kOk;
  }
  emit({{"metadata", metadata(ls, r.warnings)},
        {"scenario", dc::io::scenario_to_json(ls.scenario)},
        {"result",
         {{"budget", budget_json(r.budget)},
          {"collapse_budget", budget_json(r.collapse_budget)},
          {"internal_temperature", r.internal_temperature},
          {"gas",
           {{"rate", r.gas.rate},
            {"expected_events", r.gas.expected_events},
            {"survival", r.gas.survival}}}}}});
  return kOk;
}

int cmd_thruster(double force_noise, double mass) {
  const auto t = dc::requirements::thruster_accel_noise(force_noise, mass);
  json warnings = json::array();
  if (t.discrepancy_flag) {
    warnings.push_back("quoted bound " + dc::fmt_double(t.quoted_bound) + " differs from F/M = " +
                       dc::fmt_double(t.acceleration_noise) + " by " +
                       dc::fmt_double(std::round(t.relative_discrepancy * 1000.0) / 10.0) + "%");
  }
  emit({{"metadata",
         {{"version", kVersion},
          {"warnings", warnings},
          {"discrepancy_flag", t.discrepancy_flag},
          {"quoted_acceleration_noise", t.quoted_bound},
          {"relative_discrepancy", t.relative_discrepancy}}},
        {"result",
         {{"force_noise", t.force_noise},
          {"spacecraft_mass", t.spacecraft_mass},
          {"acceleration_noise", t.acceleration_noise}}}});
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Decoherence and interference simulator for a free-falling nanosphere"};
  app.require_subcommand(1);
  app.set_version_flag("--version",
                       std::string("decide ") + kVersion +
                           "\nconstants: CODATA 2018 (hbar, k_B, c, G, amu), SI units");

  std::string file;
  std::string pattern_out;
  std::string out;
  std::string axis;
  std::string bracket;
  std::optional<double> threshold;
  std::optional<std::uint64_t> seed;
  unsigned jobs = 1;
  bool include_pattern = false;
  bool table = false;
  double force_noise = 1e-6;
  double sc_mass = 700.0;

  auto* sim = app.add_subcommand("simulate", "Run the protocol and print visibilities as JSON");
  sim->add_option("file", file, "Scenario JSON")->required();
  sim->add_option("--pattern-out", pattern_out, "Write the detection pattern as CSV");
  sim->add_option("--seed", seed, "Enable Monte Carlo detection with this seed");
  sim->add_flag("--include-pattern", include_pattern, "Embed the full pattern in the JSON");

  auto* sw = app.add_subcommand("sweep", "Evaluate the scenario along its sweep axis (CSV)");
  sw->add_option("file", file, "Scenario JSON with a sweep block")->required();
  sw->add_option("--out", out, "Write CSV here instead of stdout");
  sw->add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);

  auto* inv = app.add_subcommand("invert", "Solve for the critical value along an axis");
  inv->add_option("file", file, "Scenario JSON")->required();
  inv->add_option("--axis", axis, "env-temp | internal-temp | pressure | csl-lambda")->required();
  inv->add_option("--threshold", threshold, "Visibility threshold (default: competing model)");
  inv->add_option("--bracket", bracket, "lo,hi with optional units, e.g. '5 K,40 K'")->required();

  auto* rates = app.add_subcommand("rates", "Decoherence and collapse budget");
  rates->add_option("file", file, "Scenario JSON")->required();
  rates->add_flag("--table", table, "Aligned text table instead of JSON");

  auto* thr = app.add_subcommand("thruster", "Force-noise to acceleration-noise conversion");
  thr->add_option("--force-noise", force_noise, "N/sqrt(Hz)");
  thr->add_option("--mass", sc_mass, "Spacecraft mass, kg");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kInvalid;
  }

  try {
    if (*sim) return cmd_simulate(file, pattern_out, seed, include_pattern);
    if (*sw) return cmd_sweep(file, out, jobs);
    if (*inv) return cmd_invert(file, axis, threshold, bracket);
    if (*rates) return cmd_rates(file, table);
    if (*thr) return cmd_thruster(force_noise, sc_mass);
  } catch (const dc::InvalidInput& e) {
    std::cerr << "error: invalid input: " << e.what() << '\n';
    return kInvalid;
  } catch (const dc::NumericalError& e) {
    std::cerr << "error: numerical failure: " << e.what() << '\n';
    return kNumerical;
  } catch (const dc::IoError& e) {
    std::cerr << "error: i/o: " << e.what() << '\n';
    return kIo;
  } catch (const std::exception& e) {
    std::cerr << "error: internal failure: " << e.what() << '\n';
    return kNumerical;
  }
  return kInvalid;
}
