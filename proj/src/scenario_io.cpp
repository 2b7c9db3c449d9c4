#include "decide/scenario_io.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "decide/error.hpp"
#include "decide/units.hpp"

namespace decide::io {

using nlohmann::json;
using units::Dimension;

namespace {

class Section {
 public:
  Section(const json& obj, std::string path, json& defaults)
      : obj_(obj), path_(std::move(path)), defaults_(defaults) {
    if (!obj_.is_object()) throw InvalidInput(path_, "must be a JSON object");
  }

  std::string field(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  bool has(const std::string& key) const { return obj_.contains(key); }

  const json& take(const std::string& key) {
    if (!obj_.contains(key)) throw InvalidInput(field(key), "required key missing");
    used_.insert(key);
    return obj_.at(key);
  }

  double quantity(const std::string& key, Dimension d) { return to_quantity(take(key), d, field(key)); }

  double quantity_or(const std::string& key, Dimension d, double fallback) {
    if (!has(key)) {
      defaults_[field(key)] = fallback;
      return fallback;
    }
    return quantity(key, d);
  }

  std::optional<double> optional_quantity(const std::string& key, Dimension d) {
    if (!has(key)) return std::nullopt;
    return quantity(key, d);
  }

  bool flag_or(const std::string& key, bool fallback) {
    if (!has(key)) {
      defaults_[field(key)] = fallback;
      return fallback;
    }
    const json& v = take(key);
    if (!v.is_boolean()) throw InvalidInput(field(key), "must be true or false");
    return v.get<bool>();
  }

  std::string string(const std::string& key) {
    const json& v = take(key);
    if (!v.is_string()) throw InvalidInput(field(key), "must be a string");
    return v.get<std::string>();
  }

  std::string string_or(const std::string& key, const std::string& fallback) {
    if (!has(key)) {
      defaults_[field(key)] = fallback;
      return fallback;
    }
    return string(key);
  }

  complex permittivity_or(const std::string& key, complex fallback) {
    if (!has(key)) {
      defaults_[field(key)] = json::array({fallback.real(), fallback.imag()});
      return fallback;
    }
    const json& v = take(key);
    if (v.is_number()) return {v.get<double>(), 0.0};
    if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number()) {
      return {v[0].get<double>(), v[1].get<double>()};
    }
    throw InvalidInput(field(key), "must be a number or [re, im]");
  }

  std::size_t count_or(const std::string& key, std::size_t fallback) {
    if (!has(key)) {
      defaults_[field(key)] = fallback;
      return fallback;
    }
    const json& v = take(key);
    if (!v.is_number_integer() || v.get<long long>() < 0) {
      throw InvalidInput(field(key), "must be a non-negative integer");
    }
    return static_cast<std::size_t>(v.get<long long>());
  }

  std::optional<Section> child(const std::string& key) {
    if (!has(key)) return std::nullopt;
    return Section(take(key), field(key), defaults_);
  }

  /// Rejects keys that were never read.
  void finish() const {
    for (const auto& [k, v] : obj_.items()) {
      if (!used_.count(k)) throw InvalidInput(field(k), "unknown key");
    }
  }

  json& defaults() { return defaults_; }

  static double to_quantity(const json& v, Dimension d, const std::string& field) {
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) return units::parse(v.get<std::string>(), d, field);
    throw InvalidInput(field, "must be a number or a string with a unit");
  }

 private:
  const json& obj_;
  std::string path_;
  json& defaults_;
  std::set<std::string> used_;
};

Dimension sweep_dimension(const std::string& axis) {
  if (axis == "env-temp" || axis == "internal-temp") return Dimension::Temperature;
  if (axis == "pressure") return Dimension::Pressure;
  if (axis == "csl-lambda") return Dimension::Rate;
  if (axis == "t2") return Dimension::Time;
  if (axis == "delta-x" || axis == "radius") return Dimension::Length;
  throw InvalidInput("sweep.axis", "unknown axis '" + axis +
                                       "' (expected env-temp, internal-temp, pressure, "
                                       "csl-lambda, t2, delta-x, radius)");
}

SweepSpec parse_sweep(Section& sec) {
  SweepSpec sw;
  sw.axis = sec.string("axis");
  const Dimension d = sweep_dimension(sw.axis);
  const bool has_values = sec.has("values");
  const bool has_range = sec.has("range");
  if (has_values == has_range) {
    throw InvalidInput(sec.field("values"), "give exactly one of values or range");
  }
  if (has_values) {
    const json& v = sec.take("values");
    if (!v.is_array()) throw InvalidInput(sec.field("values"), "must be an array");
    for (std::size_t i = 0; i < v.size(); ++i) {
      sw.values.push_back(Section::to_quantity(v[i], d, sec.field("values") + "[" +
                                                          std::to_string(i) + "]"));
    }
  } else {
    auto r = *sec.child("range");
    const double from = r.quantity("from", d);
    const double to = r.quantity("to", d);
    const std::size_t count = r.count_or("count", 0);
    const std::string scale = r.string_or("scale", "linear");
    r.finish();
    if (count < 2) throw InvalidInput(r.field("count"), "must be >= 2");
    if (scale != "linear" && scale != "log") {
      throw InvalidInput(r.field("scale"), "must be 'linear' or 'log'");
    }
    if (scale == "log" && !(from > 0.0 && to > 0.0)) {
      throw InvalidInput(r.field("from"), "log range requires positive endpoints");
    }
    for (std::size_t i = 0; i < count; ++i) {
      const double f = static_cast<double>(i) / static_cast<double>(count - 1);
      double v = scale == "log" ? std::exp(std::log(from) + f * (std::log(to) - std::log(from)))
                                : from + f * (to - from);
      if (i == 0) v = from;
      if (i + 1 == count) v = to;
      sw.values.push_back(v);
    }
  }
  if (sw.values.size() < 2) throw InvalidInput(sec.field("values"), "needs at least 2 points");
  for (std::size_t i = 0; i < sw.values.size(); ++i) {
    const double v = sw.values[i];
    const bool ok = sw.axis == "pressure" || sw.axis == "csl-lambda" || sw.axis == "internal-temp"
                        ? v >= 0.0
                        : v > 0.0;
    if (!std::isfinite(v) || !ok) {
      throw InvalidInput("sweep.values[" + std::to_string(i) + "]",
                         "outside the domain of axis " + sw.axis);
    }
  }
  if (sec.has("columns")) {
    const json& c = sec.take("columns");
    if (!c.is_array()) throw InvalidInput(sec.field("columns"), "must be an array of names");
    for (const auto& name : c) {
      if (!name.is_string()) throw InvalidInput(sec.field("columns"), "must be an array of names");
      sw.columns.push_back(name.get<std::string>());
    }
  }
  sec.finish();
  return sw;
}

}  // namespace

LoadedScenario parse_scenario(const json& doc) {
  json defaults = json::object();
  Section root(doc, "", defaults);

  auto psec = Section(root.take("particle"), "particle", defaults);
  auto esec = Section(root.take("environment"), "environment", defaults);

  const double temperature = esec.quantity("temperature", Dimension::Temperature);
  const double pressure = esec.quantity("pressure", Dimension::Pressure);
  const double gas_mass = esec.quantity_or("gas_mass", Dimension::Mass, 2.0 * kConstants.amu);
  ChannelToggles toggles;
  if (auto ch = esec.child("channels")) {
    toggles.bb_scatter = ch->flag_or("bb_scatter", true);
    toggles.bb_absorb = ch->flag_or("bb_absorb", true);
    toggles.bb_emit = ch->flag_or("bb_emit", true);
    toggles.gas = ch->flag_or("gas", true);
    ch->finish();
  } else {
    defaults["environment.channels"] = {{"bb_scatter", true}, {"bb_absorb", true},
                                        {"bb_emit", true}, {"gas", true}};
  }
  esec.finish();
  const Environment env(temperature, pressure, gas_mass);

  const double radius = psec.quantity("radius", Dimension::Length);
  const double density = psec.quantity_or("density", Dimension::Density, 2300.0);
  const complex eps_trap = psec.permittivity_or("eps_trap", {2.1, 0.0});
  const complex eps_bb = psec.permittivity_or("eps_bb", {2.1, 0.57});
  double internal = temperature;
  std::optional<double> bulk;
  if (psec.has("internal_temperature") && psec.take("internal_temperature").is_string() &&
      psec.take("internal_temperature").get<std::string>() == "equilibrium") {
    bulk = psec.quantity("bulk_absorption", Dimension::InverseLength);
  } else if (psec.has("internal_temperature")) {
    internal = psec.quantity("internal_temperature", Dimension::Temperature);
  } else {
    defaults["particle.internal_temperature"] = temperature;
  }
  if (!bulk && psec.has("bulk_absorption")) {
    throw InvalidInput("particle.bulk_absorption",
                       "requires internal_temperature = \"equilibrium\"");
  }
  psec.finish();
  const Particle particle(radius, density, eps_trap, eps_bb, internal);

  Trap trap(63000.0, 1064e-9, 1e9);
  if (auto t = root.child("trap")) {
    trap = Trap(t->quantity_or("omega", Dimension::AngularFrequency, 63000.0),
                t->quantity_or("wavelength", Dimension::Length, 1064e-9),
                t->quantity_or("intensity", Dimension::Intensity, 1e9));
    t->finish();
  } else {
    defaults["trap"] = {{"omega", 63000.0}, {"wavelength", 1064e-9}, {"intensity", 1e9}};
  }

  auto prsec = Section(root.take("protocol"), "protocol", defaults);
  const double t1 = prsec.quantity("t1", Dimension::Time);
  const double t2 = prsec.quantity("t2", Dimension::Time);
  const double delta_x = prsec.quantity("delta_x", Dimension::Length);
  const std::string method = prsec.string("method");
  const double jitter = prsec.quantity_or("phase_jitter", Dimension::Angle, 0.0);
  const std::string path_mode = prsec.string_or("separation_path", "nominal");
  if (path_mode != "nominal" && path_mode != "tracked") {
    throw InvalidInput("protocol.separation_path", "must be 'nominal' or 'tracked'");
  }
  Protocol::Method m;
  if (method == "x2") {
    if (prsec.has("scatter_slit")) {
      throw InvalidInput("protocol.scatter_slit", "given but method is x2");
    }
    X2Params x2{0.5 * delta_x, 5e-12};
    if (auto s = prsec.child("x2")) {
      x2.sigma_m = s->quantity_or("sigma_m", Dimension::Length, 5e-12);
      s->finish();
    } else {
      defaults["protocol.x2.sigma_m"] = x2.sigma_m;
    }
    x2.validate();
    m = x2;
  } else if (method == "scatter_slit") {
    if (prsec.has("x2")) throw InvalidInput("protocol.x2", "given but method is scatter_slit");
    ScatterSlitParams sp{20e-9, 40e-9, 1e-15, 1e-9, std::nullopt, LocalizedWidth::BeamWaist};
    if (auto s = prsec.child("scatter_slit")) {
      sp.waist = s->quantity_or("waist", Dimension::Length, sp.waist);
      sp.wavelength = s->quantity_or("wavelength", Dimension::Length, sp.wavelength);
      sp.power = s->quantity_or("power", Dimension::Power, sp.power);
      sp.duration = s->quantity_or("duration", Dimension::Time, sp.duration);
      sp.cross_section = s->optional_quantity("cross_section", Dimension::Area);
      const std::string lw = s->string_or("localized_width", "waist");
      if (lw == "waist") {
        sp.localized_width = LocalizedWidth::BeamWaist;
      } else if (lw == "wavelength") {
        sp.localized_width = LocalizedWidth::Wavelength;
      } else {
        throw InvalidInput("protocol.scatter_slit.localized_width",
                           "must be 'waist' or 'wavelength'");
      }
      s->finish();
    } else {
      defaults["protocol.scatter_slit"] = {{"waist", sp.waist},
                                           {"wavelength", sp.wavelength},
                                           {"power", sp.power},
                                           {"duration", sp.duration},
                                           {"localized_width", "waist"}};
    }
    sp.validate();
    m = sp;
  } else {
    throw InvalidInput("protocol.method", "must be 'x2' or 'scatter_slit', got '" + method + "'");
  }
  prsec.finish();
  const Protocol protocol(t1, t2, delta_x, m, jitter,
                          path_mode == "tracked" ? SeparationPathMode::Tracked
                                                 : SeparationPathMode::Nominal);

  collapse::CollapseParams cp;
  if (auto c = root.child("collapse")) {
    if (auto csl = c->child("csl")) {
      cp.csl_enabled = csl->flag_or("enabled", false);
      cp.csl_lambda = csl->quantity_or("lambda", Dimension::Rate, 1e-16);
      cp.csl_rc = csl->quantity_or("rc", Dimension::Length, 1e-7);
      csl->finish();
    } else {
      defaults["collapse.csl"] = {{"enabled", false}, {"lambda", 1e-16}, {"rc", 1e-7}};
    }
    if (auto dp = c->child("dp")) {
      cp.dp_enabled = dp->flag_or("enabled", true);
      cp.dp_cutoff = dp->optional_quantity("cutoff", Dimension::Length);
      dp->finish();
    } else {
      defaults["collapse.dp"] = {{"enabled", true}, {"cutoff", "sphere_radius"}};
    }
    if (auto k = c->child("k")) {
      cp.k_enabled = k->flag_or("enabled", true);
      k->finish();
    } else {
      defaults["collapse.k.enabled"] = true;
    }
    c->finish();
  } else {
    defaults["collapse"] = {{"csl", {{"enabled", false}, {"lambda", 1e-16}, {"rc", 1e-7}}},
                            {"dp", {{"enabled", true}, {"cutoff", "sphere_radius"}}},
                            {"k", {{"enabled", true}}}};
  }
  cp.validate();

  DetectionSettings det;
  if (auto d = root.child("detection")) {
    if (d->has("readout_blur") && d->take("readout_blur") == json("auto")) {
      // auto: a tenth of the nominal fringe spacing
    } else if (d->has("readout_blur")) {
      det.readout_blur = d->quantity("readout_blur", Dimension::Length);
      if (!(*det.readout_blur >= 0.0)) {
        throw InvalidInput("detection.readout_blur", "must be >= 0");
      }
    } else {
      defaults["detection.readout_blur"] = "auto";
    }
    det.samples_per_fringe = d->count_or("samples_per_fringe", 16);
    if (det.samples_per_fringe < 8) {
      throw InvalidInput("detection.samples_per_fringe", "must be >= 8");
    }
    if (d->has("visibility_threshold") && d->take("visibility_threshold") == json("collapse")) {
      // default threshold
    } else if (d->has("visibility_threshold")) {
      const double v = d->quantity("visibility_threshold", Dimension::Dimensionless);
      if (!(v >= 0.0 && v <= 1.0)) {
        throw InvalidInput("detection.visibility_threshold", "must lie in [0, 1]");
      }
      det.visibility_threshold = v;
    } else {
      defaults["detection.visibility_threshold"] = "collapse";
    }
    if (auto mc = d->child("monte_carlo")) {
      interference::MonteCarloOptions o;
      const bool enabled = mc->flag_or("enabled", false);
      o.draws = mc->count_or("draws", o.draws);
      o.batches = mc->count_or("batches", o.batches);
      o.seed = mc->count_or("seed", o.seed);
      mc->finish();
      if (o.draws < 1000) throw InvalidInput("detection.monte_carlo.draws", "must be >= 1000");
      if (o.batches < 2) throw InvalidInput("detection.monte_carlo.batches", "must be >= 2");
      if (enabled) det.monte_carlo = o;
    } else {
      defaults["detection.monte_carlo.enabled"] = false;
    }
    d->finish();
  } else {
    defaults["detection"] = {{"readout_blur", "auto"},
                             {"samples_per_fringe", 16},
                             {"visibility_threshold", "collapse"},
                             {"monte_carlo", {{"enabled", false}}}};
  }

  std::optional<SweepSpec> sweep;
  if (auto s = root.child("sweep")) sweep = parse_sweep(*s);
  root.finish();

  return {Scenario{particle, env, trap, protocol, cp, det, toggles, bulk}, std::move(defaults),
          std::move(sweep)};
}

LoadedScenario parse_scenario_text(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InvalidInput("scenario", std::string("malformed JSON: ") + e.what());
  }
  return parse_scenario(doc);
}

LoadedScenario load_scenario(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open scenario file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("failed reading scenario file '" + path + "'");
  return parse_scenario_text(ss.str());
}

json scenario_to_json(const Scenario& s) {
  json j;
  const auto& p = s.particle;
  j["particle"] = {{"radius", p.radius()},
                   {"density", p.density()},
                   {"mass", particle_mass(p)},
                   {"eps_trap", {p.eps_trap().real(), p.eps_trap().imag()}},
                   {"eps_bb", {p.eps_bb().real(), p.eps_bb().imag()}}};
  if (s.bulk_absorption) {
    j["particle"]["internal_temperature"] = "equilibrium";
    j["particle"]["bulk_absorption"] = *s.bulk_absorption;
  } else {
    j["particle"]["internal_temperature"] = p.internal_temperature();
  }
  j["environment"] = {{"temperature", s.environment.temperature()},
                      {"pressure", s.environment.pressure()},
                      {"gas_mass", s.environment.gas_mass()},
                      {"channels",
                       {{"bb_scatter", s.channels.bb_scatter},
                        {"bb_absorb", s.channels.bb_absorb},
                        {"bb_emit", s.channels.bb_emit},
                        {"gas", s.channels.gas}}}};
  j["trap"] = {{"omega", s.trap.omega()},
               {"wavelength", s.trap.wavelength()},
               {"intensity", s.trap.intensity()}};
  const auto& pr = s.protocol;
  j["protocol"] = {{"t1", pr.t1()},
                   {"t2", pr.t2()},
                   {"delta_x", pr.delta_x()},
                   {"phase_jitter", pr.phase_jitter()},
                   {"separation_path",
                    pr.separation_path() == SeparationPathMode::Tracked ? "tracked" : "nominal"}};
  if (const auto* x2 = std::get_if<X2Params>(&pr.method())) {
    j["protocol"]["method"] = "x2";
    j["protocol"]["x2"] = {{"half_separation", x2->half_separation}, {"sigma_m", x2->sigma_m}};
  } else {
    const auto& sp = std::get<ScatterSlitParams>(pr.method());
    j["protocol"]["method"] = "scatter_slit";
    j["protocol"]["scatter_slit"] = {
        {"waist", sp.waist},
        {"wavelength", sp.wavelength},
        {"power", sp.power},
        {"duration", sp.duration},
        {"localized_width",
         sp.localized_width == LocalizedWidth::BeamWaist ? "waist" : "wavelength"}};
    if (sp.cross_section) j["protocol"]["scatter_slit"]["cross_section"] = *sp.cross_section;
  }
  const auto& c = s.collapse;
  j["collapse"] = {{"csl", {{"enabled", c.csl_enabled}, {"lambda", c.csl_lambda}, {"rc", c.csl_rc}}},
                   {"dp", {{"enabled", c.dp_enabled}}},
                   {"k", {{"enabled", c.k_enabled}}}};
  if (c.dp_cutoff) {
    j["collapse"]["dp"]["cutoff"] = *c.dp_cutoff;
  } else {
    j["collapse"]["dp"]["cutoff"] = "sphere_radius";
  }
  const auto& d = s.detection;
  j["detection"] = {{"samples_per_fringe", d.samples_per_fringe}};
  if (d.readout_blur) {
    j["detection"]["readout_blur"] = *d.readout_blur;
  } else {
    j["detection"]["readout_blur"] = "auto";
  }
  if (d.visibility_threshold) {
    j["detection"]["visibility_threshold"] = *d.visibility_threshold;
  } else {
    j["detection"]["visibility_threshold"] = "collapse";
  }
  if (d.monte_carlo) {
    j["detection"]["monte_carlo"] = {{"enabled", true},
                                     {"draws", d.monte_carlo->draws},
                                     {"batches", d.monte_carlo->batches},
                                     {"seed", d.monte_carlo->seed}};
  } else {
    j["detection"]["monte_carlo"] = {{"enabled", false}};
  }
  return j;
}

}  // namespace decide::io
