#include "decide/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <map>
#include <sstream>
#include <thread>

#include "decide/error.hpp"
#include "decide/numfmt.hpp"
#include "decide/requirements.hpp"

namespace decide::sweep {

namespace {

using Row = std::map<std::string, double>;

double exponent_of(const decoherence::DecoherenceBudget& b, decoherence::ChannelName name) {
  for (const auto& e : b.entries) {
    if (e.name == name) return e.exponent_t1 + e.exponent_t2;
  }
  return 0.0;
}

Row row_from(const ProtocolResult& r) {
  using decoherence::ChannelName;
  return {{"v_ideal", r.v_ideal},
          {"v_quantum", r.v_quantum},
          {"v_collapse", r.v_collapse},
          {"v_combined", r.v_combined},
          {"decay_quantum", r.decay_quantum},
          {"decay_collapse", r.decay_collapse},
          {"internal_temperature", r.internal_temperature},
          {"gas_expected_events", r.gas.expected_events},
          {"fringe_spacing", r.pattern.fringe_spacing},
          {"exp_bb_scatter", exponent_of(r.budget, ChannelName::BBScatter)},
          {"exp_bb_absorb", exponent_of(r.budget, ChannelName::BBAbsorb)},
          {"exp_bb_emit", exponent_of(r.budget, ChannelName::BBEmit)},
          {"exp_gas", exponent_of(r.budget, ChannelName::Gas)},
          {"exp_csl", exponent_of(r.collapse_budget, ChannelName::CSL)},
          {"exp_dp", exponent_of(r.collapse_budget, ChannelName::DP)},
          {"exp_k", exponent_of(r.collapse_budget, ChannelName::K)}};
}

std::string csv_escape(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c == '\n' ? ' ' : c;
  }
  return out + "\"";
}

struct Point {
  Row row;
  std::string error;
};

}  // namespace

const std::vector<std::string>& available_columns() {
  static const std::vector<std::string> cols{
      "v_ideal",        "v_quantum",     "v_collapse",          "v_combined",
      "decay_quantum",  "decay_collapse", "internal_temperature", "gas_expected_events",
      "fringe_spacing", "exp_bb_scatter", "exp_bb_absorb",       "exp_bb_emit",
      "exp_gas",        "exp_csl",        "exp_dp",              "exp_k"};
  return cols;
}

bool axis_reuses_preparation(const std::string& axis) {
  return axis == "env-temp" || axis == "internal-temp" || axis == "pressure" ||
         axis == "csl-lambda";
}

Scenario apply_axis(const Scenario& scenario, const std::string& axis, double value) {
  if (axis_reuses_preparation(axis)) {
    return requirements::with_axis_value(scenario, requirements::parse_axis(axis), value);
  }
  Scenario s = scenario;
  if (axis == "t2") {
    s.protocol = s.protocol.with_t2(value);
  } else if (axis == "delta-x") {
    s.protocol = s.protocol.with_delta_x(value);
  } else if (axis == "radius") {
    s.particle = s.particle.with_radius(value);
  } else {
    throw InvalidInput("sweep.axis", "unknown axis '" + axis + "'");
  }
  return s;
}

std::string run_sweep(const Scenario& scenario, const io::SweepSpec& spec, unsigned jobs) {
  std::vector<std::string> columns = spec.columns.empty() ? available_columns() : spec.columns;
  for (const auto& c : columns) {
    if (std::find(available_columns().begin(), available_columns().end(), c) ==
        available_columns().end()) {
      throw InvalidInput("sweep.columns", "unknown column '" + c + "'");
    }
  }
  if (spec.values.size() < 2) throw InvalidInput("sweep.values", "needs at least 2 points");

  std::optional<PreparedRun> shared;
  std::string shared_error;
  if (axis_reuses_preparation(spec.axis)) {
    try {
      shared = prepare_run(scenario);
    } catch (const std::exception& e) {
      shared_error = e.what();
    }
  }

  std::vector<Point> points(spec.values.size());
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next++; i < points.size(); i = next++) {
      try {
        if (!shared_error.empty()) throw NumericalError(shared_error);
        const Scenario s = apply_axis(scenario, spec.axis, spec.values[i]);
        points[i].row = row_from(shared ? run_protocol(s, *shared) : run_protocol(s));
      } catch (const std::exception& e) {
        points[i].error = e.what();
      }
    }
  };
  const unsigned n_workers =
      std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(points.size())));
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < n_workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  std::ostringstream out;
  out << spec.axis;
  for (const auto& c : columns) out << ',' << c;
  out << ",error\n";
  for (std::size_t i = 0; i < points.size(); ++i) {
    out << fmt_double(spec.values[i]);
    for (const auto& c : columns) {
      out << ',';
      if (points[i].error.empty()) out << fmt_double(points[i].row.at(c));
    }
    out << ',';
    if (!points[i].error.empty()) out << csv_escape(points[i].error);
    out << '\n';
  }
  return out.str();
}

}  // namespace decide::sweep
