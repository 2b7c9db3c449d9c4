#include "decide/units.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <utility>

#include "decide/core.hpp"
#include "decide/error.hpp"

namespace decide::units {

namespace {

struct Unit {
  std::string_view symbol;
  Dimension dim;
  double scale;
};

constexpr std::array kUnits{
    Unit{"m", Dimension::Length, 1.0},
    Unit{"cm", Dimension::Length, 1e-2},
    Unit{"mm", Dimension::Length, 1e-3},
    Unit{"um", Dimension::Length, 1e-6},
    Unit{"µm", Dimension::Length, 1e-6},
    Unit{"nm", Dimension::Length, 1e-9},
    Unit{"pm", Dimension::Length, 1e-12},
    Unit{"fm", Dimension::Length, 1e-15},
    Unit{"m^2", Dimension::Area, 1.0},
    Unit{"cm^2", Dimension::Area, 1e-4},
    Unit{"um^2", Dimension::Area, 1e-12},
    Unit{"nm^2", Dimension::Area, 1e-18},
    Unit{"s", Dimension::Time, 1.0},
    Unit{"ms", Dimension::Time, 1e-3},
    Unit{"us", Dimension::Time, 1e-6},
    Unit{"ns", Dimension::Time, 1e-9},
    Unit{"ps", Dimension::Time, 1e-12},
    Unit{"min", Dimension::Time, 60.0},
    Unit{"h", Dimension::Time, 3600.0},
    Unit{"K", Dimension::Temperature, 1.0},
    Unit{"mK", Dimension::Temperature, 1e-3},
    Unit{"Pa", Dimension::Pressure, 1.0},
    Unit{"mPa", Dimension::Pressure, 1e-3},
    Unit{"hPa", Dimension::Pressure, 1e2},
    Unit{"kPa", Dimension::Pressure, 1e3},
    Unit{"mbar", Dimension::Pressure, 1e2},
    Unit{"bar", Dimension::Pressure, 1e5},
    Unit{"kg", Dimension::Mass, 1.0},
    Unit{"g", Dimension::Mass, 1e-3},
    Unit{"amu", Dimension::Mass, kConstants.amu},
    Unit{"u", Dimension::Mass, kConstants.amu},
    Unit{"kg/m^3", Dimension::Density, 1.0},
    Unit{"g/cm^3", Dimension::Density, 1e3},
    Unit{"rad/s", Dimension::AngularFrequency, 1.0},
    Unit{"W/m^2", Dimension::Intensity, 1.0},
    Unit{"W/cm^2", Dimension::Intensity, 1e4},
    Unit{"W", Dimension::Power, 1.0},
    Unit{"mW", Dimension::Power, 1e-3},
    Unit{"uW", Dimension::Power, 1e-6},
    Unit{"nW", Dimension::Power, 1e-9},
    Unit{"pW", Dimension::Power, 1e-12},
    Unit{"fW", Dimension::Power, 1e-15},
    Unit{"1/s", Dimension::Rate, 1.0},
    Unit{"s^-1", Dimension::Rate, 1.0},
    Unit{"Hz", Dimension::Rate, 1.0},
    Unit{"1/m", Dimension::InverseLength, 1.0},
    Unit{"m^-1", Dimension::InverseLength, 1.0},
    Unit{"1/cm", Dimension::InverseLength, 1e2},
    // Fractional loss per centimetre.
    Unit{"ppm/cm", Dimension::InverseLength, 1e-6 * 1e2},
    Unit{"ppb/cm", Dimension::InverseLength, 1e-9 * 1e2},
    Unit{"rad", Dimension::Angle, 1.0},
    Unit{"mrad", Dimension::Angle, 1e-3},
};

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

}  // namespace

std::string_view si_unit(Dimension d) {
  switch (d) {
    case Dimension::Length: return "m";
    case Dimension::Area: return "m^2";
    case Dimension::Time: return "s";
    case Dimension::Temperature: return "K";
    case Dimension::Pressure: return "Pa";
    case Dimension::Mass: return "kg";
    case Dimension::Density: return "kg/m^3";
    case Dimension::AngularFrequency: return "rad/s";
    case Dimension::Intensity: return "W/m^2";
    case Dimension::Power: return "W";
    case Dimension::Rate: return "1/s";
    case Dimension::InverseLength: return "1/m";
    case Dimension::Angle: return "rad";
    case Dimension::Dimensionless: return "";
  }
  return "";
}

double parse(std::string_view text, Dimension d, const std::string& field) {
  const std::string_view s = trim(text);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr == s.data()) {
    throw InvalidInput(field, "cannot parse a number from '" + std::string(text) + "'");
  }
  if (!std::isfinite(value)) throw InvalidInput(field, "value must be finite");
  const std::string_view unit = trim(s.substr(static_cast<std::size_t>(ptr - s.data())));
  if (unit.empty()) return value;
  for (const auto& u : kUnits) {
    if (u.symbol != unit) continue;
    if (u.dim != d) {
      throw InvalidInput(field, "unit '" + std::string(unit) + "' has the wrong dimension (expected " +
                                    std::string(si_unit(d)) + ")");
    }
    return value * u.scale;
  }
  throw InvalidInput(field, "unknown unit '" + std::string(unit) + "'");
}

}  // namespace decide::units
