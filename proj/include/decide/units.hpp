#pragma once

#include <string>
#include <string_view>

namespace decide::units {

enum class Dimension {
  Length,
  Area,
  Time,
  Temperature,
  Pressure,
  Mass,
  Density,
  AngularFrequency,
  Intensity,
  Power,
  Rate,
  InverseLength,
  Angle,
  Dimensionless,
};

std::string_view si_unit(Dimension d);

/// Parses "100 nm", "1e-13 Pa", "0.25 ppb/cm" or a bare number (taken as SI).
/// Throws InvalidInput naming `field` on malformed text or a unit of the wrong dimension.
double parse(std::string_view text, Dimension d, const std::string& field);

}  // namespace decide::units
