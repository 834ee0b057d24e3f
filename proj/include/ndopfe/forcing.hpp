#pragma once

#include <optional>
#include <span>
#include <vector>

#include "ndopfe/grid.hpp"
#include "ndopfe/params.hpp"

namespace ndopfe {

enum class SourceSpread { Euphotic, Surface };

/// Boundary forcing: surface insolation I(x', t) and aeolian iron
/// deposition F_in(x'). Immutable after construction; evaluation is
/// reentrant.
class Forcing {
 public:
  static Forcing defaults_for(const Grid& g);

  double I0 = 100.0;               ///< mean surface insolation [W m^-2]
  double seasonal_amplitude = 0.4; ///< in [0,1]; 0 gives constant I0
  double period = 360.0;           ///< days
  std::vector<double> F_in;        ///< aeolian deposition per column
  std::vector<double> latitude_deg;  ///< per column, drives the seasonal phase
  SourceSpread spread = SourceSpread::Euphotic;

  /// I0 * max(0, 1 + a * sin(lat) * cos(2 pi t / period)). Periodic in t.
  double insolation(int column, double t) const;

  /// Time average of insolation(column, .), computed on a 360-point
  /// midpoint rule. Used by the stationary mode.
  double mean_insolation(int column) const;

  /// Returns a copy with the seasonal cycle replaced by its annual mean.
  Forcing frozen_annual_mean() const;

  void validate(const Grid& g) const;

 private:
  std::optional<std::vector<double>> constant_I_;  ///< set on frozen copies
};

/// Volumetric iron source per cell: beta * F_in spread over the euphotic
/// depth (or entirely into the surface cell). Zero in the aphotic zone.
/// Time independent, so computed once per run.
std::vector<double> iron_source_field(const Grid& g, const ParameterSet& p, const Forcing& f);

}  // namespace ndopfe
