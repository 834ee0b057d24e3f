#pragma once

#include <span>

#include "ndopfe/grid.hpp"
#include "ndopfe/params.hpp"

namespace ndopfe::kernels {

/// Michaelis-Menten style saturation x / (|x| + K). Odd in x, bounded by 1
/// in absolute value. The |x| keeps the fraction defined for negative
/// concentrations. Throws for K <= 0.
double saturation(double x, double K);

/// I * exp(-x3 * K_W) inside the euphotic zone, 0 below it.
double attenuated_light(double I_surface, double x3, double K_W, bool in_euphotic);

/// Biological uptake G: maximum rate alpha limited by phosphate, iron and
/// light saturation. |G| <= alpha everywhere.
double uptake_G(double y1, double y3, double I_surface, double x3, const ParameterSet& p,
                bool in_euphotic = true);

/// Dependency-free substitute for the phosphate saturation factor:
/// alpha * sat(y1, K_P) is replaced by beta_arc * arctan(y1).
double uptake_arctan(double y1, double y3, double I_surface, double x3, const ParameterSet& p,
                     double beta_arc, bool in_euphotic = true);

/// Radicand H(y3)^2/4 + y3/K_lig of the free-iron square root; strictly
/// positive for every real y3 when L_T - 1/K_lig >= 0.
double free_iron_radicand(double y3, double K_lig, double L_T);

/// Free iron Fe'(y3): the nonnegative-at-zero root of the ligand
/// equilibrium quadratic, evaluated in a cancellation-free form so that
/// Fe'(0) == 0 exactly. Strictly increasing. Throws SolverError if the
/// radicand is not positive (unreachable when L_T - 1/K_lig >= 0).
double free_iron_original(double y3, double K_lig, double L_T);

/// Piecewise-linear substitute FeF: slope Fe'(L_T)/L_T through zero up to
/// L_T, slope one above it. Continuous at L_T and strictly increasing.
double free_iron_adjusted(double y3, double K_lig, double L_T);

/// Particle concentration profile:
/// C_p(x3) = max(c_p_floor, C_p0 * (max(x3, h_bar_e)/h_bar_e)^(-s_p)).
double particle_profile(double x3, const ParameterSet& p, double h_bar_e = 120.0);

enum class IronVariant { Original, Adjusted };

/// Scavenging loss tau * k0 * C_p(x3)^Phi * Fe(y3) with Fe either the
/// original Fe' or the adjusted FeF.
double scavenging(double y3, double x3, const ParameterSet& p, IronVariant variant,
                  double h_bar_e = 120.0);

/// Fraction of a deep column's export that remineralizes inside the water
/// column: 1 - (h/h_bar_e)^(-b). Requires h >= h_bar_e.
double martin_fraction(double h, double b, double h_bar_e = 120.0);

/// Reaction tendencies of one column. r1/r2/r3 are full-grid arrays; the
/// column's slice is written. Pointers into those slices plus the column
/// export bookkeeping are returned.
struct ColumnReactionResult {
  std::span<double> r1, r2, r3;
  double export_production = 0.0;  ///< (1-nu) * integral of G [mmol m^-2 day^-1]
  double bottom_deposit = 0.0;     ///< flux added to the deepest cell
};

/// iron_source holds the volumetric iron source per cell (already spread
/// by the forcing module); pass an empty span for a source-free column.
ColumnReactionResult reaction_tendencies(const Grid& g, int column, std::span<const double> y1,
                                         std::span<const double> y2, std::span<const double> y3,
                                         double I_surface, std::span<const double> iron_source,
                                         const ParameterSet& p, IronVariant variant,
                                         std::span<double> r1, std::span<double> r2,
                                         std::span<double> r3);

/// All columns, OpenMP-parallel across columns (columns are independent).
/// Identical results to the serial variant for any thread count.
void reaction_tendencies_all(const Grid& g, std::span<const double> y1,
                             std::span<const double> y2, std::span<const double> y3,
                             std::span<const double> insolation_per_column,
                             std::span<const double> iron_source, const ParameterSet& p,
                             IronVariant variant, std::span<double> r1, std::span<double> r2,
                             std::span<double> r3,
                             std::span<double> export_per_column = {},
                             std::span<double> deposit_per_column = {});

/// Plain-loop reference implementation, kept for tests and benchmarks.
void reaction_tendencies_all_serial(const Grid& g, std::span<const double> y1,
                                    std::span<const double> y2, std::span<const double> y3,
                                    std::span<const double> insolation_per_column,
                                    std::span<const double> iron_source, const ParameterSet& p,
                                    IronVariant variant, std::span<double> r1,
                                    std::span<double> r2, std::span<double> r3,
                                    std::span<double> export_per_column = {},
                                    std::span<double> deposit_per_column = {});

}  // namespace ndopfe::kernels
