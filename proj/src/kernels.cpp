#include "ndopfe/kernels.hpp"

#include <cmath>
#include <stdexcept>

#include "ndopfe/errors.hpp"

namespace ndopfe::kernels {

double saturation(double x, double K) {
  if (!(K > 0.0)) throw std::invalid_argument("saturation: half saturation constant must be positive");
  return x / (std::abs(x) + K);
}

double attenuated_light(double I_surface, double x3, double K_W, bool in_euphotic) {
  if (!in_euphotic) return 0.0;
  return I_surface * std::exp(-x3 * K_W);
}

double uptake_G(double y1, double y3, double I_surface, double x3, const ParameterSet& p,
                bool in_euphotic) {
  const double light = attenuated_light(I_surface, x3, p.K_W, in_euphotic);
  return p.alpha * saturation(y1, p.K_P) * saturation(y3, p.K_F) * saturation(light, p.K_I);
}

double uptake_arctan(double y1, double y3, double I_surface, double x3, const ParameterSet& p,
                     double beta_arc, bool in_euphotic) {
  const double light = attenuated_light(I_surface, x3, p.K_W, in_euphotic);
  return beta_arc * std::atan(y1) * saturation(y3, p.K_F) * saturation(light, p.K_I);
}

double free_iron_radicand(double y3, double K_lig, double L_T) {
  const double H = L_T + 1.0 / K_lig - y3;
  return 0.25 * H * H + y3 / K_lig;
}

double free_iron_original(double y3, double K_lig, double L_T) {
  const double H = L_T + 1.0 / K_lig - y3;
  const double r4 = H * H + 4.0 * y3 / K_lig;  // 4 * radicand
  if (!(r4 > 0.0))
    throw SolverError("free_iron_original: radicand not positive (is L_T - 1/K_lig >= 0?)");
  const double root = std::sqrt(r4);
  // The positive-at-zero branch (-H + root)/2 cancels badly for H > 0;
  // rewrite via the product of the roots. Gives Fe'(0) == 0 exactly.
  if (H >= 0.0) return (2.0 * y3 / K_lig) / (H + root);
  return 0.5 * (root - H);
}

double free_iron_adjusted(double y3, double K_lig, double L_T) {
  const double fe_at_LT = free_iron_original(L_T, K_lig, L_T);
  if (y3 > L_T) return y3 + (fe_at_LT - L_T);
  return (fe_at_LT / L_T) * y3;
}

double particle_profile(double x3, const ParameterSet& p, double h_bar_e) {
  const double z = std::max(x3, h_bar_e) / h_bar_e;
  return std::max(p.c_p_floor, p.C_p0 * std::pow(z, -p.s_p));
}

double scavenging(double y3, double x3, const ParameterSet& p, IronVariant variant,
                  double h_bar_e) {
  const double cp = particle_profile(x3, p, h_bar_e);
  const double fe = variant == IronVariant::Original ? free_iron_original(y3, p.K_lig, p.L_T)
                                                     : free_iron_adjusted(y3, p.K_lig, p.L_T);
  return p.tau * p.k0 * std::pow(cp, p.Phi) * fe;
}

double martin_fraction(double h, double b, double h_bar_e) {
  if (!(h >= h_bar_e))
    throw std::domain_error("martin_fraction: column depth must reach the euphotic boundary");
  return 1.0 - std::pow(h / h_bar_e, -b);
}

ColumnReactionResult reaction_tendencies(const Grid& g, int column, std::span<const double> y1,
                                         std::span<const double> y2, std::span<const double> y3,
                                         double I_surface, std::span<const double> iron_source,
                                         const ParameterSet& p, IronVariant variant,
                                         std::span<double> r1, std::span<double> r2,
                                         std::span<double> r3) {
  const std::size_t n = g.n_cells();
  if (y1.size() != n || y2.size() != n || y3.size() != n || r1.size() != n || r2.size() != n ||
      r3.size() != n)
    throw ConfigError("reaction_tendencies: field shape does not match the grid");
  if (!iron_source.empty() && iron_source.size() != n)
    throw ConfigError("reaction_tendencies: iron source shape does not match the grid");

  const Column& col = g.columns[column];
  const int off = col.cell_offset;
  const double hbar = g.h_bar_e;

  // Euphotic layers: uptake, remineralization, DOP production, iron
  // coupling. P is the column uptake integral by midpoint quadrature.
  double P = 0.0;
  for (int k = 0; k < col.n_euphotic; ++k) {
    const int c = off + k;
    const double G = uptake_G(y1[c], y3[c], I_surface, g.cell_mid[c], p, true);
    const double remin = p.lambda * y2[c];
    r1[c] = remin - G;
    r2[c] = -remin + p.nu * G;
    r3[c] = (remin - G) * p.R_Fe - scavenging(y3[c], g.cell_mid[c], p, variant, hbar) +
            (iron_source.empty() ? 0.0 : iron_source[c]);
    P += G * g.cell_thickness[c];
  }
  const double export_production = (1.0 - p.nu) * P;

  // Aphotic layers: the Martin-curve remineralization of the exported
  // production, integrated exactly over each layer so that the column
  // balance telescopes to round-off.
  for (int k = col.n_euphotic; k < col.n_layers; ++k) {
    const int c = off + k;
    const double frac =
        std::pow(g.cell_top[c] / hbar, -p.b) - std::pow(g.cell_bottom[c] / hbar, -p.b);
    const double remin = p.lambda * y2[c];
    r1[c] = remin + export_production * frac / g.cell_thickness[c];
    r2[c] = -remin;
    r3[c] = remin * p.R_Fe - scavenging(y3[c], g.cell_mid[c], p, variant, hbar);
  }

  // Boundary deposit: what survives the water column reaches the deepest
  // cell. Shallow (Gamma_1) columns deposit the full export into their
  // deepest euphotic cell.
  const int bottom = off + col.n_layers - 1;
  const double deposit = g.is_gamma2(column)
                             ? export_production * std::pow(col.depth / hbar, -p.b)
                             : export_production;
  r1[bottom] += deposit / g.cell_thickness[bottom];

  ColumnReactionResult res;
  res.r1 = r1.subspan(off, col.n_layers);
  res.r2 = r2.subspan(off, col.n_layers);
  res.r3 = r3.subspan(off, col.n_layers);
  res.export_production = export_production;
  res.bottom_deposit = deposit;
  return res;
}

namespace {

template <bool Parallel>
void tendencies_impl(const Grid& g, std::span<const double> y1, std::span<const double> y2,
                     std::span<const double> y3, std::span<const double> insolation,
                     std::span<const double> iron_source, const ParameterSet& p,
                     IronVariant variant, std::span<double> r1, std::span<double> r2,
                     std::span<double> r3, std::span<double> exports, std::span<double> deposits) {
  if (insolation.size() != g.n_columns())
    throw ConfigError("reaction_tendencies_all: need one insolation value per column");
  const int n_cols = static_cast<int>(g.n_columns());
#pragma omp parallel for schedule(static) if (Parallel)
  for (int c = 0; c < n_cols; ++c) {
    const ColumnReactionResult res =
        reaction_tendencies(g, c, y1, y2, y3, insolation[c], iron_source, p, variant, r1, r2, r3);
    if (!exports.empty()) exports[c] = res.export_production;
    if (!deposits.empty()) deposits[c] = res.bottom_deposit;
  }
}

}  // namespace

void reaction_tendencies_all(const Grid& g, std::span<const double> y1, std::span<const double> y2,
                             std::span<const double> y3,
                             std::span<const double> insolation_per_column,
                             std::span<const double> iron_source, const ParameterSet& p,
                             IronVariant variant, std::span<double> r1, std::span<double> r2,
                             std::span<double> r3, std::span<double> export_per_column,
                             std::span<double> deposit_per_column) {
  tendencies_impl<true>(g, y1, y2, y3, insolation_per_column, iron_source, p, variant, r1, r2, r3,
                        export_per_column, deposit_per_column);
}

void reaction_tendencies_all_serial(const Grid& g, std::span<const double> y1,
                                    std::span<const double> y2, std::span<const double> y3,
                                    std::span<const double> insolation_per_column,
                                    std::span<const double> iron_source, const ParameterSet& p,
                                    IronVariant variant, std::span<double> r1,
                                    std::span<double> r2, std::span<double> r3,
                                    std::span<double> export_per_column,
                                    std::span<double> deposit_per_column) {
  tendencies_impl<false>(g, y1, y2, y3, insolation_per_column, iron_source, p, variant, r1, r2, r3,
                         export_per_column, deposit_per_column);
}

}  // namespace ndopfe::kernels
