#include "ndopfe/forcing.hpp"

#include <cmath>
#include <numbers>

#include "ndopfe/errors.hpp"
#include "ndopfe/numerics.hpp"

namespace ndopfe {

Forcing Forcing::defaults_for(const Grid& g) {
  Forcing f;
  f.F_in.assign(g.n_columns(), 20.0);
  f.latitude_deg.resize(g.n_columns());
  // Latitude rows span [-60, 60] degrees symmetrically, so antisymmetric
  // pairs exist whenever nj is even.
  for (std::size_t c = 0; c < g.n_columns(); ++c) {
    const int j = g.columns[c].j;
    f.latitude_deg[c] = -60.0 + (j + 0.5) * 120.0 / g.nj;
  }
  return f;
}

void Forcing::validate(const Grid& g) const {
  if (F_in.size() != g.n_columns() || latitude_deg.size() != g.n_columns())
    throw ConfigError("forcing: need one F_in and one latitude per column");
  if (!(I0 >= 0.0)) throw ConfigError("forcing: I0 must be nonnegative");
  if (!(seasonal_amplitude >= 0.0)) throw ConfigError("forcing: seasonal amplitude must be nonnegative");
  if (!(period > 0.0)) throw ConfigError("forcing: period must be positive");
  for (double v : F_in)
    if (!(v >= 0.0)) throw ConfigError("forcing: F_in must be nonnegative");
}

double Forcing::insolation(int column, double t) const {
  if (constant_I_) return (*constant_I_)[column];
  const double phase = std::cos(2.0 * std::numbers::pi * (t / period));
  const double lat = latitude_deg[column] * std::numbers::pi / 180.0;
  const double factor = 1.0 + seasonal_amplitude * std::sin(lat) * phase;
  return I0 * std::max(0.0, factor);
}

double Forcing::mean_insolation(int column) const {
  if (constant_I_) return (*constant_I_)[column];
  const int n = 360;
  CompensatedSum sum;
  for (int d = 0; d < n; ++d) sum.add(insolation(column, (d + 0.5) * period / n));
  return sum.value() / n;
}

Forcing Forcing::frozen_annual_mean() const {
  Forcing f = *this;
  std::vector<double> means(F_in.size());
  for (std::size_t c = 0; c < means.size(); ++c) means[c] = mean_insolation(static_cast<int>(c));
  f.constant_I_ = std::move(means);
  f.seasonal_amplitude = 0.0;
  return f;
}

std::vector<double> iron_source_field(const Grid& g, const ParameterSet& p, const Forcing& f) {
  f.validate(g);
  std::vector<double> src(g.n_cells(), 0.0);
  for (std::size_t col = 0; col < g.n_columns(); ++col) {
    const Column& c = g.columns[col];
    const double flux = p.beta * f.F_in[col];  // [iron units * m / day]
    if (f.spread == SourceSpread::Surface) {
      src[c.cell_offset] = flux / g.cell_thickness[c.cell_offset];
    } else {
      const double h_e = g.euphotic_depth(static_cast<int>(col));
      for (int k = 0; k < c.n_euphotic; ++k) src[c.cell_offset + k] = flux / h_e;
    }
  }
  return src;
}

}  // namespace ndopfe
