#include "ndopfe/transport.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <map>
#include <numbers>
#include <ostream>
#include <sstream>

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include "ndopfe/errors.hpp"

namespace ndopfe {

void Csr::apply(std::span<const double> x, std::span<double> y, bool parallel) const {
#pragma omp parallel for schedule(static) if (parallel)
  for (int r = 0; r < n; ++r) {
    double acc = 0.0;
    for (int k = row_ptr[r]; k < row_ptr[r + 1]; ++k) acc += val[k] * x[col[k]];
    y[r] = acc;
  }
}

namespace {

void check_field(const TransportOperator& op, std::span<const double> x, std::span<double> out) {
  if (x.size() != op.n_cells() || out.size() != op.n_cells())
    throw ConfigError("transport apply: field shape does not match the operator");
}

double wrap_time(double t, double period) {
  double tp = std::fmod(t, period);
  if (tp < 0.0) tp += period;
  return tp;
}

/// Deterministic triplet accumulator; std::map keeps column order fixed.
class MatrixBuilder {
 public:
  explicit MatrixBuilder(int n) : rows_(n) {}

  void add(int r, int c, double v) { rows_[r][c] += v; }

  /// Face flux q [m^3/day] from cell a to cell b, donor-cell upwind.
  void add_advective_flux(int a, int b, double q, std::span<const double> vol) {
    if (q == 0.0) return;
    const int donor = q > 0.0 ? a : b;
    const double mag = std::abs(q);
    // Out of a, into b: column `donor` sums to zero under volume weights.
    add(a, donor, (q > 0.0 ? -mag : mag) / vol[a]);
    add(b, donor, (q > 0.0 ? mag : -mag) / vol[b]);
  }

  /// Two-point diffusive exchange with conductance g [m^3/day].
  void add_diffusive(int a, int b, double g, std::span<const double> vol) {
    if (g == 0.0) return;
    add(a, a, -g / vol[a]);
    add(a, b, g / vol[a]);
    add(b, b, -g / vol[b]);
    add(b, a, g / vol[b]);
  }

  Csr finish() const {
    Csr m;
    m.n = static_cast<int>(rows_.size());
    m.row_ptr.reserve(rows_.size() + 1);
    m.row_ptr.push_back(0);
    for (const auto& row : rows_) {
      for (const auto& [c, v] : row) {
        m.col.push_back(c);
        m.val.push_back(v);
      }
      m.row_ptr.push_back(static_cast<int>(m.col.size()));
    }
    return m;
  }

 private:
  std::vector<std::map<int, double>> rows_;
};

}  // namespace

void TransportOperator::apply_snapshot(int m, std::span<const double> x, std::span<double> out,
                                       bool parallel) const {
  check_field(*this, x, out);
  snapshots[m].apply(x, out, parallel);
}

int TransportOperator::snapshot_at(double t) const {
  const int s = static_cast<int>(snapshots.size());
  if (s == 1) return 0;
  const double tp = wrap_time(t, period);
  const double seg = period / s;
  int m = static_cast<int>(tp / seg);
  return std::min(m, s - 1);
}

void TransportOperator::apply(std::span<const double> x, double t, std::span<double> out,
                              bool parallel) const {
  check_field(*this, x, out);
  const int s = static_cast<int>(snapshots.size());
  if (s == 1) {
    snapshots[0].apply(x, out, parallel);
    return;
  }
  const double tp = wrap_time(t, period);

  // Bracketing snapshots, wrapping the year end around to the start.
  int k = s - 1;
  for (int m = 0; m + 1 < s; ++m) {
    if (tp >= snapshot_time[m] && tp < snapshot_time[m + 1]) {
      k = m;
      break;
    }
  }
  if (tp < snapshot_time[0]) k = s - 1;
  const int k2 = (k + 1) % s;
  double span = snapshot_time[k2] - snapshot_time[k];
  double offs = tp - snapshot_time[k];
  if (k2 <= k) {  // wrapped segment
    span += period;
    if (tp < snapshot_time[0]) offs += period;
  }
  const double w = offs / span;

  std::vector<double> tmp(x.size());
  snapshots[k].apply(x, out, parallel);
  snapshots[k2].apply(x, tmp, parallel);
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = (1.0 - w) * out[i] + w * tmp[i];
}

void TransportOperator::apply_serial(std::span<const double> x, double t,
                                     std::span<double> out) const {
  apply(x, t, out, false);
}

double TransportOperator::max_stable_dt() const {
  double max_rate = 0.0;
  for (const Csr& m : snapshots) {
    for (int r = 0; r < m.n; ++r) {
      for (int k = m.row_ptr[r]; k < m.row_ptr[r + 1]; ++k) {
        if (m.col[k] == r) max_rate = std::max(max_rate, -m.val[k]);
      }
    }
  }
  if (max_rate == 0.0) return std::numeric_limits<double>::infinity();
  return 1.0 / max_rate;
}

TransportOperator TransportOperator::annual_mean() const {
  TransportOperator mean;
  mean.period = period;
  mean.volumes = volumes;
  mean.snapshot_time = {0.5 * period};
  const int n = static_cast<int>(volumes.size());
  MatrixBuilder acc(n);
  const double w = 1.0 / static_cast<double>(snapshots.size());
  for (const Csr& m : snapshots) {
    for (int r = 0; r < m.n; ++r)
      for (int k = m.row_ptr[r]; k < m.row_ptr[r + 1]; ++k) acc.add(r, m.col[k], w * m.val[k]);
  }
  mean.snapshots.push_back(acc.finish());
  return mean;
}

TransportOperator build_synthetic(const Grid& g, const TransportSettings& s) {
  if (!(s.kappa >= 0.0)) throw ConfigError("transport: kappa must be nonnegative");
  if (s.n_snapshots < 1) throw ConfigError("transport: need at least one snapshot");
  if (g.n_cells() == 1)
    std::fputs("ndopfe: warning: single-cell grid, transport operator is zero\n", stderr);

  const int n = static_cast<int>(g.n_cells());
  const int ni = g.ni, nj = g.nj;
  const double pi = std::numbers::pi;

  TransportOperator op;
  op.period = s.period;
  op.volumes = g.cell_volume;

  // Horizontal spacing from the column areas; the desk grids use 1 m^2
  // columns, i.e. unit spacing.
  auto spacing = [&](int col) { return std::sqrt(g.columns[col].area); };

  auto has_layer = [&](int i, int j, int k) {
    if (i < 0 || i >= ni || j < 0 || j >= nj) return false;
    return k < g.columns[g.column_id(i, j)].n_layers;
  };
  auto cell = [&](int i, int j, int k) { return g.cell_index(g.column_id(i, j), k); };

  int max_layers = 0;
  for (const Column& c : g.columns) max_layers = std::max(max_layers, c.n_layers);
  const double h_ref = g.ladder.empty() ? 1.0 : g.ladder.back();

  // Overlap of two laterally adjacent cells' vertical extents. Tops agree
  // (shared ladder); bottoms may differ where a column bottoms out.
  auto overlap = [&](int ca, int cb) {
    return std::min(g.cell_bottom[ca], g.cell_bottom[cb]) -
           std::max(g.cell_top[ca], g.cell_top[cb]);
  };

  for (int m = 0; m < s.n_snapshots; ++m) {
    const double tm = (m + 0.5) * s.period / s.n_snapshots;
    op.snapshot_time.push_back(tm);
    const double phase = 2.0 * pi * tm / s.period;
    const double gyre_amp = s.gyre_strength * (1.0 + s.seasonal_amplitude * std::sin(phase));
    const double over_amp = s.overturn_velocity * (1.0 + s.seasonal_amplitude * std::cos(phase));

    MatrixBuilder mb(n);

    // Gyre: one streamfunction per layer on the (i,j) corner lattice,
    // zero at every corner touching a boundary or missing column.
    auto psi_gyre = [&](int ic, int jc, int k) -> double {
      // corner (ic + 1/2, jc + 1/2)
      if (ic < 0 || ic >= ni - 1 || jc < 0 || jc >= nj - 1) return 0.0;
      if (!has_layer(ic, jc, k) || !has_layer(ic + 1, jc, k) || !has_layer(ic, jc + 1, k) ||
          !has_layer(ic + 1, jc + 1, k))
        return 0.0;
      double th = g.cell_thickness[cell(ic, jc, k)];
      th = std::min(th, g.cell_thickness[cell(ic + 1, jc, k)]);
      th = std::min(th, g.cell_thickness[cell(ic, jc + 1, k)]);
      th = std::min(th, g.cell_thickness[cell(ic + 1, jc + 1, k)]);
      const double dxy = spacing(g.column_id(ic, jc));
      const double shape =
          std::sin(pi * (ic + 1) / static_cast<double>(ni)) *
          std::sin(pi * (jc + 1) / static_cast<double>(nj));
      return gyre_amp * th * dxy * shape;
    };

    for (int k = 0; k < max_layers; ++k) {
      for (int j = 0; j < nj; ++j) {
        for (int i = 0; i < ni; ++i) {
          if (!has_layer(i, j, k)) continue;
          // east face (i,j,k) -> (i+1,j,k)
          if (has_layer(i + 1, j, k)) {
            const double q = psi_gyre(i, j, k) - psi_gyre(i, j - 1, k);
            mb.add_advective_flux(cell(i, j, k), cell(i + 1, j, k), q, op.volumes);
          }
          // north face (i,j,k) -> (i,j+1,k)
          if (has_layer(i, j + 1, k)) {
            const double q = psi_gyre(i - 1, j, k) - psi_gyre(i, j, k);
            mb.add_advective_flux(cell(i, j, k), cell(i, j + 1, k), q, op.volumes);
          }
        }
      }
    }

    // Overturning: one streamfunction per latitude row on the (i,k)
    // corner lattice in the vertical plane.
    auto psi_over = [&](int ic, int kc, int j) -> double {
      // corner (ic + 1/2, kc + 1/2)
      if (ic < 0 || ic >= ni - 1 || kc < 0) return 0.0;
      if (!has_layer(ic, j, kc) || !has_layer(ic, j, kc + 1) || !has_layer(ic + 1, j, kc) ||
          !has_layer(ic + 1, j, kc + 1))
        return 0.0;
      const double z = g.ladder[kc];  // interface kc+1 sits at ladder[kc]
      const double dxy = spacing(g.column_id(ic, j));
      const double shape = std::sin(pi * (ic + 1) / static_cast<double>(ni)) *
                           std::sin(pi * std::min(1.0, z / h_ref));
      return over_amp * dxy * dxy * shape;
    };

    for (int j = 0; j < nj; ++j) {
      for (int k = 0; k < max_layers; ++k) {
        for (int i = 0; i < ni; ++i) {
          if (!has_layer(i, j, k)) continue;
          // east face in the vertical plane
          if (has_layer(i + 1, j, k)) {
            const double q = psi_over(i, k, j) - psi_over(i, k - 1, j);
            mb.add_advective_flux(cell(i, j, k), cell(i + 1, j, k), q, op.volumes);
          }
          // downward face (i,j,k) -> (i,j,k+1)
          if (has_layer(i, j, k + 1)) {
            const double q = psi_over(i - 1, k, j) - psi_over(i, k, j);
            mb.add_advective_flux(cell(i, j, k), cell(i, j, k + 1), q, op.volumes);
          }
        }
      }
    }

    // Diffusion: two-point fluxes on every shared face, uniform kappa.
    if (s.kappa > 0.0) {
      for (int j = 0; j < nj; ++j) {
        for (int i = 0; i < ni; ++i) {
          for (int k = 0; has_layer(i, j, k); ++k) {
            const int c0 = cell(i, j, k);
            if (has_layer(i + 1, j, k)) {
              const int c1 = cell(i + 1, j, k);
              const double dxy = spacing(g.column_id(i, j));
              const double area = overlap(c0, c1) * dxy;
              mb.add_diffusive(c0, c1, s.kappa * area / dxy, op.volumes);
            }
            if (has_layer(i, j + 1, k)) {
              const int c1 = cell(i, j + 1, k);
              const double dxy = spacing(g.column_id(i, j));
              const double area = overlap(c0, c1) * dxy;
              mb.add_diffusive(c0, c1, s.kappa * area / dxy, op.volumes);
            }
            if (has_layer(i, j, k + 1)) {
              const int c1 = cell(i, j, k + 1);
              const double area = g.columns[g.column_id(i, j)].area;
              const double dist = g.cell_mid[c1] - g.cell_mid[c0];
              mb.add_diffusive(c0, c1, s.kappa * area / dist, op.volumes);
            }
          }
        }
      }
    }

    op.snapshots.push_back(mb.finish());
  }
  return op;
}

TransportOperator build_synthetic(const Grid& g, double gyre_strength, double kappa) {
  TransportSettings s;
  s.gyre_strength = gyre_strength;
  s.overturn_velocity = 10.0 * gyre_strength;
  s.kappa = kappa;
  return build_synthetic(g, s);
}

void TransportOperator::save(std::ostream& os) const {
  char buf[64];
  os << "# ndopfe transport v1\n";
  std::snprintf(buf, sizeof buf, "%.17g", period);
  os << "period " << buf << "\n";
  os << "cells " << volumes.size() << "\n";
  os << "snapshots " << snapshots.size() << "\n";
  os << "volumes";
  for (double v : volumes) {
    std::snprintf(buf, sizeof buf, " %.17g", v);
    os << buf;
  }
  os << "\n";
  for (std::size_t m = 0; m < snapshots.size(); ++m) {
    const Csr& a = snapshots[m];
    std::snprintf(buf, sizeof buf, "%.17g", snapshot_time[m]);
    os << "snapshot " << m << " " << buf << " " << a.val.size() << "\n";
    for (int r = 0; r < a.n; ++r) {
      for (int k = a.row_ptr[r]; k < a.row_ptr[r + 1]; ++k) {
        char line[96];
        std::snprintf(line, sizeof line, "%d %d %.17g\n", r, a.col[k], a.val[k]);
        os << line;
      }
    }
  }
}

TransportOperator TransportOperator::load(std::istream& is, const Grid& g) {
  std::string line;
  if (!std::getline(is, line) || line.rfind("# ndopfe transport v1", 0) != 0)
    throw ConfigError("transport file: missing '# ndopfe transport v1' header");

  TransportOperator op;
  std::size_t cells = 0, n_snapshots = 0;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    if (tag == "period") {
      ls >> op.period;
    } else if (tag == "cells") {
      ls >> cells;
    } else if (tag == "snapshots") {
      ls >> n_snapshots;
    } else if (tag == "volumes") {
      double v;
      while (ls >> v) op.volumes.push_back(v);
    } else if (tag == "snapshot") {
      std::size_t idx, nnz;
      double tm;
      ls >> idx >> tm >> nnz;
      if (idx != op.snapshots.size()) throw ConfigError("transport file: snapshots out of order");
      op.snapshot_time.push_back(tm);
      MatrixBuilder mb(static_cast<int>(cells));
      for (std::size_t e = 0; e < nnz; ++e) {
        int r, c;
        double v;
        if (!(is >> r >> c >> v)) throw ConfigError("transport file: truncated snapshot block");
        if (r < 0 || c < 0 || r >= static_cast<int>(cells) || c >= static_cast<int>(cells))
          throw ConfigError("transport file: entry index out of range");
        mb.add(r, c, v);
      }
      std::getline(is, line);  // consume end of the last entry line
      op.snapshots.push_back(mb.finish());
    } else {
      throw ConfigError("transport file: unknown tag '" + tag + "'");
    }
  }
  if (op.volumes.size() != cells) throw ConfigError("transport file: volumes do not match cell count");
  if (op.snapshots.size() != n_snapshots)
    throw ConfigError("transport file: snapshot count does not match header");
  if (cells != g.n_cells()) throw ConfigError("transport file: cell count does not match the grid");
  for (std::size_t c = 0; c < cells; ++c) {
    const double rel = std::abs(op.volumes[c] - g.cell_volume[c]) /
                       std::max(1e-300, std::abs(g.cell_volume[c]));
    if (rel > 1e-12) throw ConfigError("transport file: volumes do not match the grid");
  }
  return op;
}

struct ImplicitTransport::Impl {
  const TransportOperator* op;
  std::vector<Eigen::SparseLU<Eigen::SparseMatrix<double>>> lu;
};

ImplicitTransport::ImplicitTransport(const TransportOperator& op, double dt)
    : impl_(new Impl{&op, {}}) {
  const int n = static_cast<int>(op.n_cells());
  impl_->lu = std::vector<Eigen::SparseLU<Eigen::SparseMatrix<double>>>(op.snapshots.size());
  for (std::size_t m = 0; m < op.snapshots.size(); ++m) {
    const Csr& a = op.snapshots[m];
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(a.val.size() + n);
    for (int r = 0; r < n; ++r) trip.emplace_back(r, r, 1.0);
    for (int r = 0; r < n; ++r)
      for (int k = a.row_ptr[r]; k < a.row_ptr[r + 1]; ++k)
        trip.emplace_back(r, a.col[k], -dt * a.val[k]);
    Eigen::SparseMatrix<double> M(n, n);
    M.setFromTriplets(trip.begin(), trip.end());
    impl_->lu[m].compute(M);
    if (impl_->lu[m].info() != Eigen::Success)
      throw SolverError("implicit transport: factorization failed for snapshot " +
                        std::to_string(m));
  }
}

ImplicitTransport::~ImplicitTransport() = default;
ImplicitTransport::ImplicitTransport(ImplicitTransport&&) noexcept = default;
ImplicitTransport& ImplicitTransport::operator=(ImplicitTransport&&) noexcept = default;

void ImplicitTransport::step(std::span<double> x, double t) const {
  const int m = impl_->op->snapshot_at(t);
  Eigen::Map<Eigen::VectorXd> v(x.data(), static_cast<Eigen::Index>(x.size()));
  Eigen::VectorXd sol = impl_->lu[m].solve(v);
  v = sol;
}

}  // namespace ndopfe
