#pragma once

#include <iosfwd>
#include <memory>
#include <span>
#include <vector>

#include "ndopfe/grid.hpp"

namespace ndopfe {

/// Compressed sparse row matrix; rows are independent, so the matvec is
/// parallel across rows with identical results for any thread count.
struct Csr {
  int n = 0;
  std::vector<int> row_ptr;
  std::vector<int> col;
  std::vector<double> val;

  void apply(std::span<const double> x, std::span<double> y, bool parallel) const;
};

/// Time-periodic discrete transport operator in tendency form: applying a
/// snapshot to a concentration field yields d(field)/dt from advection and
/// diffusion. Mass-annihilating: the volume-weighted sum of every tendency
/// vanishes. Immutable after build; apply is reentrant.
class TransportOperator {
 public:
  double period = 360.0;
  std::vector<Csr> snapshots;
  std::vector<double> snapshot_time;  ///< time-of-year tags, ascending
  std::vector<double> volumes;        ///< per-cell m^3

  std::size_t n_cells() const { return volumes.size(); }

  /// Linear interpolation between the two bracketing snapshots (t taken
  /// modulo period), then apply.
  void apply(std::span<const double> x, double t, std::span<double> out,
             bool parallel = true) const;

  /// Plain-loop reference path, kept for tests and benchmarks.
  void apply_serial(std::span<const double> x, double t, std::span<double> out) const;

  void apply_snapshot(int m, std::span<const double> x, std::span<double> out,
                      bool parallel = true) const;

  /// Snapshot index whose interval contains t; used by the implicit mode,
  /// which holds the operator piecewise constant per snapshot interval.
  int snapshot_at(double t) const;

  /// Largest dt for which one explicit Euler transport step is monotone
  /// (1 + dt * diag >= 0 for every cell and snapshot). +inf for a zero
  /// operator.
  double max_stable_dt() const;

  /// Snapshot-mean operator with a single snapshot; used by the
  /// stationary mode.
  TransportOperator annual_mean() const;

  void save(std::ostream& os) const;
  static TransportOperator load(std::istream& is, const Grid& g);
};

struct TransportSettings {
  double gyre_strength = 0.5;     ///< horizontal velocity scale [m/day]
  double overturn_velocity = 5.0; ///< vertical velocity scale [m/day]
  double kappa = 0.15;            ///< diffusivity, equal in all equations [m^2/day]
  int n_snapshots = 12;
  double seasonal_amplitude = 0.3;  ///< modulation of the circulation strength
  double period = 360.0;
};

/// Finite-volume upwind advection from divergence-free streamfunctions
/// (one horizontal gyre per layer, one overturning cell per latitude row;
/// no normal flow through any boundary) plus central-difference diffusion
/// with uniform kappa. Warns on a single-cell grid, where the operator is
/// trivially zero.
TransportOperator build_synthetic(const Grid& g, const TransportSettings& s);

/// Convenience overload: gyre and overturning scale together.
TransportOperator build_synthetic(const Grid& g, double gyre_strength, double kappa);

/// Backward Euler transport solves with one factorization per snapshot,
/// reused across the run.
class ImplicitTransport {
 public:
  ImplicitTransport(const TransportOperator& op, double dt);
  ~ImplicitTransport();
  ImplicitTransport(ImplicitTransport&&) noexcept;
  ImplicitTransport& operator=(ImplicitTransport&&) noexcept;

  /// Solves (I - dt A_m) x_new = x in place, m = snapshot_at(t).
  void step(std::span<double> x, double t) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace ndopfe
