#pragma once

#include <iosfwd>
#include <optional>
#include <vector>

#include "ndopfe/forcing.hpp"
#include "ndopfe/grid.hpp"
#include "ndopfe/kernels.hpp"
#include "ndopfe/params.hpp"
#include "ndopfe/transport.hpp"

namespace ndopfe {

enum class TransportMode { Explicit, Implicit };

struct SolverSettings {
  double dt = 0.5;        ///< days
  double period = 360.0;  ///< one forcing year
  TransportMode transport_mode = TransportMode::Explicit;
  kernels::IronVariant iron_variant = kernels::IronVariant::Adjusted;
  bool clip_negative = false;  ///< off by default; clipped mass reinjected into y1
  double y3_init = 0.5;        ///< uniform initial iron concentration
  bool parallel = true;
};

/// One diagnostics row: key is a step index for transient runs and a
/// cycle/iteration index for spin-up and stationary runs.
struct DiagRow {
  double key = 0.0;
  double time = 0.0;
  double mass_p = 0.0;
  double mass_fe = 0.0;
  double residual = 0.0;
};

struct RunDiagnostics {
  std::vector<DiagRow> rows;
  std::vector<double> residuals;  ///< per cycle / iteration, nonnegative
  int steps = 0;
  int cycles = 0;
  bool converged = true;
  double wall_seconds = 0.0;      ///< never written to CSV (reruns stay bit-identical)
  double mass_drift_rel = 0.0;    ///< transient runs: max |mass - mass0| / mass0
  double final_step_tendency = 0.0;  ///< stationary runs: ||step(y)-y||_V / dt at the end

  /// Fixed column order (see FORMATS.md), 17 significant digits.
  void write_csv(std::ostream& os) const;
};

/// Owns the scratch buffers of one integration; not safe to share one
/// instance across threads (build one per worker instead). The referenced
/// grid/transport/forcing must outlive the simulator.
class Simulator {
 public:
  Simulator(const Grid& g, const TransportOperator& op, const Forcing& f, const ParameterSet& p,
            const SolverSettings& s);

  /// One operator-split step of length dt at time-of-year t: transport
  /// first (explicit tendency or backward Euler per settings), then the
  /// reaction tendencies. Throws SolverError when the state stops being
  /// finite.
  void step(TracerState& state, double t);

  /// Repeated stepping with mass recorded every step.
  RunDiagnostics run_transient(TracerState& state, double T_end);

  /// Spin-up from the uniform state with phosphorus mass C. The residual
  /// of cycle k is the volume-weighted L2 distance between the year's
  /// start and end states. Non-convergence is a reported outcome (flag),
  /// not an error; the best iterate is returned.
  std::pair<TracerState, RunDiagnostics> spinup_periodic(double C, double tol, int max_cycles);

  const Grid& grid() const { return grid_; }
  const ParameterSet& params() const { return params_; }
  const SolverSettings& settings() const { return settings_; }
  int steps_per_period() const { return steps_per_period_; }

 private:
  void transport_step(TracerState& state, double t);
  void reaction_step(TracerState& state, double t);
  void clip_and_reinject(TracerState& state);

  const Grid& grid_;
  const TransportOperator& transport_;
  const Forcing& forcing_;
  ParameterSet params_;
  SolverSettings settings_;
  std::optional<ImplicitTransport> implicit_;
  std::vector<double> iron_source_;
  std::vector<double> insolation_;
  std::vector<double> tend_;  // transport scratch
  std::vector<double> r1_, r2_, r3_;
  int steps_per_period_ = 0;
  long step_count_ = 0;
};

struct StationaryResult {
  TracerState state;
  RunDiagnostics diag;
  /// Frozen (annual mean) operator and forcing actually used; callers can
  /// run consistency checks against them.
  TransportOperator mean_transport;
  Forcing mean_forcing;
};

/// Stationary solve under frozen forcing: transport and insolation are
/// replaced by their annual means, then pseudo-time years are iterated.
/// The residual of iteration k is the Picard displacement of the year map
/// (the volume-weighted L2 distance between the pseudo-year's start and
/// end states); iteration stops at residual <= tol.
StationaryResult solve_stationary(const Grid& g, const TransportOperator& op, const Forcing& f,
                                  const ParameterSet& p, const SolverSettings& s, double C,
                                  double tol, int max_iters);

}  // namespace ndopfe
