#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "ndopfe/forcing.hpp"
#include "ndopfe/grid.hpp"
#include "ndopfe/optimize.hpp"
#include "ndopfe/params.hpp"
#include "ndopfe/solvers.hpp"
#include "ndopfe/transport.hpp"

namespace ndopfe {

/// Two parameter sets differing only in (alpha, K_P, K_I, K_W) that
/// produce identical uptake along the collision profile, plus the derived
/// constants of that profile. C is the uptake ratio alpha1/alpha2.
struct CollisionPair {
  ParameterSet u1, u2;
  double C = 1.0;
  double c1 = 0, c2 = 0, c3 = 0, c4 = 0, c5 = 0, c6 = 0, c7 = 0, c8 = 0;
};

/// Builds u2 from u1 by the free choices (C, K_P2, K_I2, K_W2); all other
/// fields stay equal, alpha2 = alpha1 / C.
CollisionPair make_collision_pair(const ParameterSet& u1, double C, double K_P2, double K_I2,
                                  double K_W2);

/// c1 - (c2/c5 - (c4+1) c3/c6); an algebraic identity (zero) under the
/// constant mapping above, evaluated here to round-off.
double constraint_residual(const CollisionPair& pair);

/// The phosphate level at which both parameter sets produce the same
/// uptake at insolation I and depth x3. Returns nullopt when the
/// denominator vanishes (within relative tolerance 1e-12) or the value is
/// not a positive finite concentration.
std::optional<double> collision_profile(const CollisionPair& pair, double I, double x3);

struct CollisionSample {
  double I = 0, x3 = 0;
  double y1 = 0;      ///< profile value
  double G1 = 0, G2 = 0;
  double gap = 0;     ///< |G1 - G2|
  bool admissible = false;
};

CollisionSample evaluate_collision(const CollisionPair& pair, double I, double x3, double y3);

struct CollisionVerification {
  double max_gap = 0.0;
  int admissible = 0;
  int total = 0;
};

/// Max |G(u1, y1*) - G(u2, y1*)| over the admissible samples; the iron
/// factor is held equal across the pair. Throws SolverError when no sample
/// is admissible.
CollisionVerification verify_collision(const CollisionPair& pair,
                                       std::span<const std::pair<double, double>> samples,
                                       double y3 = 0.5);

// Scalar inversions mirroring the uniqueness arguments: each recovers a
// parameter from the tendency component the proof reduces to.
double recover_lambda(double r2_aphotic, double y2);
double recover_nu(double r2_euphotic, double lambda, double y2, double G);
double recover_b(double bottom_deposit, double export_production, double h, double h_bar_e = 120.0);

/// Everything a twin experiment needs to be reproducible: domain,
/// circulation, forcing, solver settings and the observation protocol
/// (spin-up schedule, mass, months).
struct TwinScenario {
  Grid grid;
  TransportOperator transport;
  Forcing forcing;
  ParameterSet base_params;  ///< source of all non-identified constants
  SolverSettings solver;
  double mass_C = 6000.0;
  int spin_cycles = 10;
  double spin_tol = 0.0;  ///< 0 disables the early exit: fixed-cycle protocol
  int months = 12;

  static TwinScenario desk_default();
};

/// Monthly-mean y1 and y2 fields of the cycle reached by the scenario's
/// spin-up schedule.
struct Observations {
  std::vector<std::vector<double>> y1, y2;  ///< [month][cell]
  bool spinup_converged = true;
  double noise_amplitude = 0.0;
  std::uint64_t seed = 0;
};

Observations forward_observe(const ParameterSet& p, const TwinScenario& sc);

/// Twin observations from a known truth; optional additive Gaussian noise
/// of the given amplitude, reproducible under the seed.
Observations synth_observations(const ParameterSet& truth, const TwinScenario& sc,
                                double noise_amplitude = 0.0, std::uint64_t seed = 0);

/// Volume-weighted sum-of-squares distance between the forward model under
/// p and the observations. Forward failures score +infinity.
double misfit(const ParameterSet& p, const TwinScenario& sc, const Observations& obs);

struct ParameterBounds {
  std::string_view name;
  double lower = 0, upper = 0;
};

struct IdentifySettings {
  int starts = 20;
  int budget = 500;  ///< forward evaluations per restart
  std::uint64_t seed = 1234;
  /// A restart counts as converged when the simplex collapsed and its
  /// misfit is below this fraction of the observation norm.
  double converged_rel_misfit = 1e-6;
  NelderMeadOptions nm;
  std::vector<ParameterBounds> bounds;  ///< empty: defaults

  static std::vector<ParameterBounds> default_bounds();
};

struct RestartRecord {
  int index = 0;
  double misfit = 0.0;
  int evals = 0;
  int improvements = 0;
  bool simplex_converged = false;
  bool converged = false;  ///< simplex_converged and misfit below threshold
  std::vector<double> estimate;
};

struct RecoveryReport {
  std::vector<std::string_view> names;
  std::vector<double> truth;  ///< empty when unknown
  std::vector<double> best_estimate;
  std::vector<double> best_rel_error;  ///< empty when truth unknown
  double best_misfit = 0.0;
  int best_restart = -1;
  int converged_restarts = 0;
  double obs_ssq = 0.0;  ///< scale used for relative misfit
  std::vector<RestartRecord> restarts;

  void write_csv(std::ostream& os) const;      ///< per-restart table
  void write_summary(std::ostream& os) const;  ///< human-readable
};

/// Multi-start bounded simplex search for the subset's parameters.
/// Restart 0 starts from the box midpoint, the rest from seeded uniform
/// draws; restarts may run in parallel and the report is deterministic.
RecoveryReport identify(const Observations& obs, const TwinScenario& sc,
                        const IdentificationSubset& subset, const IdentifySettings& settings,
                        const ParameterSet* truth = nullptr);

}  // namespace ndopfe
