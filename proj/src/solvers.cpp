#include "ndopfe/solvers.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "ndopfe/errors.hpp"
#include "ndopfe/numerics.hpp"

namespace ndopfe {

namespace {

int checked_steps_per_period(double period, double dt) {
  const int n = static_cast<int>(std::lround(period / dt));
  if (n < 1 || std::abs(n * dt - period) > 1e-9 * period)
    throw ConfigError("solver: dt must divide the period");
  return n;
}

}  // namespace

void RunDiagnostics::write_csv(std::ostream& os) const {
  os << "cycle_or_step,time,mass_P,mass_Fe,residual\n";
  char buf[200];
  for (const DiagRow& r : rows) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g\n", r.key, r.time, r.mass_p,
                  r.mass_fe, r.residual);
    os << buf;
  }
}

Simulator::Simulator(const Grid& g, const TransportOperator& op, const Forcing& f,
                     const ParameterSet& p, const SolverSettings& s)
    : grid_(g), transport_(op), forcing_(f), params_(p), settings_(s) {
  if (!(s.dt > 0.0)) throw ConfigError("solver: dt must be positive");
  if (op.n_cells() != g.n_cells()) throw ConfigError("solver: operator does not match the grid");
  forcing_.validate(g);
  const ValidationReport rep = validate(p);
  if (!rep.ok()) {
    std::string msg = "solver: invalid parameter set:";
    for (const auto& v : rep.violations) msg += "\n  - " + v;
    throw ConfigError(msg);
  }
  steps_per_period_ = checked_steps_per_period(s.period, s.dt);

  if (s.transport_mode == TransportMode::Explicit) {
    const double dt_max = transport_.max_stable_dt();
    if (s.dt > dt_max) {
      char buf[160];
      std::snprintf(buf, sizeof buf,
                    "solver: explicit transport is unstable at dt = %g; max admissible dt = %.6g",
                    s.dt, dt_max);
      throw ConfigError(buf);
    }
  } else {
    implicit_.emplace(transport_, s.dt);
  }

  iron_source_ = iron_source_field(g, p, f);
  insolation_.resize(g.n_columns());
  tend_.resize(g.n_cells());
  r1_.resize(g.n_cells());
  r2_.resize(g.n_cells());
  r3_.resize(g.n_cells());
}

void Simulator::transport_step(TracerState& s, double t) {
  const double dt = settings_.dt;
  if (settings_.transport_mode == TransportMode::Explicit) {
    for (auto* y : {&s.y1, &s.y2, &s.y3}) {
      transport_.apply(*y, t, tend_, settings_.parallel);
      for (std::size_t c = 0; c < y->size(); ++c) (*y)[c] += dt * tend_[c];
    }
  } else {
    for (auto* y : {&s.y1, &s.y2, &s.y3}) implicit_->step(*y, t);
  }
}

void Simulator::reaction_step(TracerState& s, double t) {
  for (std::size_t c = 0; c < grid_.n_columns(); ++c)
    insolation_[c] = forcing_.insolation(static_cast<int>(c), t);
  if (settings_.parallel) {
    kernels::reaction_tendencies_all(grid_, s.y1, s.y2, s.y3, insolation_, iron_source_, params_,
                                     settings_.iron_variant, r1_, r2_, r3_);
  } else {
    kernels::reaction_tendencies_all_serial(grid_, s.y1, s.y2, s.y3, insolation_, iron_source_,
                                            params_, settings_.iron_variant, r1_, r2_, r3_);
  }
  const double dt = settings_.dt;
  for (std::size_t c = 0; c < grid_.n_cells(); ++c) {
    s.y1[c] += dt * r1_[c];
    s.y2[c] += dt * r2_[c];
    s.y3[c] += dt * r3_[c];
  }
}

void Simulator::clip_and_reinject(TracerState& s) {
  CompensatedSum deficit;
  for (std::size_t c = 0; c < grid_.n_cells(); ++c) {
    if (s.y1[c] < 0.0) {
      deficit.add(-s.y1[c] * grid_.cell_volume[c]);
      s.y1[c] = 0.0;
    }
    if (s.y2[c] < 0.0) {
      deficit.add(-s.y2[c] * grid_.cell_volume[c]);
      s.y2[c] = 0.0;
    }
  }
  const double shift = deficit.value() / grid_.total_volume();
  if (shift != 0.0)
    for (double& v : s.y1) v -= shift;
}

void Simulator::step(TracerState& s, double t) {
  transport_step(s, t);
  reaction_step(s, t);
  if (settings_.clip_negative) clip_and_reinject(s);
  ++step_count_;
  if (!all_finite(s.y1) || !all_finite(s.y2) || !all_finite(s.y3)) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "solver: non-finite state after step %ld (t = %g)", step_count_,
                  t);
    throw SolverError(buf);
  }
  s.time += settings_.dt;
}

RunDiagnostics Simulator::run_transient(TracerState& s, double T_end) {
  if (!(T_end >= 0.0)) throw ConfigError("solver: T_end must be nonnegative");
  const auto t0 = std::chrono::steady_clock::now();
  const int n = static_cast<int>(std::lround(T_end / settings_.dt));
  if (std::abs(n * settings_.dt - T_end) > 1e-9 * std::max(1.0, T_end))
    throw ConfigError("solver: T_end must be a multiple of dt");

  RunDiagnostics diag;
  const double mass0 = total_mass(s, grid_);
  diag.rows.push_back({0.0, 0.0, mass0, iron_content(s, grid_), 0.0});
  double max_drift = 0.0;
  for (int k = 0; k < n; ++k) {
    const double t = k * settings_.dt;
    step(s, t);
    const double m = total_mass(s, grid_);
    diag.rows.push_back(
        {static_cast<double>(k + 1), (k + 1) * settings_.dt, m, iron_content(s, grid_), 0.0});
    max_drift = std::max(max_drift, std::abs(m - mass0));
  }
  diag.steps = n;
  diag.mass_drift_rel = max_drift / std::max(std::abs(mass0), 1e-300);
  diag.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return diag;
}

std::pair<TracerState, RunDiagnostics> Simulator::spinup_periodic(double C, double tol,
                                                                  int max_cycles) {
  if (!(tol > 0.0)) throw ConfigError("spin-up: tol must be positive");
  if (max_cycles < 1) throw ConfigError("spin-up: max_cycles must be positive");
  const auto t0 = std::chrono::steady_clock::now();

  TracerState y = uniform_state_with_mass(C, grid_, settings_.y3_init);
  TracerState start = y;
  TracerState best = y;
  double best_residual = std::numeric_limits<double>::infinity();

  RunDiagnostics diag;
  diag.converged = false;
  for (int cycle = 1; cycle <= max_cycles; ++cycle) {
    start = y;
    for (int k = 0; k < steps_per_period_; ++k) step(y, k * settings_.dt);
    const double residual = state_distance(y, start, grid_);
    diag.residuals.push_back(residual);
    diag.rows.push_back({static_cast<double>(cycle), cycle * settings_.period,
                         total_mass(y, grid_), iron_content(y, grid_), residual});
    diag.cycles = cycle;
    diag.steps = cycle * steps_per_period_;
    if (residual < best_residual) {
      best_residual = residual;
      best = y;
    }
    if (residual <= tol) {
      diag.converged = true;
      break;
    }
  }
  diag.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {diag.converged ? y : best, std::move(diag)};
}

StationaryResult solve_stationary(const Grid& g, const TransportOperator& op, const Forcing& f,
                                  const ParameterSet& p, const SolverSettings& s, double C,
                                  double tol, int max_iters) {
  if (!(tol > 0.0)) throw ConfigError("stationary: tol must be positive");
  if (max_iters < 1) throw ConfigError("stationary: max_iters must be positive");
  const auto t0 = std::chrono::steady_clock::now();

  StationaryResult out{TracerState{}, RunDiagnostics{}, op.annual_mean(), f.frozen_annual_mean()};
  Simulator sim(g, out.mean_transport, out.mean_forcing, p, s);

  TracerState y = uniform_state_with_mass(C, g, s.y3_init);
  TracerState start = y;
  TracerState before_last_step = y;
  RunDiagnostics& diag = out.diag;
  diag.converged = false;
  for (int it = 1; it <= max_iters; ++it) {
    start = y;
    for (int k = 0; k < sim.steps_per_period(); ++k) {
      if (k == sim.steps_per_period() - 1) before_last_step = y;
      sim.step(y, k * s.dt);
    }
    const double residual = state_distance(y, start, g);
    diag.residuals.push_back(residual);
    diag.rows.push_back({static_cast<double>(it), it * s.period, total_mass(y, g),
                         iron_content(y, g), residual});
    diag.cycles = it;
    diag.steps = it * sim.steps_per_period();
    diag.final_step_tendency = state_distance(y, before_last_step, g) / s.dt;
    if (residual <= tol) {
      diag.converged = true;
      break;
    }
  }
  diag.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  out.state = std::move(y);
  return out;
}

}  // namespace ndopfe
