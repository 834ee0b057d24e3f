#include "ndopfe/identifiability.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <random>

#include "ndopfe/errors.hpp"
#include "ndopfe/kernels.hpp"
#include "ndopfe/numerics.hpp"

namespace ndopfe {

CollisionPair make_collision_pair(const ParameterSet& u1, double C, double K_P2, double K_I2,
                                  double K_W2) {
  if (!(C > 0.0)) throw ConfigError("collision pair: C = alpha1/alpha2 must be positive");
  if (!(K_P2 > 0.0 && K_I2 > 0.0 && K_W2 > 0.0))
    throw ConfigError("collision pair: K_P2, K_I2, K_W2 must be positive");
  CollisionPair pair;
  pair.u1 = u1;
  pair.u2 = u1;  // lambda, nu, b, K_F and the iron constants stay equal
  pair.u2.alpha = u1.alpha / C;
  pair.u2.K_P = K_P2;
  pair.u2.K_I = K_I2;
  pair.u2.K_W = K_W2;
  pair.C = C;
  pair.c1 = u1.K_P - C * K_P2;
  pair.c2 = u1.K_P * u1.K_I;
  pair.c3 = C * K_P2 * K_I2;
  pair.c4 = C - 1.0;
  pair.c5 = u1.K_I;
  pair.c6 = C * K_I2;
  pair.c7 = u1.K_W;
  pair.c8 = K_W2;
  return pair;
}

double constraint_residual(const CollisionPair& p) {
  return p.c1 - (p.c2 / p.c5 - (p.c4 + 1.0) * p.c3 / p.c6);
}

std::optional<double> collision_profile(const CollisionPair& p, double I, double x3) {
  const double e7 = std::exp(x3 * p.c7);
  const double e8 = std::exp(x3 * p.c8);
  const double num = p.c1 * I + p.c2 * e7 - p.c3 * e8;
  const double den = p.c4 * I - p.c5 * e7 + p.c6 * e8;
  const double den_scale = std::abs(p.c4 * I) + std::abs(p.c5 * e7) + std::abs(p.c6 * e8);
  if (std::abs(den) <= 1e-12 * den_scale) return std::nullopt;
  const double y1 = num / den;
  if (!std::isfinite(y1) || !(y1 > 0.0)) return std::nullopt;
  return y1;
}

CollisionSample evaluate_collision(const CollisionPair& pair, double I, double x3, double y3) {
  CollisionSample s;
  s.I = I;
  s.x3 = x3;
  const auto y1 = collision_profile(pair, I, x3);
  if (!y1) return s;
  s.admissible = true;
  s.y1 = *y1;
  s.G1 = kernels::uptake_G(s.y1, y3, I, x3, pair.u1, true);
  s.G2 = kernels::uptake_G(s.y1, y3, I, x3, pair.u2, true);
  s.gap = std::abs(s.G1 - s.G2);
  return s;
}

CollisionVerification verify_collision(const CollisionPair& pair,
                                       std::span<const std::pair<double, double>> samples,
                                       double y3) {
  CollisionVerification v;
  v.total = static_cast<int>(samples.size());
  for (const auto& [I, x3] : samples) {
    const CollisionSample s = evaluate_collision(pair, I, x3, y3);
    if (!s.admissible) continue;
    ++v.admissible;
    v.max_gap = std::max(v.max_gap, s.gap);
  }
  if (v.admissible == 0)
    throw SolverError("verify_collision: no admissible sample on the profile");
  return v;
}

double recover_lambda(double r2_aphotic, double y2) {
  if (y2 == 0.0) throw std::domain_error("recover_lambda: needs y2 != 0");
  return -r2_aphotic / y2;
}

double recover_nu(double r2_euphotic, double lambda, double y2, double G) {
  if (G == 0.0) throw std::domain_error("recover_nu: needs nontrivial uptake");
  return (r2_euphotic + lambda * y2) / G;
}

double recover_b(double bottom_deposit, double export_production, double h, double h_bar_e) {
  if (!(export_production != 0.0))
    throw std::domain_error("recover_b: needs nonzero column export");
  const double q = h / h_bar_e;
  if (!(q > 1.0)) throw std::domain_error("recover_b: needs an aphotic column (h > h_bar_e)");
  return -std::log(bottom_deposit / export_production) / std::log(q);
}

TwinScenario TwinScenario::desk_default() {
  TwinScenario sc;
  sc.grid = Grid::twin_default();
  sc.transport = build_synthetic(sc.grid, TransportSettings{});
  sc.forcing = Forcing::defaults_for(sc.grid);
  sc.base_params = ParameterSet{};
  sc.solver = SolverSettings{};
  return sc;
}

Observations forward_observe(const ParameterSet& p, const TwinScenario& sc) {
  Simulator sim(sc.grid, sc.transport, sc.forcing, p, sc.solver);
  const int steps = sim.steps_per_period();
  if (sc.months < 1 || steps % sc.months != 0)
    throw ConfigError("twin scenario: months must divide the steps per period");
  const int steps_per_month = steps / sc.months;

  TracerState y = uniform_state_with_mass(sc.mass_C, sc.grid, sc.solver.y3_init);
  Observations obs;
  obs.spinup_converged = true;

  TracerState start = y;
  for (int cycle = 1; cycle <= sc.spin_cycles; ++cycle) {
    start = y;
    for (int k = 0; k < steps; ++k) sim.step(y, k * sc.solver.dt);
    if (sc.spin_tol > 0.0 && state_distance(y, start, sc.grid) <= sc.spin_tol) break;
    if (sc.spin_tol > 0.0 && cycle == sc.spin_cycles) obs.spinup_converged = false;
  }

  const std::size_t n = sc.grid.n_cells();
  obs.y1.assign(sc.months, std::vector<double>(n, 0.0));
  obs.y2.assign(sc.months, std::vector<double>(n, 0.0));
  for (int k = 0; k < steps; ++k) {
    sim.step(y, k * sc.solver.dt);
    const int m = k / steps_per_month;
    for (std::size_t c = 0; c < n; ++c) {
      obs.y1[m][c] += y.y1[c];
      obs.y2[m][c] += y.y2[c];
    }
  }
  for (int m = 0; m < sc.months; ++m) {
    for (std::size_t c = 0; c < n; ++c) {
      obs.y1[m][c] /= steps_per_month;
      obs.y2[m][c] /= steps_per_month;
    }
  }
  return obs;
}

Observations synth_observations(const ParameterSet& truth, const TwinScenario& sc,
                                double noise_amplitude, std::uint64_t seed) {
  Observations obs = forward_observe(truth, sc);
  obs.noise_amplitude = noise_amplitude;
  obs.seed = seed;
  if (noise_amplitude > 0.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, noise_amplitude);
    for (auto* field : {&obs.y1, &obs.y2})
      for (auto& month : *field)
        for (double& v : month) v += gauss(rng);
  }
  return obs;
}

double misfit(const ParameterSet& p, const TwinScenario& sc, const Observations& obs) {
  try {
    const Observations model = forward_observe(p, sc);
    CompensatedSum ssq;
    for (std::size_t m = 0; m < obs.y1.size(); ++m) {
      for (std::size_t c = 0; c < sc.grid.n_cells(); ++c) {
        const double d1 = model.y1[m][c] - obs.y1[m][c];
        const double d2 = model.y2[m][c] - obs.y2[m][c];
        ssq.add((d1 * d1 + d2 * d2) * sc.grid.cell_volume[c]);
      }
    }
    return ssq.value();
  } catch (const std::exception&) {
    return std::numeric_limits<double>::infinity();
  }
}

std::vector<ParameterBounds> IdentifySettings::default_bounds() {
  return {
      {"lambda", 0.01, 0.3}, {"alpha", 0.3, 6.0}, {"K_P", 0.05, 2.0}, {"K_I", 5.0, 100.0},
      {"K_W", 0.005, 0.06},  {"b", 0.2, 1.6},     {"nu", 0.35, 0.98},
  };
}

namespace {

ParameterSet assemble_candidate(const TwinScenario& sc, const IdentificationSubset& subset,
                                std::span<const std::string_view> names,
                                std::span<const double> x) {
  ParameterSet p = sc.base_params;
  if (subset.mode == SubsetMode::Reduced5) {
    p.K_I = subset.fixed_K_I;
    p.K_W = subset.fixed_K_W;
  }
  for (std::size_t i = 0; i < names.size(); ++i) set_parameter(p, names[i], x[i]);
  return p;
}

double obs_norm_ssq(const Observations& obs, const Grid& g) {
  CompensatedSum ssq;
  for (std::size_t m = 0; m < obs.y1.size(); ++m)
    for (std::size_t c = 0; c < g.n_cells(); ++c)
      ssq.add((obs.y1[m][c] * obs.y1[m][c] + obs.y2[m][c] * obs.y2[m][c]) * g.cell_volume[c]);
  return ssq.value();
}

}  // namespace

RecoveryReport identify(const Observations& obs, const TwinScenario& sc,
                        const IdentificationSubset& subset, const IdentifySettings& settings,
                        const ParameterSet* truth) {
  RecoveryReport report;
  report.names = subset.optimized_names();
  const std::size_t d = report.names.size();

  const std::vector<ParameterBounds> bounds_table =
      settings.bounds.empty() ? IdentifySettings::default_bounds() : settings.bounds;
  std::vector<double> lo(d), hi(d);
  for (std::size_t i = 0; i < d; ++i) {
    const auto it = std::find_if(bounds_table.begin(), bounds_table.end(),
                                 [&](const ParameterBounds& b) { return b.name == report.names[i]; });
    if (it == bounds_table.end())
      throw ConfigError("identify: no bounds for parameter '" + std::string(report.names[i]) + "'");
    lo[i] = it->lower;
    hi[i] = it->upper;
  }

  report.obs_ssq = obs_norm_ssq(obs, sc.grid);
  report.restarts.resize(settings.starts);

  NelderMeadOptions nm = settings.nm;
  nm.max_evals = settings.budget;

#pragma omp parallel for schedule(dynamic, 1)
  for (int r = 0; r < settings.starts; ++r) {
    std::vector<double> x0(d);
    if (r == 0) {
      for (std::size_t i = 0; i < d; ++i) x0[i] = 0.5 * (lo[i] + hi[i]);
    } else {
      std::mt19937_64 rng(settings.seed + 0x9E3779B97F4A7C15ull * static_cast<std::uint64_t>(r));
      std::uniform_real_distribution<double> uni(0.05, 0.95);
      for (std::size_t i = 0; i < d; ++i) x0[i] = lo[i] + uni(rng) * (hi[i] - lo[i]);
    }

    auto objective = [&](std::span<const double> x) {
      const ParameterSet cand = assemble_candidate(sc, subset, report.names, x);
      return misfit(cand, sc, obs);
    };
    const NelderMeadResult res = nelder_mead_box(objective, lo, hi, x0, nm);

    RestartRecord rec;
    rec.index = r;
    rec.misfit = res.f;
    rec.evals = res.evals;
    rec.improvements = res.improvements;
    rec.simplex_converged = res.converged;
    rec.converged =
        res.converged && res.f <= settings.converged_rel_misfit * std::max(report.obs_ssq, 1e-300);
    rec.estimate = res.x;
    report.restarts[r] = std::move(rec);
  }

  report.best_restart = 0;
  for (int r = 1; r < settings.starts; ++r)
    if (report.restarts[r].misfit < report.restarts[report.best_restart].misfit)
      report.best_restart = r;
  report.best_misfit = report.restarts[report.best_restart].misfit;
  report.best_estimate = report.restarts[report.best_restart].estimate;
  for (const RestartRecord& rec : report.restarts)
    if (rec.converged) ++report.converged_restarts;

  if (truth) {
    report.truth.resize(d);
    report.best_rel_error.resize(d);
    for (std::size_t i = 0; i < d; ++i) {
      const ParameterField* f = find_parameter_field(report.names[i]);
      report.truth[i] = truth->*(f->member);
      report.best_rel_error[i] =
          std::abs(report.best_estimate[i] - report.truth[i]) / std::abs(report.truth[i]);
    }
  }
  return report;
}

void RecoveryReport::write_csv(std::ostream& os) const {
  os << "restart,misfit,evals,improvements,simplex_converged,converged";
  for (const auto& n : names) os << "," << n;
  os << "\n";
  char buf[64];
  for (const RestartRecord& r : restarts) {
    std::snprintf(buf, sizeof buf, "%d,%.17g,%d,%d,%d,%d", r.index, r.misfit, r.evals,
                  r.improvements, r.simplex_converged ? 1 : 0, r.converged ? 1 : 0);
    os << buf;
    for (double v : r.estimate) {
      std::snprintf(buf, sizeof buf, ",%.17g", v);
      os << buf;
    }
    os << "\n";
  }
}

void RecoveryReport::write_summary(std::ostream& os) const {
  char buf[256];
  std::snprintf(buf, sizeof buf, "best restart %d, misfit %.6g (relative %.6g), %d/%zu converged\n",
                best_restart, best_misfit, best_misfit / std::max(obs_ssq, 1e-300),
                converged_restarts, restarts.size());
  os << buf;
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (!truth.empty()) {
      std::snprintf(buf, sizeof buf, "  %-7s truth %12.6g   estimate %12.6g   rel.err %9.3g\n",
                    std::string(names[i]).c_str(), truth[i], best_estimate[i], best_rel_error[i]);
    } else {
      std::snprintf(buf, sizeof buf, "  %-7s estimate %12.6g\n", std::string(names[i]).c_str(),
                    best_estimate[i]);
    }
    os << buf;
  }
  // Restart scatter: the dependency signature of (alpha, K_P, K_I, K_W)
  // shows up as spread along a misfit-flat valley.
  for (std::size_t i = 0; i < names.size(); ++i) {
    double mn = std::numeric_limits<double>::infinity(), mx = -mn;
    for (const RestartRecord& r : restarts) {
      mn = std::min(mn, r.estimate[i]);
      mx = std::max(mx, r.estimate[i]);
    }
    std::snprintf(buf, sizeof buf, "  %-7s restart scatter [%12.6g, %12.6g]\n",
                  std::string(names[i]).c_str(), mn, mx);
    os << buf;
  }
}

}  // namespace ndopfe
