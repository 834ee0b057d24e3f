// Command-line entry point: scenario runs, the identifiability lab, and
// kernel curve emission. Exit codes: 0 success, 2 config error,
// 3 non-convergence flag, 4 runtime failure.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <omp.h>

#include <CLI11.hpp>

#include "ndopfe/config.hpp"
#include "ndopfe/errors.hpp"
#include "ndopfe/identifiability.hpp"
#include "ndopfe/kernels.hpp"
#include "ndopfe/solvers.hpp"
#include "ndopfe/version.hpp"

namespace {

using namespace ndopfe;

struct CommonArgs {
  std::string config;
  std::string out = "out";
};

Scenario load(const CommonArgs& a) {
  if (a.config.empty()) return default_scenario();
  return load_scenario_file(a.config);
}

std::string csv_of_diag(const RunDiagnostics& d) {
  std::ostringstream os;
  d.write_csv(os);
  return os.str();
}

std::string csv_of_state(const TracerState& s, const Grid& g) {
  std::ostringstream os;
  save_state_csv(os, s, g);
  return os.str();
}

int cmd_run_transient(const CommonArgs& a, double t_end_override) {
  Scenario sc = load(a);
  if (t_end_override >= 0.0) sc.t_end = t_end_override;
  Simulator sim(sc.grid, sc.transport, sc.forcing, sc.params, sc.solver);
  TracerState y = uniform_state_with_mass(sc.mass, sc.grid, sc.solver.y3_init);
  RunDiagnostics diag = sim.run_transient(y, sc.t_end);
  write_run_dir(a.out, sc,
                {{"diagnostics.csv", csv_of_diag(diag)}, {"state_final.csv", csv_of_state(y, sc.grid)}});
  std::printf("transient: %d steps over %g days, relative mass drift %.3g (%.2f s)\n", diag.steps,
              sc.t_end, diag.mass_drift_rel, diag.wall_seconds);
  return 0;
}

int cmd_spinup(const CommonArgs& a, double mass, double tol, int max_cycles) {
  Scenario sc = load(a);
  if (mass > 0.0) sc.mass = mass;
  if (tol > 0.0) sc.tol = tol;
  if (max_cycles > 0) sc.max_cycles = max_cycles;
  Simulator sim(sc.grid, sc.transport, sc.forcing, sc.params, sc.solver);
  auto [state, diag] = sim.spinup_periodic(sc.mass, sc.tol, sc.max_cycles);
  write_run_dir(a.out, sc,
                {{"diagnostics.csv", csv_of_diag(diag)},
                 {"state_cycle.csv", csv_of_state(state, sc.grid)}});
  std::printf("spin-up: %d cycles, final residual %.6g, mass %.17g (%.2f s)%s\n", diag.cycles,
              diag.residuals.empty() ? 0.0 : diag.residuals.back(), total_mass(state, sc.grid),
              diag.wall_seconds, diag.converged ? "" : " [NOT CONVERGED]");
  return diag.converged ? 0 : 3;
}

int cmd_stationary(const CommonArgs& a, double mass, double tol, int max_iters) {
  Scenario sc = load(a);
  if (mass > 0.0) sc.mass = mass;
  if (tol > 0.0) sc.tol = tol;
  if (max_iters > 0) sc.max_iters = max_iters;
  StationaryResult res =
      solve_stationary(sc.grid, sc.transport, sc.forcing, sc.params, sc.solver, sc.mass, sc.tol,
                       sc.max_iters);
  write_run_dir(a.out, sc,
                {{"diagnostics.csv", csv_of_diag(res.diag)},
                 {"state_stationary.csv", csv_of_state(res.state, sc.grid)}});
  std::printf("stationary: %d pseudo-years, residual %.6g, step tendency %.6g (%.2f s)%s\n",
              res.diag.cycles, res.diag.residuals.empty() ? 0.0 : res.diag.residuals.back(),
              res.diag.final_step_tendency, res.diag.wall_seconds,
              res.diag.converged ? "" : " [NOT CONVERGED]");
  return res.diag.converged ? 0 : 3;
}

int cmd_identify(const CommonArgs& a, const std::string& subset_name, int starts, int budget,
                 double noise, std::uint64_t seed, int spin_cycles) {
  TwinScenario sc = TwinScenario::desk_default();
  if (!a.config.empty()) {
    Scenario base = load_scenario_file(a.config);
    sc.grid = std::move(base.grid);
    sc.transport = std::move(base.transport);
    sc.forcing = std::move(base.forcing);
    sc.base_params = base.params;
    sc.solver = base.solver;
    sc.mass_C = base.mass;
  }
  if (spin_cycles > 0) sc.spin_cycles = spin_cycles;

  IdentificationSubset subset;
  if (subset_name == "reduced5") {
    subset.mode = SubsetMode::Reduced5;
    subset.fixed_K_I = sc.base_params.K_I;
    subset.fixed_K_W = sc.base_params.K_W;
  } else if (subset_name == "full7") {
    subset.mode = SubsetMode::Full7;
  } else {
    throw ConfigError("identify: subset must be reduced5 or full7");
  }

  IdentifySettings settings;
  settings.starts = starts;
  settings.budget = budget;
  settings.seed = seed;

  const ParameterSet truth = sc.base_params;
  const Observations obs = synth_observations(truth, sc, noise, seed);
  const RecoveryReport report = identify(obs, sc, subset, settings, &truth);

  std::ostringstream csv, summary;
  report.write_csv(csv);
  report.write_summary(summary);
  std::filesystem::create_directories(a.out);
  std::ofstream(std::filesystem::path(a.out) / "report.csv", std::ios::binary) << csv.str();
  std::ofstream(std::filesystem::path(a.out) / "summary.txt", std::ios::binary) << summary.str();
  std::cout << summary.str();
  return 0;
}

int cmd_collide(const CommonArgs& a, double C, double K_P2, double K_I2, double K_W2,
                int n_depths) {
  const ParameterSet u1;
  const CollisionPair pair = make_collision_pair(u1, C, K_P2, K_I2, K_W2);
  std::ostringstream os;
  os << "x3,I,admissible,y1,G1,G2,gap\n";
  char buf[220];
  const double insolations[] = {25.0, 50.0, 100.0, 200.0};
  for (double I : insolations) {
    for (int k = 0; k <= n_depths; ++k) {
      const double x3 = 120.0 * k / n_depths;
      const CollisionSample s = evaluate_collision(pair, I, x3, 0.5);
      std::snprintf(buf, sizeof buf, "%.17g,%.17g,%d,%.17g,%.17g,%.17g,%.17g\n", x3, I,
                    s.admissible ? 1 : 0, s.y1, s.G1, s.G2, s.gap);
      os << buf;
    }
  }
  std::filesystem::create_directories(a.out);
  std::ofstream(std::filesystem::path(a.out) / "collision.csv", std::ios::binary) << os.str();
  std::printf("collide: wrote %s/collision.csv (constraint residual %.3g)\n", a.out.c_str(),
              constraint_residual(pair));
  return 0;
}

int cmd_kernels_check(const CommonArgs& a) {
  const ParameterSet p;
  char buf[160];

  std::ostringstream fe;
  fe << "y3,fe_prime,fe_adjusted\n";
  for (int k = -400; k <= 800; ++k) {
    const double y3 = k / 400.0;  // [-1, 2]
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", y3,
                  kernels::free_iron_original(y3, p.K_lig, p.L_T),
                  kernels::free_iron_adjusted(y3, p.K_lig, p.L_T));
    fe << buf;
  }

  std::ostringstream up;
  up << "y1,saturation,arctan_substitute\n";
  for (int k = 0; k <= 500; ++k) {
    const double y1 = k / 50.0;  // [0, 10]
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", y1, kernels::saturation(y1, 1.0),
                  0.6 * std::atan(y1));
    up << buf;
  }

  std::filesystem::create_directories(a.out);
  std::ofstream(std::filesystem::path(a.out) / "fe_curves.csv", std::ios::binary) << fe.str();
  std::ofstream(std::filesystem::path(a.out) / "uptake_substitute.csv", std::ios::binary)
      << up.str();
  std::printf("kernels-check: wrote %s/fe_curves.csv and %s/uptake_substitute.csv\n",
              a.out.c_str(), a.out.c_str());
  return 0;
}

int cmd_gen_circulation(const CommonArgs& a) {
  Scenario sc = load(a);
  std::filesystem::create_directories(a.out);
  {
    std::ofstream os(std::filesystem::path(a.out) / "transport.txt", std::ios::binary);
    sc.transport.save(os);
  }
  {
    std::ofstream os(std::filesystem::path(a.out) / "grid.txt", std::ios::binary);
    sc.grid.save(os);
  }
  std::printf("gen-circulation: wrote %s/transport.txt and %s/grid.txt\n", a.out.c_str(),
              a.out.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  if (const char* threads = std::getenv("NDOPFE_THREADS")) {
    const int n = std::atoi(threads);
    if (n > 0) omp_set_num_threads(n);
  }

  CLI::App app{std::string(ndopfe::kVersion) +
               " — PO4-DOP-Fe marine ecosystem simulator and identifiability lab"};
  app.require_subcommand(1);

  CommonArgs args;
  double t_end = -1.0, mass = 0.0, tol = 0.0, noise = 0.0;
  int max_cycles = 0, max_iters = 0, starts = 20, budget = 500, spin_cycles = 0, n_depths = 120;
  std::uint64_t seed = 1234;
  std::string subset = "reduced5";
  double C = 1.25, K_P2 = 0.35, K_I2 = 40.0, K_W2 = 0.018;

  auto add_common = [&](CLI::App* cmd, bool with_config = true) {
    if (with_config) cmd->add_option("--config", args.config, "scenario .ini file");
    cmd->add_option("--out", args.out, "output directory");
  };

  auto* transient = app.add_subcommand("run-transient", "integrate from the uniform state");
  add_common(transient);
  transient->add_option("--t-end", t_end, "override [solver] t_end (days)");

  auto* spin = app.add_subcommand("spin-up", "iterate whole years to a steady annual cycle");
  add_common(spin);
  spin->add_option("--mass", mass, "phosphorus mass C of the cycle")
      ->check(CLI::PositiveNumber.description("mass must be positive"));
  spin->add_option("--tol", tol, "periodic residual tolerance");
  spin->add_option("--max-cycles", max_cycles, "cycle budget");

  auto* stat = app.add_subcommand("stationary", "solve the frozen-forcing fixed point");
  add_common(stat);
  stat->add_option("--mass", mass, "phosphorus mass C")
      ->check(CLI::PositiveNumber.description("mass must be positive"));
  stat->add_option("--tol", tol, "residual tolerance");
  stat->add_option("--max-iters", max_iters, "pseudo-year budget");

  auto* ident = app.add_subcommand("identify", "twin-experiment parameter identification");
  add_common(ident);
  ident->add_option("--subset", subset, "reduced5 or full7");
  ident->add_option("--starts", starts, "number of restarts");
  ident->add_option("--budget", budget, "forward runs per restart");
  ident->add_option("--noise", noise, "additive observation noise amplitude");
  ident->add_option("--seed", seed, "noise / restart seed");
  ident->add_option("--spin-cycles", spin_cycles, "twin spin-up years");

  auto* collide = app.add_subcommand("collide", "emit an uptake collision profile table");
  add_common(collide, false);
  collide->add_option("--ratio", C, "C = alpha1/alpha2");
  collide->add_option("--K_P2", K_P2, "second phosphate half saturation");
  collide->add_option("--K_I2", K_I2, "second light half saturation");
  collide->add_option("--K_W2", K_W2, "second attenuation coefficient");
  collide->add_option("--depths", n_depths, "number of depth samples in [0,120]");

  auto* kc = app.add_subcommand("kernels-check", "emit free-iron and uptake substitute curves");
  add_common(kc, false);

  auto* gen = app.add_subcommand("gen-circulation", "write the synthetic operator and grid files");
  add_common(gen);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (transient->parsed()) return cmd_run_transient(args, t_end);
    if (spin->parsed()) return cmd_spinup(args, mass, tol, max_cycles);
    if (stat->parsed()) return cmd_stationary(args, mass, tol, max_iters);
    if (ident->parsed()) return cmd_identify(args, subset, starts, budget, noise, seed, spin_cycles);
    if (collide->parsed()) return cmd_collide(args, C, K_P2, K_I2, K_W2, n_depths);
    if (kc->parsed()) return cmd_kernels_check(args);
    if (gen->parsed()) return cmd_gen_circulation(args);
  } catch (const ndopfe::ConfigError& e) {
    std::fprintf(stderr, "ndopfe: config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "ndopfe: error: %s\n", e.what());
    return 4;
  }
  return 0;
}
