#include <doctest.h>

#include <random>
#include <sstream>

#include "ndopfe/errors.hpp"
#include "ndopfe/identifiability.hpp"
#include "ndopfe/kernels.hpp"

using namespace ndopfe;

namespace {

CollisionPair default_pair() {
  const ParameterSet u1;
  return make_collision_pair(u1, 1.25, 0.35, 40.0, 0.018);
}

std::vector<std::pair<double, double>> sample_grid() {
  std::vector<std::pair<double, double>> s;
  for (double I : {25.0, 50.0, 100.0, 200.0})
    for (int k = 0; k <= 30; ++k) s.emplace_back(I, 4.0 * k);
  return s;
}

}  // namespace

TEST_CASE("constraint identity holds to round-off") {
  const CollisionPair pair = default_pair();
  const double scale = std::abs(pair.c1) + std::abs(pair.c2 / pair.c5) +
                       std::abs((pair.c4 + 1.0) * pair.c3 / pair.c6);
  CHECK(std::abs(constraint_residual(pair)) <= 1e-14 * std::max(scale, 1e-300));
}

TEST_CASE("identical parameter sets degenerate the profile to nothing") {
  const ParameterSet u1;
  const CollisionPair pair = make_collision_pair(u1, 1.0, u1.K_P, u1.K_I, u1.K_W);
  for (double I : {10.0, 50.0, 150.0})
    for (double x3 : {0.0, 30.0, 90.0, 119.0}) CHECK(!collision_profile(pair, I, x3).has_value());
}

TEST_CASE("the profile is exactly where both uptakes collide") {
  const CollisionPair pair = default_pair();
  const auto samples = sample_grid();
  const CollisionVerification v = verify_collision(pair, samples);
  CHECK(v.admissible >= 50);
  CHECK(v.max_gap <= 1e-12);
}

TEST_CASE("off the profile the collision breaks") {
  const CollisionPair pair = default_pair();
  for (const auto& [I, x3] : sample_grid()) {
    const auto y1 = collision_profile(pair, I, x3);
    if (!y1) continue;
    const double y = *y1 * 1.1;  // +10 percent
    const double g1 = kernels::uptake_G(y, 0.5, I, x3, pair.u1);
    const double g2 = kernels::uptake_G(y, 0.5, I, x3, pair.u2);
    CHECK(std::abs(g1 - g2) > 1e-9);
  }
}

TEST_CASE("profile sweep is smooth apart from isolated denominator zeros") {
  const CollisionPair pair = default_pair();
  int admissible = 0, total = 0;
  for (int k = 0; k <= 120; ++k) {
    const auto y1 = collision_profile(pair, 100.0, static_cast<double>(k));
    ++total;
    if (y1) {
      ++admissible;
      CHECK(std::isfinite(*y1));
      CHECK(*y1 > 0.0);
    }
  }
  CHECK(admissible >= total / 2);
}

TEST_CASE("verification needs at least one admissible sample") {
  const ParameterSet u1;
  const CollisionPair degenerate = make_collision_pair(u1, 1.0, u1.K_P, u1.K_I, u1.K_W);
  const auto samples = sample_grid();
  CHECK_THROWS_AS(verify_collision(degenerate, samples), SolverError);
}

TEST_CASE("collision pair construction validates its inputs") {
  const ParameterSet u1;
  CHECK_THROWS_AS(make_collision_pair(u1, -1.0, 0.5, 30.0, 0.02), ConfigError);
  CHECK_THROWS_AS(make_collision_pair(u1, 1.0, 0.0, 30.0, 0.02), ConfigError);
}

TEST_CASE("scalar recoveries mirror the uniqueness arguments") {
  const ParameterSet p;

  SUBCASE("lambda from the aphotic DOP tendency") {
    const double y2 = 0.42;
    const double r2 = -p.lambda * y2;
    CHECK(recover_lambda(r2, y2) == doctest::Approx(p.lambda).epsilon(1e-14));
    // two different lambdas produce different tendencies for y2 != 0
    CHECK(-0.08 * y2 != -0.05 * y2);
    CHECK_THROWS_AS(recover_lambda(r2, 0.0), std::domain_error);
  }

  SUBCASE("nu from the euphotic DOP tendency") {
    const double y2 = 0.3, G = 0.7;
    const double r2 = -p.lambda * y2 + p.nu * G;
    CHECK(recover_nu(r2, p.lambda, y2, G) == doctest::Approx(p.nu).epsilon(1e-14));
    CHECK_THROWS_AS(recover_nu(r2, p.lambda, y2, 0.0), std::domain_error);
  }

  SUBCASE("b from the bottom deposit of an aphotic column") {
    const double exportP = 1.7, h = 2000.0;
    const double deposit = exportP * std::pow(h / 120.0, -p.b);
    CHECK(recover_b(deposit, exportP, h) == doctest::Approx(p.b).epsilon(1e-12));
    CHECK_THROWS_AS(recover_b(deposit, 0.0, h), std::domain_error);
    CHECK_THROWS_AS(recover_b(deposit, exportP, 100.0), std::domain_error);
  }
}

namespace {

TwinScenario quick_scenario() {
  TwinScenario sc = TwinScenario::desk_default();
  sc.spin_cycles = 2;  // keep unit tests fast
  return sc;
}

}  // namespace

TEST_CASE("twin observations are deterministic and noise is seeded") {
  const TwinScenario sc = quick_scenario();
  const ParameterSet truth = sc.base_params;

  const Observations a = synth_observations(truth, sc);
  const Observations b = synth_observations(truth, sc);
  REQUIRE(a.y1.size() == 12);
  for (std::size_t m = 0; m < a.y1.size(); ++m)
    for (std::size_t c = 0; c < sc.grid.n_cells(); ++c) {
      CHECK(a.y1[m][c] == b.y1[m][c]);
      CHECK(a.y2[m][c] == b.y2[m][c]);
    }

  const Observations noisy1 = synth_observations(truth, sc, 1e-3, 99);
  const Observations noisy2 = synth_observations(truth, sc, 1e-3, 99);
  const Observations noisy3 = synth_observations(truth, sc, 1e-3, 100);
  bool any_diff_seed = false, all_same = true;
  for (std::size_t m = 0; m < noisy1.y1.size(); ++m)
    for (std::size_t c = 0; c < sc.grid.n_cells(); ++c) {
      all_same = all_same && noisy1.y1[m][c] == noisy2.y1[m][c];
      any_diff_seed = any_diff_seed || noisy1.y1[m][c] != noisy3.y1[m][c];
    }
  CHECK(all_same);
  CHECK(any_diff_seed);
}

TEST_CASE("misfit vanishes exactly at the truth and grows away from it") {
  const TwinScenario sc = quick_scenario();
  const ParameterSet truth = sc.base_params;
  const Observations obs = synth_observations(truth, sc);
  CHECK(misfit(truth, sc, obs) == 0.0);

  ParameterSet off = truth;
  off.lambda *= 1.3;
  CHECK(misfit(off, sc, obs) > 0.0);

  ParameterSet invalid = truth;
  invalid.nu = 2.0;  // forward model refuses: scored as +infinity
  CHECK(misfit(invalid, sc, obs) == std::numeric_limits<double>::infinity());
}

TEST_CASE("starting the search at the truth stays there with zero improvements") {
  const TwinScenario sc = quick_scenario();
  const ParameterSet truth = sc.base_params;
  const Observations obs = synth_observations(truth, sc);

  IdentificationSubset subset;
  subset.mode = SubsetMode::Reduced5;
  subset.fixed_K_I = truth.K_I;
  subset.fixed_K_W = truth.K_W;
  const auto names = subset.optimized_names();

  std::vector<double> x0, lo, hi;
  for (const auto& n : names) {
    const double v = truth.*(find_parameter_field(n)->member);
    x0.push_back(v);
    lo.push_back(v * 0.5);
    hi.push_back(v * 1.5);
  }
  auto objective = [&](std::span<const double> x) {
    ParameterSet cand = truth;
    for (std::size_t i = 0; i < names.size(); ++i) set_parameter(cand, names[i], x[i]);
    return misfit(cand, sc, obs);
  };
  NelderMeadOptions opt;
  opt.max_evals = 40;
  const NelderMeadResult res = nelder_mead_box(objective, lo, hi, x0, opt);
  CHECK(res.f == 0.0);
  CHECK(res.improvements == 0);
  for (std::size_t i = 0; i < names.size(); ++i) CHECK(res.x[i] == x0[i]);
}

TEST_CASE("identify smoke run: deterministic report, sane shape") {
  const TwinScenario sc = quick_scenario();
  const ParameterSet truth = sc.base_params;
  const Observations obs = synth_observations(truth, sc);

  IdentificationSubset subset;
  subset.mode = SubsetMode::Reduced5;
  subset.fixed_K_I = truth.K_I;
  subset.fixed_K_W = truth.K_W;

  IdentifySettings settings;
  settings.starts = 2;
  settings.budget = 30;

  auto run = [&] {
    const RecoveryReport rep = identify(obs, sc, subset, settings, &truth);
    std::ostringstream os;
    rep.write_csv(os);
    return std::make_pair(rep, os.str());
  };
  const auto [rep, csv] = run();
  REQUIRE(rep.restarts.size() == 2);
  CHECK(rep.names.size() == 5);
  CHECK(rep.best_misfit >= 0.0);
  CHECK(rep.truth.size() == 5);
  for (double e : rep.best_rel_error) CHECK(e >= 0.0);
  for (const RestartRecord& r : rep.restarts) CHECK(r.evals <= settings.budget + 8);

  const auto [rep2, csv2] = run();
  CHECK(csv == csv2);  // bit-identical rerun
}
