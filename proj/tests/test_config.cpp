#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "ndopfe/config.hpp"
#include "ndopfe/errors.hpp"
#include "ndopfe/version.hpp"

using namespace ndopfe;

TEST_CASE("default scenario resolves and its canonical form is a fixed point") {
  const Scenario sc = default_scenario();
  CHECK(sc.grid.n_cells() == 332);
  CHECK(sc.transport.snapshots.size() == 12);
  CHECK(sc.mass == 1.0);

  const Scenario again = load_scenario_text(sc.resolved);
  CHECK(again.resolved == sc.resolved);
}

TEST_CASE("scenario overrides reach every subsystem") {
  const char* text =
      "[grid]\n"
      "preset = twin4x2\n"
      "[parameters]\n"
      "lambda = 0.07\n"
      "b = 1.1\n"
      "[transport]\n"
      "kappa = 0.05\n"
      "snapshots = 6\n"
      "[forcing]\n"
      "I0 = 80\n"
      "F_in = 5\n"
      "source_spread = surface\n"
      "[solver]\n"
      "dt = 0.25\n"
      "mass = 4.5\n"
      "iron_variant = original\n"
      "transport_mode = implicit\n";
  const Scenario sc = load_scenario_text(text);
  CHECK(sc.grid.ni == 4);
  CHECK(sc.params.lambda == 0.07);
  CHECK(sc.params.b == 1.1);
  CHECK(sc.transport.snapshots.size() == 6);
  CHECK(sc.forcing.I0 == 80.0);
  CHECK(sc.forcing.F_in[0] == 5.0);
  CHECK(sc.forcing.spread == SourceSpread::Surface);
  CHECK(sc.solver.dt == 0.25);
  CHECK(sc.mass == 4.5);
  CHECK(sc.solver.iron_variant == kernels::IronVariant::Original);
  CHECK(sc.solver.transport_mode == TransportMode::Implicit);
}

TEST_CASE("strictness: unknown sections, keys and bad values are hard errors") {
  CHECK_THROWS_WITH_AS(load_scenario_text("[grid]\npreset = desk8x4\n[junk]\nx = 1\n"),
                       doctest::Contains("unknown section"), ConfigError);
  CHECK_THROWS_WITH_AS(load_scenario_text("[solver]\nwarp = 9\n"), doctest::Contains("unknown key"),
                       ConfigError);
  CHECK_THROWS_AS(load_scenario_text("[solver]\ndt = fast\n"), ConfigError);
  CHECK_THROWS_AS(load_scenario_text("[solver]\ndt = 0.5\ndt = 0.25\n"), ConfigError);
  CHECK_THROWS_AS(load_scenario_text("[grid]\npreset = pluto\n"), ConfigError);
  CHECK_THROWS_AS(load_scenario_text("[solver]\ntransport_mode = wishful\n"), ConfigError);
  CHECK_THROWS_AS(load_scenario_text("dt = 0.5\n"), ConfigError);  // key outside a section
  CHECK_THROWS_AS(load_scenario_text("[parameters]\nnu = 1.5\n"), ConfigError);
}

TEST_CASE("F_in_list must match the column count") {
  CHECK_THROWS_WITH_AS(load_scenario_text("[grid]\npreset = twin4x2\n[forcing]\nF_in_list = 1,2\n"),
                       doctest::Contains("per column"), ConfigError);
  std::string list = "[grid]\npreset = twin4x2\n[forcing]\nF_in_list = 1,2,3,4,5,6,7,8\n";
  const Scenario sc = load_scenario_text(list);
  CHECK(sc.forcing.F_in[7] == 8.0);
}

TEST_CASE("write_run_dir emits the canonical artifacts") {
  const Scenario sc = default_scenario();
  const std::string dir = (std::filesystem::temp_directory_path() / "ndopfe_test_rundir").string();
  std::filesystem::remove_all(dir);
  write_run_dir(dir, sc, {{"diagnostics.csv", "cycle_or_step,time\n"}});

  auto slurp = [&](const std::string& name) {
    std::ifstream is(std::filesystem::path(dir) / name, std::ios::binary);
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
  };
  CHECK(slurp("resolved.ini") == sc.resolved);
  CHECK(slurp("version.txt") == std::string(kVersion) + "\n");
  CHECK(slurp("diagnostics.csv") == "cycle_or_step,time\n");
  std::filesystem::remove_all(dir);
}

TEST_CASE("scenario can load the transport operator from a file") {
  const Scenario base = load_scenario_text("[grid]\npreset = twin4x2\n");
  const auto dir = std::filesystem::temp_directory_path() / "ndopfe_test_op";
  std::filesystem::create_directories(dir);
  {
    std::ofstream os(dir / "op.txt", std::ios::binary);
    base.transport.save(os);
  }
  const std::string text =
      "[grid]\npreset = twin4x2\n[transport]\nsource = file\nfile = op.txt\n";
  const Scenario sc = load_scenario_text(text, dir.string());
  REQUIRE(sc.transport.snapshots.size() == base.transport.snapshots.size());
  CHECK(sc.transport.snapshots[3].val == base.transport.snapshots[3].val);
  std::filesystem::remove_all(dir);
}
