#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "ndopfe/forcing.hpp"
#include "ndopfe/grid.hpp"
#include "ndopfe/params.hpp"
#include "ndopfe/solvers.hpp"
#include "ndopfe/transport.hpp"

namespace ndopfe {

/// Strict INI document: unknown sections, unknown keys and duplicates are
/// hard errors at scenario resolution time.
class IniDocument {
 public:
  struct Entry {
    std::string key;
    std::string value;
    int line = 0;
    mutable bool consumed = false;
  };

  static IniDocument parse(std::string_view text);

  const std::vector<Entry>* section(std::string_view name) const;
  /// Throws ConfigError listing every entry that was never consumed.
  void check_all_consumed() const;
  const std::vector<std::string>& section_names() const { return order_; }

 private:
  std::map<std::string, std::vector<Entry>, std::less<>> sections_;
  std::vector<std::string> order_;
};

/// A fully resolved, deterministic run setup. `resolved` holds the
/// canonical INI text (every key present, fixed order) that reruns the
/// scenario bit-identically; it is logged into every run directory.
struct Scenario {
  Grid grid;
  TransportOperator transport;
  Forcing forcing;
  ParameterSet params;
  SolverSettings solver;
  double mass = 1.0;
  double tol = 1e-6;
  int max_cycles = 3000;
  int max_iters = 5000;
  double t_end = 360.0;
  std::string resolved;

  // Raw choices kept for re-serialization.
  std::string grid_preset = "desk8x4";
  std::string grid_file;
  std::string transport_source = "synthetic";
  std::string transport_file;
  TransportSettings transport_settings;
};

Scenario load_scenario_text(std::string_view text, const std::string& base_dir = ".");
Scenario load_scenario_file(const std::string& path);
/// The bundled desk scenario: all defaults.
Scenario default_scenario();

/// Creates dir (recursively) and writes resolved.ini, version.txt and the
/// given CSV payloads. File contents carry no timestamps, so reruns with
/// identical config are bit-identical.
void write_run_dir(const std::string& dir, const Scenario& sc,
                   const std::vector<std::pair<std::string, std::string>>& files);

}  // namespace ndopfe
