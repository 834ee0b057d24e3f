#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ndopfe {

/// The N-DOP parameter vector plus the iron-cycle constants.
///
/// Units convention: concentrations in mmol m^-3 (phosphorus units); iron
/// carried in its own concentration unit and coupled through R_Fe; time in
/// days; depth in meters. The iron-cycle magnitudes (beta, R_Fe, tau, k0,
/// Phi, and the particle-profile constants) are modeler-supplied defaults,
/// not literature values; every run logs the fully resolved set.
///
/// Immutable by convention after validation; safe to share read-only
/// across parallel workers.
struct ParameterSet {
  double lambda = 0.05;  ///< DOP remineralization rate [1/day], in (0,1)
  double alpha = 2.0;    ///< maximum uptake [mmol m^-3 day^-1]
  double K_P = 0.5;      ///< phosphate half saturation [mmol m^-3]
  double K_F = 0.1;      ///< iron half saturation [iron units]
  double K_I = 30.0;     ///< light half saturation [W m^-2]
  double K_W = 0.02;     ///< attenuation coefficient of seawater [1/m]
  double b = 0.858;      ///< export power-law exponent [-]
  double nu = 0.67;      ///< fraction of uptake routed to DOP, in (0,1]

  double beta = 0.02;    ///< aeolian iron solubility [-]
  double R_Fe = 0.005;   ///< Fe:P conversion ratio [-]
  double tau = 1.0;      ///< scavenging tuning factor [-]
  double k0 = 0.5;       ///< initial scavenging rate [1/day]
  double Phi = 0.58;     ///< particle-concentration exponent [-]
  double K_lig = 59874.141715197818;  ///< ligand equilibrium constant (e^11)
  double L_T = 1.0;      ///< total ligand [iron units]
  double c_p_floor = 1e-4;  ///< lower threshold of the particle profile
  double C_p0 = 1.0;     ///< particle profile value in the euphotic zone
  double s_p = 0.858;    ///< particle profile decay exponent [-]
};

/// Canonical field table: one entry per ParameterSet member, in the order
/// used for serialization, config parsing and reports.
struct ParameterField {
  std::string_view name;
  double ParameterSet::*member;
};

std::span<const ParameterField> parameter_fields();

/// Returns nullptr when no field carries that name.
const ParameterField* find_parameter_field(std::string_view name);

struct ValidationReport {
  std::vector<std::string> violations;
  /// Parameter values that are legal but destroy identifiability
  /// (alpha = 0, nu = 1); flagged, never rejected.
  std::vector<std::string> degeneracies;
  bool ok() const { return violations.empty(); }
};

/// Total function: collects every violated invariant instead of failing
/// on the first one.
ValidationReport validate(const ParameterSet& p);

/// Canonical plain-text form, "name = value" per line, 17 significant
/// digits. parse_config(serialize(p)) == p exactly for every valid p.
std::string serialize(const ParameterSet& p);

/// Parses the flat key-value document (the [parameters] section body of a
/// scenario file). Missing keys take defaults. Throws ConfigError with key
/// name and line number on unknown keys, bad numbers, duplicates, and on
/// validation failure of the resolved set.
ParameterSet parse_config(std::string_view text);

/// Sets one field by name; returns false for unknown names.
bool set_parameter(ParameterSet& p, std::string_view key, double value);

enum class SubsetMode { Full7, Reduced5 };

/// Which parameters an identification run optimizes. Reduced5 fixes K_I
/// and K_W to the supplied values and optimizes exactly
/// {lambda, alpha, K_P, b, nu}; Full7 optimizes all seven.
struct IdentificationSubset {
  SubsetMode mode = SubsetMode::Reduced5;
  double fixed_K_I = 30.0;
  double fixed_K_W = 0.02;

  std::vector<std::string_view> optimized_names() const;
};

}  // namespace ndopfe
