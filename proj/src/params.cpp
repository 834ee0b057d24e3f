#include "ndopfe/params.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <set>

#include "ndopfe/errors.hpp"

namespace ndopfe {

namespace {

constexpr std::array<ParameterField, 18> kFields{{
    {"lambda", &ParameterSet::lambda},
    {"alpha", &ParameterSet::alpha},
    {"K_P", &ParameterSet::K_P},
    {"K_F", &ParameterSet::K_F},
    {"K_I", &ParameterSet::K_I},
    {"K_W", &ParameterSet::K_W},
    {"b", &ParameterSet::b},
    {"nu", &ParameterSet::nu},
    {"beta", &ParameterSet::beta},
    {"R_Fe", &ParameterSet::R_Fe},
    {"tau", &ParameterSet::tau},
    {"k0", &ParameterSet::k0},
    {"Phi", &ParameterSet::Phi},
    {"K_lig", &ParameterSet::K_lig},
    {"L_T", &ParameterSet::L_T},
    {"c_p_floor", &ParameterSet::c_p_floor},
    {"C_p0", &ParameterSet::C_p0},
    {"s_p", &ParameterSet::s_p},
}};

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

}  // namespace

std::span<const ParameterField> parameter_fields() { return kFields; }

const ParameterField* find_parameter_field(std::string_view name) {
  for (const auto& f : kFields)
    if (f.name == name) return &f;
  return nullptr;
}

bool set_parameter(ParameterSet& p, std::string_view key, double value) {
  const ParameterField* f = find_parameter_field(key);
  if (!f) return false;
  p.*(f->member) = value;
  return true;
}

ValidationReport validate(const ParameterSet& p) {
  ValidationReport rep;
  auto bad = [&rep](const std::string& msg) { rep.violations.push_back(msg); };

  for (const auto& f : kFields) {
    if (!std::isfinite(p.*(f.member)))
      bad(std::string(f.name) + " is not finite");
  }

  if (!(p.lambda > 0.0 && p.lambda < 1.0)) bad("lambda must lie in (0,1)");
  if (!(p.alpha > 0.0)) bad("alpha must be positive");
  if (!(p.K_P > 0.0)) bad("K_P must be positive");
  if (!(p.K_F > 0.0)) bad("K_F must be positive");
  if (!(p.K_I > 0.0)) bad("K_I must be positive");
  if (!(p.K_W > 0.0)) bad("K_W must be positive");
  if (!(p.b >= 0.0)) bad("b must be nonnegative");
  if (!(p.nu > 0.0 && p.nu <= 1.0)) bad("nu must lie in (0,1]");
  if (!(p.K_lig > 0.0)) bad("K_lig must be positive");
  if (!(p.L_T > 0.0)) bad("L_T must be positive");
  if (!(p.c_p_floor > 0.0)) bad("c_p_floor must be positive");
  if (p.K_lig > 0.0 && p.L_T > 0.0 && !(p.L_T - 1.0 / p.K_lig >= 0.0))
    bad("L_T - 1/K_lig must be nonnegative");
  if (!(p.beta >= 0.0)) bad("beta must be nonnegative");
  if (!(p.R_Fe >= 0.0)) bad("R_Fe must be nonnegative");
  if (!(p.tau >= 0.0)) bad("tau must be nonnegative");
  if (!(p.k0 >= 0.0)) bad("k0 must be nonnegative");
  if (!(p.Phi >= 0.0)) bad("Phi must be nonnegative");
  if (!(p.C_p0 > 0.0)) bad("C_p0 must be positive");
  if (!(p.s_p >= 0.0)) bad("s_p must be nonnegative");

  if (p.alpha == 0.0)
    rep.degeneracies.push_back("alpha = 0: uptake vanishes, K_P/K_I/K_W become arbitrary");
  if (p.nu == 1.0)
    rep.degeneracies.push_back("nu = 1: export into the aphotic zone is zero, b becomes arbitrary");

  return rep;
}

std::string serialize(const ParameterSet& p) {
  std::string out;
  char buf[64];
  for (const auto& f : kFields) {
    std::snprintf(buf, sizeof buf, "%.17g", p.*(f.member));
    out += f.name;
    out += " = ";
    out += buf;
    out += '\n';
  }
  return out;
}

ParameterSet parse_config(std::string_view text) {
  ParameterSet p;
  std::set<std::string, std::less<>> seen;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t eol = text.find('\n', pos);
    std::string_view line = text.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
    pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
    ++line_no;

    if (const auto hash = line.find_first_of("#;"); hash != std::string_view::npos)
      line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    const std::size_t eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError("parameters line " + std::to_string(line_no) + ": expected 'key = value'");
    const std::string_view key = trim(line.substr(0, eq));
    const std::string_view val = trim(line.substr(eq + 1));

    const ParameterField* f = find_parameter_field(key);
    if (!f)
      throw ConfigError("parameters line " + std::to_string(line_no) + ": unknown key '" +
                        std::string(key) + "'");
    if (!seen.insert(std::string(key)).second)
      throw ConfigError("parameters line " + std::to_string(line_no) + ": duplicate key '" +
                        std::string(key) + "'");

    double value = 0.0;
    const auto [end, ec] = std::from_chars(val.data(), val.data() + val.size(), value);
    if (ec != std::errc{} || end != val.data() + val.size())
      throw ConfigError("parameters line " + std::to_string(line_no) + ": cannot parse number '" +
                        std::string(val) + "' for key '" + std::string(key) + "'");
    p.*(f->member) = value;
  }

  const ValidationReport rep = validate(p);
  if (!rep.ok()) {
    std::string msg = "invalid parameter set:";
    for (const auto& v : rep.violations) msg += "\n  - " + v;
    throw ConfigError(msg);
  }
  return p;
}

std::vector<std::string_view> IdentificationSubset::optimized_names() const {
  if (mode == SubsetMode::Reduced5)
    return {"lambda", "alpha", "K_P", "b", "nu"};
  return {"lambda", "alpha", "K_P", "K_I", "K_W", "b", "nu"};
}

}  // namespace ndopfe
