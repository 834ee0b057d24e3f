#include "ndopfe/config.hpp"

#include <cctype>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "ndopfe/errors.hpp"
#include "ndopfe/version.hpp"

namespace ndopfe {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

double parse_number(const IniDocument::Entry& e) {
  double v = 0.0;
  const std::string_view s = e.value;
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || end != s.data() + s.size())
    throw ConfigError("line " + std::to_string(e.line) + ": cannot parse number '" + e.value +
                      "' for key '" + e.key + "'");
  return v;
}

int parse_int(const IniDocument::Entry& e) {
  const double v = parse_number(e);
  const int i = static_cast<int>(v);
  if (i != v)
    throw ConfigError("line " + std::to_string(e.line) + ": key '" + e.key +
                      "' expects an integer");
  return i;
}

bool parse_bool(const IniDocument::Entry& e) {
  if (e.value == "true" || e.value == "1") return true;
  if (e.value == "false" || e.value == "0") return false;
  throw ConfigError("line " + std::to_string(e.line) + ": key '" + e.key +
                    "' expects true or false");
}

/// Per-section cursor that marks entries consumed and rejects duplicates.
class SectionReader {
 public:
  SectionReader(const IniDocument& doc, std::string_view name) : entries_(doc.section(name)) {}

  const IniDocument::Entry* get(std::string_view key) {
    if (!entries_) return nullptr;
    const IniDocument::Entry* found = nullptr;
    for (const auto& e : *entries_) {
      if (e.key == key) {
        if (found)
          throw ConfigError("line " + std::to_string(e.line) + ": duplicate key '" + e.key + "'");
        found = &e;
      }
    }
    if (found) found->consumed = true;
    return found;
  }

  double number(std::string_view key, double fallback) {
    const auto* e = get(key);
    return e ? parse_number(*e) : fallback;
  }
  int integer(std::string_view key, int fallback) {
    const auto* e = get(key);
    return e ? parse_int(*e) : fallback;
  }
  bool boolean(std::string_view key, bool fallback) {
    const auto* e = get(key);
    return e ? parse_bool(*e) : fallback;
  }
  std::string text(std::string_view key, std::string fallback) {
    const auto* e = get(key);
    return e ? e->value : fallback;
  }

 private:
  const std::vector<IniDocument::Entry>* entries_;
};

constexpr std::string_view kKnownSections[] = {"grid", "parameters", "transport", "forcing",
                                               "solver"};

}  // namespace

IniDocument IniDocument::parse(std::string_view text) {
  IniDocument doc;
  std::string current;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t eol = text.find('\n', pos);
    std::string_view line =
        text.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
    pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
    ++line_no;

    if (const auto hash = line.find_first_of("#;"); hash != std::string_view::npos)
      line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("line " + std::to_string(line_no) + ": malformed section header");
      current = std::string(trim(line.substr(1, line.size() - 2)));
      if (current.empty())
        throw ConfigError("line " + std::to_string(line_no) + ": empty section name");
      if (doc.sections_.find(current) == doc.sections_.end()) {
        doc.sections_[current] = {};
        doc.order_.push_back(current);
      }
      continue;
    }

    const std::size_t eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
    if (current.empty())
      throw ConfigError("line " + std::to_string(line_no) + ": key outside any [section]");
    Entry e;
    e.key = std::string(trim(line.substr(0, eq)));
    e.value = std::string(trim(line.substr(eq + 1)));
    e.line = line_no;
    doc.sections_[current].push_back(std::move(e));
  }
  return doc;
}

const std::vector<IniDocument::Entry>* IniDocument::section(std::string_view name) const {
  const auto it = sections_.find(name);
  return it == sections_.end() ? nullptr : &it->second;
}

void IniDocument::check_all_consumed() const {
  std::string msg;
  for (const auto& name : order_) {
    bool known = false;
    for (const auto& k : kKnownSections) known = known || k == name;
    if (!known) {
      msg += "\n  - unknown section [" + name + "]";
      continue;
    }
    for (const auto& e : sections_.at(name)) {
      if (!e.consumed)
        msg += "\n  - line " + std::to_string(e.line) + ": unknown key '" + e.key + "' in [" +
               name + "]";
    }
  }
  if (!msg.empty()) throw ConfigError("scenario config:" + msg);
}

namespace {

std::string canonical_ini(const Scenario& sc) {
  std::ostringstream os;
  char buf[64];
  auto num = [&buf](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };

  os << "[grid]\n";
  if (!sc.grid_file.empty())
    os << "file = " << sc.grid_file << "\n";
  else
    os << "preset = " << sc.grid_preset << "\n";

  os << "\n[parameters]\n" << serialize(sc.params);

  os << "\n[transport]\n";
  os << "source = " << sc.transport_source << "\n";
  if (!sc.transport_file.empty()) os << "file = " << sc.transport_file << "\n";
  os << "gyre_strength = " << num(sc.transport_settings.gyre_strength) << "\n";
  os << "overturn_velocity = " << num(sc.transport_settings.overturn_velocity) << "\n";
  os << "kappa = " << num(sc.transport_settings.kappa) << "\n";
  os << "snapshots = " << sc.transport_settings.n_snapshots << "\n";
  os << "seasonal_amplitude = " << num(sc.transport_settings.seasonal_amplitude) << "\n";

  os << "\n[forcing]\n";
  os << "I0 = " << num(sc.forcing.I0) << "\n";
  os << "seasonal_amplitude = " << num(sc.forcing.seasonal_amplitude) << "\n";
  os << "source_spread = " << (sc.forcing.spread == SourceSpread::Euphotic ? "euphotic" : "surface")
     << "\n";
  os << "F_in_list =";
  for (std::size_t c = 0; c < sc.forcing.F_in.size(); ++c)
    os << (c ? "," : " ") << num(sc.forcing.F_in[c]);
  os << "\n";

  os << "\n[solver]\n";
  os << "dt = " << num(sc.solver.dt) << "\n";
  os << "period = " << num(sc.solver.period) << "\n";
  os << "transport_mode = "
     << (sc.solver.transport_mode == TransportMode::Explicit ? "explicit" : "implicit") << "\n";
  os << "iron_variant = "
     << (sc.solver.iron_variant == kernels::IronVariant::Adjusted ? "adjusted" : "original")
     << "\n";
  os << "clip_negative = " << (sc.solver.clip_negative ? "true" : "false") << "\n";
  os << "y3_init = " << num(sc.solver.y3_init) << "\n";
  os << "mass = " << num(sc.mass) << "\n";
  os << "tol = " << num(sc.tol) << "\n";
  os << "max_cycles = " << sc.max_cycles << "\n";
  os << "max_iters = " << sc.max_iters << "\n";
  os << "t_end = " << num(sc.t_end) << "\n";
  return os.str();
}

std::vector<double> parse_list(const IniDocument::Entry& e) {
  std::vector<double> out;
  std::string_view s = e.value;
  while (!s.empty()) {
    const std::size_t comma = s.find(',');
    const std::string_view item = trim(s.substr(0, comma));
    double v = 0.0;
    const auto [end, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (ec != std::errc{} || end != item.data() + item.size())
      throw ConfigError("line " + std::to_string(e.line) + ": bad list entry '" +
                        std::string(item) + "'");
    out.push_back(v);
    if (comma == std::string_view::npos) break;
    s = s.substr(comma + 1);
  }
  return out;
}

}  // namespace

Scenario load_scenario_text(std::string_view text, const std::string& base_dir) {
  const IniDocument doc = IniDocument::parse(text);
  Scenario sc;

  auto resolve_path = [&base_dir](const std::string& p) {
    std::filesystem::path fp(p);
    if (fp.is_absolute()) return p;
    return (std::filesystem::path(base_dir) / fp).string();
  };

  {
    SectionReader grid(doc, "grid");
    sc.grid_file = grid.text("file", "");
    sc.grid_preset = grid.text("preset", "desk8x4");
    if (!sc.grid_file.empty()) {
      std::ifstream is(resolve_path(sc.grid_file));
      if (!is) throw ConfigError("grid file not readable: " + sc.grid_file);
      sc.grid = Grid::load(is);
    } else if (sc.grid_preset == "desk8x4") {
      sc.grid = Grid::desk_default();
    } else if (sc.grid_preset == "twin4x2") {
      sc.grid = Grid::twin_default();
    } else {
      throw ConfigError("unknown grid preset '" + sc.grid_preset + "'");
    }
  }

  {
    SectionReader params(doc, "parameters");
    // Delegate through the canonical field table so [parameters] accepts
    // exactly the ParameterSet keys.
    for (const auto& f : parameter_fields()) {
      if (const auto* e = params.get(f.name)) sc.params.*(f.member) = parse_number(*e);
    }
    const ValidationReport rep = validate(sc.params);
    if (!rep.ok()) {
      std::string msg = "scenario [parameters] invalid:";
      for (const auto& v : rep.violations) msg += "\n  - " + v;
      throw ConfigError(msg);
    }
  }

  {
    SectionReader tr(doc, "transport");
    sc.transport_source = tr.text("source", "synthetic");
    sc.transport_file = tr.text("file", "");
    sc.transport_settings.gyre_strength = tr.number("gyre_strength", 0.5);
    sc.transport_settings.overturn_velocity = tr.number("overturn_velocity", 5.0);
    sc.transport_settings.kappa = tr.number("kappa", 0.15);
    sc.transport_settings.n_snapshots = tr.integer("snapshots", 12);
    sc.transport_settings.seasonal_amplitude = tr.number("seasonal_amplitude", 0.3);
    if (sc.transport_source == "synthetic") {
      sc.transport = build_synthetic(sc.grid, sc.transport_settings);
    } else if (sc.transport_source == "file") {
      if (sc.transport_file.empty()) throw ConfigError("[transport] source = file needs file = ...");
      std::ifstream is(resolve_path(sc.transport_file));
      if (!is) throw ConfigError("transport file not readable: " + sc.transport_file);
      sc.transport = TransportOperator::load(is, sc.grid);
    } else {
      throw ConfigError("unknown transport source '" + sc.transport_source + "'");
    }
  }

  {
    SectionReader fo(doc, "forcing");
    sc.forcing = Forcing::defaults_for(sc.grid);
    sc.forcing.I0 = fo.number("I0", sc.forcing.I0);
    sc.forcing.seasonal_amplitude = fo.number("seasonal_amplitude", sc.forcing.seasonal_amplitude);
    const std::string spread = fo.text("source_spread", "euphotic");
    if (spread == "euphotic")
      sc.forcing.spread = SourceSpread::Euphotic;
    else if (spread == "surface")
      sc.forcing.spread = SourceSpread::Surface;
    else
      throw ConfigError("[forcing] source_spread must be euphotic or surface");
    if (const auto* e = fo.get("F_in")) {
      const double v = parse_number(*e);
      sc.forcing.F_in.assign(sc.grid.n_columns(), v);
    }
    if (const auto* e = fo.get("F_in_list")) {
      const std::vector<double> vals = parse_list(*e);
      if (vals.size() != sc.grid.n_columns())
        throw ConfigError("[forcing] F_in_list needs exactly one value per column");
      sc.forcing.F_in = vals;
    }
    sc.forcing.period = sc.solver.period;
    sc.forcing.validate(sc.grid);
  }

  {
    SectionReader so(doc, "solver");
    sc.solver.dt = so.number("dt", 0.5);
    sc.solver.period = so.number("period", 360.0);
    const std::string mode = so.text("transport_mode", "explicit");
    if (mode == "explicit")
      sc.solver.transport_mode = TransportMode::Explicit;
    else if (mode == "implicit")
      sc.solver.transport_mode = TransportMode::Implicit;
    else
      throw ConfigError("[solver] transport_mode must be explicit or implicit");
    const std::string variant = so.text("iron_variant", "adjusted");
    if (variant == "adjusted")
      sc.solver.iron_variant = kernels::IronVariant::Adjusted;
    else if (variant == "original")
      sc.solver.iron_variant = kernels::IronVariant::Original;
    else
      throw ConfigError("[solver] iron_variant must be adjusted or original");
    sc.solver.clip_negative = so.boolean("clip_negative", false);
    sc.solver.y3_init = so.number("y3_init", 0.5);
    sc.mass = so.number("mass", 1.0);
    sc.tol = so.number("tol", 1e-6);
    sc.max_cycles = so.integer("max_cycles", 3000);
    sc.max_iters = so.integer("max_iters", 5000);
    sc.t_end = so.number("t_end", 360.0);
    sc.forcing.period = sc.solver.period;
    sc.transport_settings.period = sc.solver.period;
  }

  doc.check_all_consumed();
  sc.resolved = canonical_ini(sc);
  return sc;
}

Scenario load_scenario_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot read scenario file: " + path);
  std::ostringstream buf;
  buf << is.rdbuf();
  return load_scenario_text(buf.str(), std::filesystem::path(path).parent_path().string());
}

Scenario default_scenario() { return load_scenario_text("", "."); }

void write_run_dir(const std::string& dir, const Scenario& sc,
                   const std::vector<std::pair<std::string, std::string>>& files) {
  std::filesystem::create_directories(dir);
  auto write = [&dir](const std::string& name, const std::string& content) {
    std::ofstream os(std::filesystem::path(dir) / name, std::ios::binary);
    if (!os) throw ConfigError("cannot write " + name + " in " + dir);
    os << content;
  };
  write("resolved.ini", sc.resolved);
  write("version.txt", std::string(kVersion) + "\n");
  for (const auto& [name, content] : files) write(name, content);
}

}  // namespace ndopfe
