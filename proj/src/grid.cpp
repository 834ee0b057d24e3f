#include "ndopfe/grid.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include "ndopfe/errors.hpp"
#include "ndopfe/numerics.hpp"

namespace ndopfe {

Grid Grid::build(int ni, int nj, std::span<const double> column_depths,
                 std::span<const double> column_areas, std::span<const double> ladder,
                 double h_bar_e) {
  if (ni <= 0 || nj <= 0) throw ConfigError("grid: ni and nj must be positive");
  const std::size_t n_cols = static_cast<std::size_t>(ni) * nj;
  if (column_depths.size() != n_cols || column_areas.size() != n_cols)
    throw ConfigError("grid: need one depth and one area per column");
  if (!(h_bar_e > 0.0)) throw ConfigError("grid: h_bar_e must be positive");

  for (std::size_t k = 0; k < ladder.size(); ++k) {
    if (!(ladder[k] > 0.0) || (k > 0 && !(ladder[k] > ladder[k - 1])))
      throw ConfigError("grid: ladder must be strictly increasing and positive");
  }
  const bool ladder_has_he =
      std::any_of(ladder.begin(), ladder.end(), [&](double z) { return z == h_bar_e; });

  Grid g;
  g.ni = ni;
  g.nj = nj;
  g.h_bar_e = h_bar_e;
  g.ladder.assign(ladder.begin(), ladder.end());
  g.columns.resize(n_cols);

  CompensatedSum vol_sum;
  int offset = 0;
  for (int j = 0; j < nj; ++j) {
    for (int i = 0; i < ni; ++i) {
      const int c = j * ni + i;
      Column& col = g.columns[c];
      col.i = i;
      col.j = j;
      col.area = column_areas[c];
      col.depth = column_depths[c];
      col.cell_offset = offset;
      if (!(col.depth > 0.0)) throw ConfigError("grid: column depth must be positive");
      if (!(col.area > 0.0)) throw ConfigError("grid: column area must be positive");
      if (col.depth > h_bar_e && !ladder_has_he)
        throw ConfigError("grid: ladder must contain h_bar_e when columns deeper than it exist");

      std::vector<double> ifaces{0.0};
      for (double z : ladder) {
        if (z < col.depth) ifaces.push_back(z);
      }
      ifaces.push_back(col.depth);

      const double h_e = std::min(h_bar_e, col.depth);
      col.n_layers = static_cast<int>(ifaces.size()) - 1;
      col.n_euphotic = 0;
      for (int k = 0; k < col.n_layers; ++k) {
        const double top = ifaces[k];
        const double bot = ifaces[k + 1];
        const double mid = 0.5 * (top + bot);
        const double th = bot - top;
        g.cell_column.push_back(c);
        g.cell_layer.push_back(k);
        g.cell_top.push_back(top);
        g.cell_bottom.push_back(bot);
        g.cell_mid.push_back(mid);
        g.cell_thickness.push_back(th);
        g.cell_volume.push_back(th * col.area);
        const bool euphotic = mid < h_e;
        g.cell_euphotic.push_back(euphotic ? 1 : 0);
        if (euphotic) ++col.n_euphotic;
        vol_sum.add(th * col.area);
      }
      // The euphotic zone must end on an interface: all euphotic layers
      // come first and their union is exactly [0, h_e].
      const double eu_end = ifaces[col.n_euphotic];
      if (std::abs(eu_end - h_e) > 1e-9 * h_e)
        throw ConfigError("grid: euphotic zone does not end on a layer interface");
      offset += col.n_layers;
    }
  }
  g.total_volume_ = vol_sum.value();
  return g;
}

Grid Grid::desk_default() {
  const int ni = 8, nj = 4;
  // Depths rise monotonically and the deepest columns come in an adjacent
  // pair, so the overturning streamfunction ventilates every bottom cell
  // (an isolated deep pocket would equilibrate only by vertical diffusion,
  // on a millennial timescale).
  const double depth_by_i[8] = {80.0, 120.0, 400.0, 1000.0, 2000.0, 3000.0, 4000.0, 4000.0};
  std::vector<double> depths(ni * nj), areas(ni * nj, 1.0);
  for (int j = 0; j < nj; ++j)
    for (int i = 0; i < ni; ++i) depths[j * ni + i] = depth_by_i[i];
  const std::vector<double> ladder{30,  60,  90,  120,  170,  240,  340, 480,
                                   680, 960, 1340, 1840, 2460, 3200, 4000};
  return build(ni, nj, depths, areas, ladder);
}

Grid Grid::twin_default() {
  const int ni = 4, nj = 2;
  // Same no-dead-pocket rule as the desk grid: per row, every column has a
  // neighbor at least as deep.
  std::vector<double> depths{100.0, 400.0, 1500.0, 1500.0, 80.0, 600.0, 2400.0, 2400.0};
  std::vector<double> areas(ni * nj, 1.0);
  const std::vector<double> ladder{40, 80, 120, 250, 450, 800, 1500, 2400, 3200, 4000};
  return build(ni, nj, depths, areas, ladder);
}

double Grid::euphotic_depth(int col) const { return std::min(h_bar_e, columns[col].depth); }

void Grid::save(std::ostream& os) const {
  os << "# ndopfe grid v1\n";
  os << "dims " << ni << " " << nj << "\n";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", h_bar_e);
  os << "h_bar_e " << buf << "\n";
  os << "ladder";
  for (double z : ladder) {
    std::snprintf(buf, sizeof buf, " %.17g", z);
    os << buf;
  }
  os << "\n";
  os << "# column  i  j  area  depth  layers\n";
  for (std::size_t c = 0; c < columns.size(); ++c) {
    const Column& col = columns[c];
    char line[192];
    std::snprintf(line, sizeof line, "%zu %d %d %.17g %.17g %d\n", c, col.i, col.j, col.area,
                  col.depth, col.n_layers);
    os << line;
  }
}

Grid Grid::load(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line.rfind("# ndopfe grid v1", 0) != 0)
    throw ConfigError("grid file: missing '# ndopfe grid v1' header");

  int ni = 0, nj = 0;
  double h_bar_e = 0.0;
  std::vector<double> ladder;
  std::vector<double> depths, areas;
  std::vector<int> want_layers;

  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    if (tag == "dims") {
      ls >> ni >> nj;
    } else if (tag == "h_bar_e") {
      ls >> h_bar_e;
    } else if (tag == "ladder") {
      double z;
      while (ls >> z) ladder.push_back(z);
    } else {
      std::size_t id;
      int i, j, layers;
      double area, depth;
      std::istringstream cs(line);
      if (!(cs >> id >> i >> j >> area >> depth >> layers))
        throw ConfigError("grid file: cannot parse column row '" + line + "'");
      if (id != depths.size()) throw ConfigError("grid file: column ids must be consecutive");
      depths.push_back(depth);
      areas.push_back(area);
      want_layers.push_back(layers);
    }
  }
  Grid g = Grid::build(ni, nj, depths, areas, ladder, h_bar_e);
  for (std::size_t c = 0; c < g.columns.size(); ++c) {
    if (g.columns[c].n_layers != want_layers[c])
      throw ConfigError("grid file: column " + std::to_string(c) +
                        " layer count does not match the ladder");
  }
  return g;
}

TracerState TracerState::zeros(const Grid& g) {
  TracerState s;
  s.y1.assign(g.n_cells(), 0.0);
  s.y2.assign(g.n_cells(), 0.0);
  s.y3.assign(g.n_cells(), 0.0);
  return s;
}

namespace {
void check_shape(const TracerState& s, const Grid& g) {
  if (s.y1.size() != g.n_cells() || s.y2.size() != g.n_cells() || s.y3.size() != g.n_cells())
    throw ConfigError("tracer state does not match the grid shape");
}
}  // namespace

double total_mass(const TracerState& s, const Grid& g) {
  check_shape(s, g);
  CompensatedSum sum;
  for (std::size_t c = 0; c < g.n_cells(); ++c) sum.add((s.y1[c] + s.y2[c]) * g.cell_volume[c]);
  return sum.value();
}

double iron_content(const TracerState& s, const Grid& g) {
  check_shape(s, g);
  CompensatedSum sum;
  for (std::size_t c = 0; c < g.n_cells(); ++c) sum.add(s.y3[c] * g.cell_volume[c]);
  return sum.value();
}

TracerState uniform_state_with_mass(double C, const Grid& g, double y3_uniform) {
  if (!(C >= 0.0)) throw ConfigError("uniform_state_with_mass: mass must be nonnegative");
  TracerState s = TracerState::zeros(g);
  const double y1 = C / g.total_volume();
  std::fill(s.y1.begin(), s.y1.end(), y1);
  std::fill(s.y3.begin(), s.y3.end(), y3_uniform);
  return s;
}

double state_distance(const TracerState& a, const TracerState& b, const Grid& g) {
  check_shape(a, g);
  check_shape(b, g);
  CompensatedSum sum;
  for (std::size_t c = 0; c < g.n_cells(); ++c) {
    const double d1 = a.y1[c] - b.y1[c];
    const double d2 = a.y2[c] - b.y2[c];
    const double d3 = a.y3[c] - b.y3[c];
    sum.add((d1 * d1 + d2 * d2 + d3 * d3) * g.cell_volume[c]);
  }
  return std::sqrt(sum.value());
}

double weighted_l2(std::span<const double> field, const Grid& g) {
  if (field.size() != g.n_cells()) throw ConfigError("field does not match the grid shape");
  CompensatedSum sum;
  for (std::size_t c = 0; c < g.n_cells(); ++c) sum.add(field[c] * field[c] * g.cell_volume[c]);
  return std::sqrt(sum.value());
}

void save_state_csv(std::ostream& os, const TracerState& s, const Grid& g) {
  check_shape(s, g);
  os << "cell,y1,y2,y3\n";
  char buf[160];
  for (std::size_t c = 0; c < g.n_cells(); ++c) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g\n", c, s.y1[c], s.y2[c], s.y3[c]);
    os << buf;
  }
}

}  // namespace ndopfe
