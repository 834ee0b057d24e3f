#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace ndopfe {

/// One water column: a stack of layers under a surface cell.
struct Column {
  int i = 0;  ///< lon index
  int j = 0;  ///< lat index
  double area = 1.0;   ///< surface area [m^2]
  double depth = 0.0;  ///< bottom depth h [m]
  int cell_offset = 0;
  int n_layers = 0;
  int n_euphotic = 0;  ///< leading layers with midpoint above min(h_bar_e, h)
};

/// Columns-by-layers domain. Layer interfaces come from a shared depth
/// ladder clipped to each column's bottom; the euphotic boundary h_bar_e
/// is part of the ladder, so the euphotic zone always ends on an
/// interface. Immutable after construction.
class Grid {
 public:
  /// `ladder` lists strictly increasing positive interface depths (the
  /// surface 0 is implicit); it must contain h_bar_e and reach the deepest
  /// column.
  static Grid build(int ni, int nj, std::span<const double> column_depths,
                    std::span<const double> column_areas, std::span<const double> ladder,
                    double h_bar_e = 120.0);

  /// 8 x 4 columns, up to 15 layers, depths 80-4000 m, unit areas. Both
  /// shelf columns (h <= 120 m) and deep columns are present.
  static Grid desk_default();

  /// Smaller 4 x 2 x up-to-10-layer grid used by the twin experiments.
  static Grid twin_default();

  int ni = 0, nj = 0;
  double h_bar_e = 120.0;
  std::vector<Column> columns;
  std::vector<double> ladder;  ///< shared interface depths, excluding 0

  // Flat per-cell arrays, column-major (all layers of column 0 first).
  std::vector<int> cell_column;
  std::vector<int> cell_layer;
  std::vector<double> cell_top;
  std::vector<double> cell_bottom;
  std::vector<double> cell_mid;
  std::vector<double> cell_thickness;
  std::vector<double> cell_volume;
  std::vector<char> cell_euphotic;

  std::size_t n_cells() const { return cell_volume.size(); }
  std::size_t n_columns() const { return columns.size(); }
  int cell_index(int col, int layer) const { return columns[col].cell_offset + layer; }
  int column_id(int i, int j) const { return j * ni + i; }
  double euphotic_depth(int col) const;
  /// Gamma_2 columns are exactly those with h > h_bar_e.
  bool is_gamma2(int col) const { return columns[col].depth > h_bar_e; }
  double total_volume() const { return total_volume_; }

  void save(std::ostream& os) const;
  static Grid load(std::istream& is);

 private:
  double total_volume_ = 0.0;
};

/// Three tracer fields on a grid at one instant.
struct TracerState {
  std::vector<double> y1;  ///< phosphate
  std::vector<double> y2;  ///< dissolved organic phosphorus
  std::vector<double> y3;  ///< iron
  double time = 0.0;       ///< days

  static TracerState zeros(const Grid& g);
};

/// Discrete mass(y1, y2): volume-weighted sum of the first two tracers.
/// Iron is excluded. Throws ConfigError on shape mismatch.
double total_mass(const TracerState& s, const Grid& g);

/// Volume-weighted iron content, reported alongside mass(y1,y2).
double iron_content(const TracerState& s, const Grid& g);

/// Uniform state carrying phosphorus mass C: y1 = C/|Omega|, y2 = 0,
/// y3 = y3_uniform. Throws ConfigError for C < 0.
TracerState uniform_state_with_mass(double C, const Grid& g, double y3_uniform = 0.5);

/// Volume-weighted L2 norm over all three tracers of (a - b).
double state_distance(const TracerState& a, const TracerState& b, const Grid& g);

/// Volume-weighted L2 norm of a single field.
double weighted_l2(std::span<const double> field, const Grid& g);

void save_state_csv(std::ostream& os, const TracerState& s, const Grid& g);

}  // namespace ndopfe
