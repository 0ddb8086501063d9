#pragma once

#include <cstddef>
#include <vector>

namespace slip {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

// Uniform rectangular partition of (0, lx) x (0, ly) into nx * ny cells.
// Cells are indexed row-major: index = j * nx + i for column i, row j.
class GridSpec {
 public:
  GridSpec(int nx, int ny, double lx = 1.0, double ly = 1.0);

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  double lx() const { return lx_; }
  double ly() const { return ly_; }
  double hx() const { return lx_ / nx_; }
  double hy() const { return ly_ / ny_; }
  double cell_measure() const { return hx() * hy(); }
  double domain_measure() const { return lx_ * ly_; }
  int num_cells() const { return nx_ * ny_; }

  int index(int i, int j) const { return j * nx_ + i; }
  int column(int cell) const { return cell % nx_; }
  int row(int cell) const { return cell / nx_; }

  friend bool operator==(const GridSpec&, const GridSpec&) = default;

 private:
  int nx_;
  int ny_;
  double lx_;
  double ly_;
};

enum class Orientation { vertical, horizontal };

// Interface between two edge-adjacent cells; cell_a < cell_b.
// Vertical facets separate (i, j) | (i + 1, j); horizontal ones (i, j) / (i, j + 1).
struct Facet {
  int cell_a;
  int cell_b;
  Orientation orientation;
  double measure;
};

/// Vertical facets row-major, then horizontal facets row-major.
std::vector<Facet> interior_facets(const GridSpec& grid);

std::size_t facet_count(const GridSpec& grid);

/// Midpoint of a facet in physical coordinates.
Point facet_midpoint(const GridSpec& grid, const Facet& facet);

Point cell_center(const GridSpec& grid, int cell);
Point cell_center(const GridSpec& grid, int i, int j);

// Cell column containing coordinate x; a point on an interface belongs to the
// lower-index cell. Out-of-domain coordinates clamp to the boundary cells.
int locate_column(const GridSpec& grid, double x);
int locate_row(const GridSpec& grid, double y);
int locate_cell(const GridSpec& grid, Point p);

}  // namespace slip
