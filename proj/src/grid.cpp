#include "slip/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "slip/error.hpp"

namespace slip {

GridSpec::GridSpec(int nx, int ny, double lx, double ly) : nx_(nx), ny_(ny), lx_(lx), ly_(ly) {
  if (nx < 1 || ny < 1) {
    throw UsageError("grid needs nx >= 1 and ny >= 1, got " + std::to_string(nx) + "x" +
                     std::to_string(ny));
  }
  if (!(lx > 0.0) || !(ly > 0.0) || !std::isfinite(lx) || !std::isfinite(ly)) {
    throw UsageError("grid lengths must be positive and finite");
  }
}

std::size_t facet_count(const GridSpec& grid) {
  const auto nx = static_cast<std::size_t>(grid.nx());
  const auto ny = static_cast<std::size_t>(grid.ny());
  return nx * (ny - 1) + ny * (nx - 1);
}

std::vector<Facet> interior_facets(const GridSpec& grid) {
  std::vector<Facet> facets;
  facets.reserve(facet_count(grid));
  for (int j = 0; j < grid.ny(); ++j) {
    for (int i = 0; i + 1 < grid.nx(); ++i) {
      facets.push_back({grid.index(i, j), grid.index(i + 1, j), Orientation::vertical, grid.hy()});
    }
  }
  for (int j = 0; j + 1 < grid.ny(); ++j) {
    for (int i = 0; i < grid.nx(); ++i) {
      facets.push_back({grid.index(i, j), grid.index(i, j + 1), Orientation::horizontal, grid.hx()});
    }
  }
  return facets;
}

Point facet_midpoint(const GridSpec& grid, const Facet& facet) {
  const int i = grid.column(facet.cell_a);
  const int j = grid.row(facet.cell_a);
  if (facet.orientation == Orientation::vertical) {
    return {(i + 1) * grid.hx(), (j + 0.5) * grid.hy()};
  }
  return {(i + 0.5) * grid.hx(), (j + 1) * grid.hy()};
}

Point cell_center(const GridSpec& grid, int i, int j) {
  if (i < 0 || i >= grid.nx() || j < 0 || j >= grid.ny()) {
    throw UsageError("cell (" + std::to_string(i) + ", " + std::to_string(j) + ") out of range");
  }
  return {(i + 0.5) * grid.hx(), (j + 0.5) * grid.hy()};
}

Point cell_center(const GridSpec& grid, int cell) {
  if (cell < 0 || cell >= grid.num_cells()) {
    throw UsageError("cell index " + std::to_string(cell) + " out of range");
  }
  return cell_center(grid, grid.column(cell), grid.row(cell));
}

namespace {

int locate_1d(double coord, double h, int n) {
  const int k = static_cast<int>(std::ceil(coord / h)) - 1;
  return std::clamp(k, 0, n - 1);
}

}  // namespace

int locate_column(const GridSpec& grid, double x) { return locate_1d(x, grid.hx(), grid.nx()); }

int locate_row(const GridSpec& grid, double y) { return locate_1d(y, grid.hy(), grid.ny()); }

int locate_cell(const GridSpec& grid, Point p) {
  return grid.index(locate_column(grid, p.x), locate_row(grid, p.y));
}

}  // namespace slip
