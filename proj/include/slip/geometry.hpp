#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "slip/control.hpp"
#include "slip/grid.hpp"
#include "slip/objective.hpp"
#include "slip/pde.hpp"

namespace slip {

// J[r][c] = d phi_r / d x_c
using Jacobian = std::array<std::array<double, 2>, 2>;

// Compactly supported velocity field phi of a local variation f_t = I + t phi.
struct VectorFieldSpec {
  std::string name;
  std::function<Point(Point)> value;
  std::function<Jacobian(Point)> jacobian;
  Point center;       // phi and its Jacobian vanish outside the closed disk (center, radius)
  double radius = 0;
  double lipschitz_bound = 0;  // >= sup ||grad phi|| (spectral norm)
  double sup_norm = 0;         // sup |phi|
};

// direction * (1 - |x - center|^2 / r^2)^3 inside the disk.
VectorFieldSpec bump_field(Point center, double radius, Point direction);

// (x - center) * beta(rho): beta = 1 for rho <= plateau, then (1 - u^2)^3 with
// u = (rho - plateau) / (outer - plateau), zero beyond outer.
VectorFieldSpec radial_field(Point center, double plateau, double outer);

// a * phi1 + b * phi2
VectorFieldSpec combine(double a, const VectorFieldSpec& phi1, double b, const VectorFieldSpec& phi2);

double divergence(const VectorFieldSpec& phi, Point x);

// Tangential divergence on an axis-aligned facet: d_y phi_y on vertical facets,
// d_x phi_x on horizontal ones.
double boundary_divergence(const VectorFieldSpec& phi, const Facet& facet, Point x);

// Throws UsageError unless the support disk keeps a positive distance to the boundary.
void check_support(const VectorFieldSpec& phi, const GridSpec& domain);

inline Point forward_map(const VectorFieldSpec& phi, double t, Point x) {
  const Point v = phi.value(x);
  return {x.x + t * v.x, x.y + t * v.y};
}

// g_t(y): fixed point of x = y - t phi(x). Requires |t| L <= 1/2; iterates until successive
// iterates differ by at most 1e-13 in the max norm.
Point inverse_map(const VectorFieldSpec& phi, double t, Point y);

// Level-set partition sampled on a resolution x resolution pixel grid over the domain.
struct RasterPartition {
  ControlField pixels;

  int resolution() const { return pixels.grid().nx(); }
  double pixel_area() const { return pixels.grid().cell_measure(); }
  double tv() const { return slip::tv(pixels); }
};

RasterPartition rasterize(const ControlField& v, int resolution);

// Pixel with center x takes the label of the cell of v containing g_t(x).
RasterPartition pushforward(const ControlField& v, const VectorFieldSpec& phi, double t, int resolution);

using ScalarFunction = std::function<double(Point)>;

ScalarFunction constant_function(double value);
// Bilinear interpolation of a nodal state (Dirichlet nodes read as zero).
ScalarFunction bilinear(const ScalarField& y);
// Bilinear interpolation of the densities c_P / lambda(P) between cell centers, constant
// extrapolation toward the boundary.
ScalarFunction bilinear_density(const GradientField& c);

// sum over interface facets of |nu_a - nu_b| div_b(phi)(mid) |E|
double tv_first_variation(const ControlField& v, const VectorFieldSpec& phi);
// sum over interface facets of (nu_a - nu_b) g(mid) (phi . e)(mid) |E|, e the facet normal
// pointing from cell_a to cell_b.
double flux_first_variation(const ControlField& v, const ScalarFunction& g, const VectorFieldSpec& phi);

struct TaylorRow {
  double t = 0;
  double value = 0;  // TV or integral of the pushed raster
  double slope = 0;  // (value - value at t = 0) / t
  double error = 0;  // |slope - coefficient| / scale
};

struct TaylorReport {
  double coefficient = 0;
  // Absolute quadrature mass of the coefficient; errors are relative to it.
  double scale = 0;
  double base_value = 0;
  std::vector<TaylorRow> rows;

  double final_error() const { return rows.back().error; }
  double decay() const;  // rows.front().error / rows.back().error (inf when the latter is 0)
};

// Slopes of TV(f_t^# v) against tv_first_variation.
TaylorReport taylor_tv_check(const ControlField& v, const VectorFieldSpec& phi, const std::vector<double>& t_list,
                             int resolution);

// Slopes of int g (f_t^# v - v) against flux_first_variation.
TaylorReport taylor_linear_check(const ControlField& v, const ScalarFunction& g, const VectorFieldSpec& phi,
                                 const std::vector<double>& t_list, int resolution);

struct LipschitzRow {
  double t = 0;
  double s = 0;
  double area = 0;   // lambda(f_t(E) sym-diff f_s(E)) on the raster
  double ratio = 0;  // area / (|t - s| P(E)), 0 when t == s
};

struct LipschitzReport {
  double perimeter = 0;  // P(E, Omega) of the raster at t = 0
  std::vector<LipschitzRow> rows;
  double max_ratio = 0;
};

LipschitzReport lipschitz_check(const ControlField& e, const VectorFieldSpec& phi,
                                const std::vector<std::pair<double, double>>& t_pairs, int resolution);

struct StationarityEntry {
  std::string field;
  double lhs = 0;  // sum_i nu_i int (-g)(phi . n_i)
  double rhs = 0;  // alpha sum_{i<j} |nu_i - nu_j| int div_b phi
  double residual = 0;
  double normalization = 0;  // max(1, sup |phi|)
};

struct StationarityReport {
  std::vector<StationarityEntry> entries;
  double max_normalized_residual = 0;
};

StationarityReport stationarity_residual(const ControlField& v, const ScalarFunction& g, double alpha,
                                         const std::vector<VectorFieldSpec>& dictionary);

// Disks of radius `spacing` centered on the lattice spacing * Z^2 (support strictly inside
// the domain) that contain an interface facet midpoint of v; x- and y-directed bumps each.
std::vector<VectorFieldSpec> interface_dictionary(const ControlField& v, double spacing = 0.125);

// Closed-form verification fixtures for the local-variation checks.
struct VariationFixture {
  std::string name;
  ControlField tv_v;
  VectorFieldSpec tv_field;
  std::vector<double> tv_times;
  ControlField flux_v;  // also the set E of the symmetric-difference check
  VectorFieldSpec flux_field;
  std::vector<double> flux_times;
  ScalarFunction g;
  // Closed-form lambda(f_t(E) sym-diff f_s(E)) for the flux field.
  std::function<double(double, double)> symmetric_difference;
  std::vector<std::pair<double, double>> lipschitz_pairs;
};

VariationFixture disk_fixture();
VariationFixture stripes_fixture();

struct VerificationRow {
  std::string check;
  double value = 0;
  double threshold = 0;
  bool passed = false;
};

// Runs the TV slope, flux slope and symmetric-difference checks of a fixture. Thresholds:
// slope error at the smallest t <= 0.05, first/last error ratio >= 1.5, symmetric-difference
// error against the closed form <= 0.03; the largest symmetric-difference ratio is reported.
// Errors below 1e-12 count as converged for the decay check.
std::vector<VerificationRow> verify_fixture(const VariationFixture& fixture, int resolution);

}  // namespace slip
