#pragma once

#include <array>
#include <functional>
#include <iosfwd>
#include <memory>
#include <span>
#include <vector>

#include <Eigen/SparseCore>

#include "slip/control.hpp"
#include "slip/grid.hpp"

namespace slip {

// Stationary advection-diffusion  -eps * Lap(y) + b . grad(y) = w  on (0, lx) x (0, ly),
// y = 0 on {y = 0} u {y = ly} u {x = 0}, eps * dy/dn = 0 on {x = lx}.
//
// state_grid is the node lattice: nodes sit at (i * hx, j * hy), 0 <= i <= nx, 0 <= j <= ny.
// The unknowns are the non-Dirichlet nodes 1 <= i <= nx, 1 <= j <= ny - 1.
struct PdeSetup {
  double eps = 1.5e-2;
  std::array<double, 2> b{0.0, 0.0};
  GridSpec state_grid{64, 64};
  // Construction fails unless mesh_peclet() < peclet_limit.
  double peclet_limit = 1.0;
};

/// ||b|| * h / (2 eps), h = max(hx, hy).
double mesh_peclet(const PdeSetup& setup);

class ScalarField {
 public:
  ScalarField(GridSpec state_grid, std::vector<double> values);
  static ScalarField zeros(GridSpec state_grid);

  const GridSpec& state_grid() const { return grid_; }
  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }
  std::size_t size() const { return values_.size(); }

 private:
  GridSpec grid_;
  std::vector<double> values_;
};

int num_unknowns(const GridSpec& state_grid);
int node_index(const GridSpec& state_grid, int i, int j);
Point node_position(const GridSpec& state_grid, int k);

class LinearSystem {
 public:
  explicit LinearSystem(const PdeSetup& setup);

  const PdeSetup& setup() const { return setup_; }
  const GridSpec& state_grid() const { return setup_.state_grid; }
  int size() const { return static_cast<int>(matrix_.rows()); }
  const Eigen::SparseMatrix<double>& matrix() const { return matrix_; }

  // Row scaling of each equation: 1 at interior nodes, 1/2 on the natural boundary.
  // Source terms enter the right-hand side as weight * w(node).
  std::span<const double> row_weights() const { return weights_; }

  std::vector<double> apply(std::span<const double> x) const;
  std::vector<double> apply_transpose(std::span<const double> x) const;

  // Direct solves with one step of iterative refinement; throws NumericalError when
  // ||A x - rhs||_inf > 1e-10 ||rhs||_inf.
  std::vector<double> solve(std::span<const double> rhs) const;
  std::vector<double> solve_transpose(std::span<const double> rhs) const;

 private:
  struct Factorization;

  PdeSetup setup_;
  Eigen::SparseMatrix<double> matrix_;
  std::vector<double> weights_;
  std::shared_ptr<const Factorization> lu_;
};

LinearSystem assemble(const PdeSetup& setup);

// Control cell receiving each unknown node (piecewise-constant injection; nodes on a
// cell interface go to the lower-index cell). Grids must cover the same domain.
std::vector<int> node_to_cell(const GridSpec& control_grid, const GridSpec& state_grid);

// Right-hand side weight(k) * w(cell(k)) for cellwise source values.
std::vector<double> source_rhs(const LinearSystem& system, const GridSpec& control_grid,
                               std::span<const double> cell_values);

ScalarField solve_state(const LinearSystem& system, const ControlField& source);
ScalarField solve_state(const LinearSystem& system, const GridSpec& control_grid,
                        std::span<const double> cell_values);

/// Solves A^T p = residual.
ScalarField solve_adjoint(const LinearSystem& system, const ScalarField& residual);

// Right-hand side weight(k) * f(node_k) for a pointwise source.
std::vector<double> pointwise_rhs(const LinearSystem& system, const std::function<double(Point)>& f);

// Full nodal lattice including Dirichlet nodes (zero there): first line "nx,ny,lx,ly",
// then ny + 1 lines of nx + 1 values starting at y = 0.
void write_csv(std::ostream& out, const ScalarField& y);
// Reads the same layout; values on Dirichlet nodes are ignored.
ScalarField read_scalar_csv(std::istream& in);

}  // namespace slip
