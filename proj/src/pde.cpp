#include "slip/pde.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include <Eigen/SparseLU>

#include "slip/error.hpp"
#include "slip/format.hpp"

namespace slip {

using SparseMatrix = Eigen::SparseMatrix<double>;
using Vector = Eigen::VectorXd;

double mesh_peclet(const PdeSetup& setup) {
  const double speed = std::hypot(setup.b[0], setup.b[1]);
  const double h = std::max(setup.state_grid.hx(), setup.state_grid.hy());
  return speed * h / (2.0 * setup.eps);
}

ScalarField::ScalarField(GridSpec state_grid, std::vector<double> values)
    : grid_(state_grid), values_(std::move(values)) {
  if (values_.size() != static_cast<std::size_t>(num_unknowns(grid_))) {
    throw UsageError("scalar field size does not match the state grid");
  }
  for (double v : values_) {
    if (!std::isfinite(v)) throw NumericalError("scalar field contains non-finite values");
  }
}

ScalarField ScalarField::zeros(GridSpec state_grid) {
  return ScalarField(state_grid, std::vector<double>(static_cast<std::size_t>(num_unknowns(state_grid)), 0.0));
}

int num_unknowns(const GridSpec& g) { return g.nx() * (g.ny() - 1); }

int node_index(const GridSpec& g, int i, int j) { return (j - 1) * g.nx() + (i - 1); }

Point node_position(const GridSpec& g, int k) {
  const int i = k % g.nx() + 1;
  const int j = k / g.nx() + 1;
  return {i * g.hx(), j * g.hy()};
}

struct LinearSystem::Factorization {
  Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> forward;
  Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> transposed;
};

namespace {

void check_setup(const PdeSetup& s) {
  if (!(s.eps > 0.0) || !std::isfinite(s.eps)) throw ConfigError("pde: eps must be positive");
  if (!std::isfinite(s.b[0]) || !std::isfinite(s.b[1])) throw ConfigError("pde: velocity must be finite");
  if (s.state_grid.ny() < 2) throw ConfigError("pde: state grid needs ny >= 2");
  const double pe = mesh_peclet(s);
  if (!(pe < s.peclet_limit)) {
    std::ostringstream msg;
    msg << "pde: mesh Peclet number " << pe << " violates the limit " << s.peclet_limit
        << " (refine the state grid or raise eps)";
    throw ConfigError(msg.str());
  }
}

Vector to_eigen(std::span<const double> x) {
  return Eigen::Map<const Vector>(x.data(), static_cast<Eigen::Index>(x.size()));
}

std::vector<double> from_eigen(const Vector& x) { return {x.data(), x.data() + x.size()}; }

template <class Solver>
std::vector<double> refined_solve(const Solver& solver, const SparseMatrix& a, std::span<const double> rhs) {
  if (rhs.size() != static_cast<std::size_t>(a.rows())) throw UsageError("rhs size mismatch");
  const Vector b = to_eigen(rhs);
  Vector x = solver.solve(b);
  Vector r = b - a * x;
  x += solver.solve(r);
  r = b - a * x;
  const double scale = b.lpNorm<Eigen::Infinity>();
  const double res = r.lpNorm<Eigen::Infinity>();
  if (!x.allFinite() || res > 1e-10 * scale) {
    std::ostringstream msg;
    msg << "pde: linear solve residual " << res << " exceeds tolerance (rhs norm " << scale << ")";
    throw NumericalError(msg.str());
  }
  return from_eigen(x);
}

}  // namespace

LinearSystem::LinearSystem(const PdeSetup& setup) : setup_(setup) {
  check_setup(setup_);
  const GridSpec& g = setup_.state_grid;
  const int nx = g.nx();
  const int ny = g.ny();
  const int n = num_unknowns(g);
  const double cx = setup_.eps / (g.hx() * g.hx());
  const double cy = setup_.eps / (g.hy() * g.hy());
  const double ax = setup_.b[0] / (2.0 * g.hx());
  const double ay = setup_.b[1] / (2.0 * g.hy());

  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<std::size_t>(5 * n));
  weights_.assign(static_cast<std::size_t>(n), 1.0);

  auto add = [&](int row, int i, int j, double value) {
    if (i < 1 || j < 1 || j > ny - 1) return;  // Dirichlet neighbour
    triplets.emplace_back(row, node_index(g, i, j), value);
  };

  for (int j = 1; j <= ny - 1; ++j) {
    for (int i = 1; i <= nx; ++i) {
      const int row = node_index(g, i, j);
      if (i < nx) {
        add(row, i, j, 2.0 * cx + 2.0 * cy);
        add(row, i + 1, j, -cx + ax);
        add(row, i - 1, j, -cx - ax);
        add(row, i, j + 1, -cy + ay);
        add(row, i, j - 1, -cy - ay);
      } else {
        // Mirror ghost node y(nx + 1) = y(nx - 1); the row is halved (half control volume).
        add(row, i, j, cx + cy);
        add(row, i - 1, j, -cx);
        add(row, i, j + 1, 0.5 * (-cy + ay));
        add(row, i, j - 1, 0.5 * (-cy - ay));
        weights_[static_cast<std::size_t>(row)] = 0.5;
      }
    }
  }
  matrix_.resize(n, n);
  matrix_.setFromTriplets(triplets.begin(), triplets.end());
  matrix_.makeCompressed();

  auto fact = std::make_shared<Factorization>();
  fact->forward.compute(matrix_);
  if (fact->forward.info() != Eigen::Success) throw NumericalError("pde: factorization of A failed");
  SparseMatrix at = matrix_.transpose();
  at.makeCompressed();
  fact->transposed.compute(at);
  if (fact->transposed.info() != Eigen::Success) throw NumericalError("pde: factorization of A^T failed");
  lu_ = std::move(fact);
}

std::vector<double> LinearSystem::apply(std::span<const double> x) const {
  return from_eigen(matrix_ * to_eigen(x));
}

std::vector<double> LinearSystem::apply_transpose(std::span<const double> x) const {
  return from_eigen(matrix_.transpose() * to_eigen(x));
}

std::vector<double> LinearSystem::solve(std::span<const double> rhs) const {
  return refined_solve(lu_->forward, matrix_, rhs);
}

std::vector<double> LinearSystem::solve_transpose(std::span<const double> rhs) const {
  SparseMatrix at = matrix_.transpose();
  return refined_solve(lu_->transposed, at, rhs);
}

LinearSystem assemble(const PdeSetup& setup) { return LinearSystem(setup); }

std::vector<int> node_to_cell(const GridSpec& control, const GridSpec& state) {
  if (control.lx() != state.lx() || control.ly() != state.ly()) {
    throw UsageError("control and state grids must cover the same domain");
  }
  auto locate = [](int node, int n_state, int n_control) {
    // ceil(node * n_control / n_state) - 1, computed exactly
    const long num = static_cast<long>(node) * n_control;
    const long c = (num + n_state - 1) / n_state - 1;
    return static_cast<int>(std::clamp<long>(c, 0, n_control - 1));
  };
  std::vector<int> cells(static_cast<std::size_t>(num_unknowns(state)));
  for (int j = 1; j <= state.ny() - 1; ++j) {
    const int row = locate(j, state.ny(), control.ny());
    for (int i = 1; i <= state.nx(); ++i) {
      const int col = locate(i, state.nx(), control.nx());
      cells[static_cast<std::size_t>(node_index(state, i, j))] = control.index(col, row);
    }
  }
  return cells;
}

std::vector<double> source_rhs(const LinearSystem& system, const GridSpec& control_grid,
                               std::span<const double> cell_values) {
  if (cell_values.size() != static_cast<std::size_t>(control_grid.num_cells())) {
    throw UsageError("source has the wrong number of cell values");
  }
  const auto cells = node_to_cell(control_grid, system.state_grid());
  const auto w = system.row_weights();
  std::vector<double> rhs(cells.size());
  for (std::size_t k = 0; k < cells.size(); ++k) {
    rhs[k] = w[k] * cell_values[static_cast<std::size_t>(cells[k])];
  }
  return rhs;
}

ScalarField solve_state(const LinearSystem& system, const GridSpec& control_grid,
                        std::span<const double> cell_values) {
  return ScalarField(system.state_grid(), system.solve(source_rhs(system, control_grid, cell_values)));
}

ScalarField solve_state(const LinearSystem& system, const ControlField& source) {
  const auto w = source.as_real();
  return solve_state(system, source.grid(), w);
}

ScalarField solve_adjoint(const LinearSystem& system, const ScalarField& residual) {
  if (!(residual.state_grid() == system.state_grid())) throw UsageError("adjoint rhs on a different grid");
  return ScalarField(system.state_grid(), system.solve_transpose(residual.values()));
}

std::vector<double> pointwise_rhs(const LinearSystem& system, const std::function<double(Point)>& f) {
  const auto w = system.row_weights();
  std::vector<double> rhs(w.size());
  for (std::size_t k = 0; k < rhs.size(); ++k) {
    rhs[k] = w[k] * f(node_position(system.state_grid(), static_cast<int>(k)));
  }
  return rhs;
}

void write_csv(std::ostream& out, const ScalarField& y) {
  const GridSpec& g = y.state_grid();
  out << g.nx() << ',' << g.ny() << ',' << format_double(g.lx()) << ',' << format_double(g.ly()) << '\n';
  for (int j = 0; j <= g.ny(); ++j) {
    for (int i = 0; i <= g.nx(); ++i) {
      const bool dirichlet = i == 0 || j == 0 || j == g.ny();
      const double value = dirichlet ? 0.0 : y.values()[static_cast<std::size_t>(node_index(g, i, j))];
      if (i > 0) out << ',';
      out << format_double(value);
    }
    out << '\n';
  }
}

ScalarField read_scalar_csv(std::istream& in) {
  auto next_line = [&](std::string& line) {
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.find_first_not_of(" \t") != std::string::npos) return true;
    }
    return false;
  };
  auto split = [](const std::string& line) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string c;
    while (std::getline(ss, c, ',')) cells.push_back(c);
    return cells;
  };
  std::string line;
  if (!next_line(line)) throw ConfigError("state csv: missing header");
  const auto h = split(line);
  if (h.size() != 4) throw ConfigError("state csv: header must be nx,ny,lx,ly");
  GridSpec g(1, 2);
  try {
    g = GridSpec(std::stoi(h[0]), std::stoi(h[1]), std::stod(h[2]), std::stod(h[3]));
  } catch (const UsageError& e) {
    throw ConfigError(std::string("state csv: ") + e.what());
  } catch (const std::exception&) {
    throw ConfigError("state csv: malformed header '" + line + "'");
  }
  if (g.ny() < 2) throw ConfigError("state csv: ny must be >= 2");
  std::vector<double> values(static_cast<std::size_t>(num_unknowns(g)));
  for (int j = 0; j <= g.ny(); ++j) {
    if (!next_line(line)) throw ConfigError("state csv: expected " + std::to_string(g.ny() + 1) + " rows");
    const auto cells = split(line);
    if (cells.size() != static_cast<std::size_t>(g.nx() + 1)) {
      throw ConfigError("state csv: row " + std::to_string(j) + " has the wrong length");
    }
    if (j == 0 || j == g.ny()) continue;
    for (int i = 1; i <= g.nx(); ++i) {
      try {
        values[static_cast<std::size_t>(node_index(g, i, j))] = std::stod(cells[static_cast<std::size_t>(i)]);
      } catch (const std::exception&) {
        throw ConfigError("state csv: bad value '" + cells[static_cast<std::size_t>(i)] + "'");
      }
    }
  }
  return ScalarField(g, std::move(values));
}

}  // namespace slip
