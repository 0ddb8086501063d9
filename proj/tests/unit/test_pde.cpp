#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "slip/error.hpp"
#include "slip/pde.hpp"

using namespace slip;

namespace {

const double kPi = std::numbers::pi;

PdeSetup model_setup(int n, double peclet_limit = 1.0) {
  PdeSetup s;
  s.eps = 1.5e-2;
  s.b = {std::cos(kPi / 32), std::sin(kPi / 32)};
  s.state_grid = GridSpec(n, n);
  s.peclet_limit = peclet_limit;
  return s;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

double max_abs(std::span<const double> a) {
  double m = 0;
  for (double x : a) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

TEST_CASE("poisson stencil with natural closure on the right") {
  PdeSetup s;
  s.eps = 1.0;
  s.state_grid = GridSpec(3, 4);  // unknown nodes i = 1..3, j = 1..3
  const LinearSystem sys(s);
  REQUIRE(sys.size() == 9);
  const double ax = 9.0, ay = 16.0;  // 1 / h^2
  // Expected matrix written out from the stencil.
  std::vector<std::vector<double>> e(9, std::vector<double>(9, 0.0));
  for (int j = 1; j <= 3; ++j) {
    for (int i = 1; i <= 3; ++i) {
      const int k = (j - 1) * 3 + (i - 1);
      const double w = i == 3 ? 0.5 : 1.0;
      e[k][k] = w * (2 * ax + 2 * ay);
      if (i > 1) e[k][k - 1] = -w * (i == 3 ? 2 * ax : ax);
      if (i < 3) e[k][k + 1] = -ax;
      if (j > 1) e[k][k - 3] = -w * ay;
      if (j < 3) e[k][k + 3] = -w * ay;
      CHECK(sys.row_weights()[k] == w);
    }
  }
  const Eigen::MatrixXd a(sys.matrix());
  for (int r = 0; r < 9; ++r) {
    for (int c = 0; c < 9; ++c) CHECK(a(r, c) == doctest::Approx(e[r][c]).epsilon(1e-14));
  }
  CHECK((a - a.transpose()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("assembly and the Peclet guard") {
  const PdeSetup s = model_setup(64);
  CHECK(mesh_peclet(s) == doctest::Approx(1.0 / 64 / (2 * 1.5e-2)));
  const LinearSystem sys(s);
  const std::vector<double> zero(static_cast<std::size_t>(sys.size()), 0.0);
  CHECK(max_abs(sys.apply(zero)) == 0.0);
  CHECK_THROWS_AS(LinearSystem(model_setup(32)), ConfigError);
  CHECK_NOTHROW(LinearSystem(model_setup(32, 1.5)));
}

TEST_CASE("zero source gives zero state and zero adjoint") {
  const LinearSystem sys(model_setup(64));
  const ControlField w(GridSpec(16, 16), LabelSet({0, 1, 2}), 0);
  CHECK(max_abs(solve_state(sys, w).values()) == 0.0);
  CHECK(max_abs(solve_adjoint(sys, ScalarField::zeros(sys.state_grid())).values()) == 0.0);
}

TEST_CASE("reflection symmetry without advection") {
  PdeSetup s;
  s.state_grid = GridSpec(12, 9);
  const LinearSystem sys(s);
  auto f = [](Point p) { return p.x * p.y * (1 - p.y) + std::exp(-20 * (p.y - 0.5) * (p.y - 0.5)); };
  const auto y = sys.solve(pointwise_rhs(sys, f));
  // cellwise source on a 4x4 control grid: no state node lies on a control interface row
  const ControlField w(GridSpec(4, 4), LabelSet({0, 1, 2}), {0, 2, 1, 0, 1, 0, 0, 2, 1, 0, 0, 2, 0, 2, 1, 0});
  const auto yw = solve_state(sys, w);
  const GridSpec& g = s.state_grid;
  for (int j = 1; j < g.ny(); ++j) {
    for (int i = 1; i <= g.nx(); ++i) {
      const auto a = static_cast<std::size_t>(node_index(g, i, j));
      const auto b = static_cast<std::size_t>(node_index(g, i, g.ny() - j));
      CHECK(std::abs(y[a] - y[b]) <= 1e-10);
      CHECK(std::abs(yw.values()[a] - yw.values()[b]) <= 1e-10);
    }
  }
}

TEST_CASE("adjoint equals forward solve when A is symmetric") {
  PdeSetup s;
  s.state_grid = GridSpec(16, 16);
  const LinearSystem sys(s);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<double> r(static_cast<std::size_t>(sys.size()));
  for (auto& x : r) x = u(rng);
  const auto p = solve_adjoint(sys, ScalarField(s.state_grid, r));
  const auto y = sys.solve(r);
  for (std::size_t k = 0; k < r.size(); ++k) CHECK(std::abs(p.values()[k] - y[k]) <= 1e-10);
}

TEST_CASE("adjoint identity on random pairs") {
  const LinearSystem sys(model_setup(32, 1.5));
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-1, 1);
  const auto n = static_cast<std::size_t>(sys.size());
  for (int t = 0; t < 50; ++t) {
    std::vector<double> y(n), p(n);
    for (auto& x : y) x = u(rng);
    for (auto& x : p) x = u(rng);
    const double lhs = dot(sys.apply(y), p);
    const double rhs = dot(y, sys.apply_transpose(p));
    CHECK(std::abs(lhs - rhs) <= 1e-12 * std::max(std::abs(lhs), 1.0));
    // and the transpose solve inverts apply_transpose
    const auto q = sys.solve_transpose(sys.apply_transpose(p));
    for (std::size_t k = 0; k < n; ++k) CHECK(std::abs(q[k] - p[k]) <= 1e-9);
  }
}

TEST_CASE("solve_state is linear") {
  const LinearSystem sys(model_setup(64));
  const GridSpec cg(16, 16);
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0, 2);
  std::vector<double> a(256), b(256), ab(256);
  for (int k = 0; k < 256; ++k) {
    a[k] = u(rng);
    b[k] = u(rng);
    ab[k] = a[k] + b[k];
  }
  const auto ya = solve_state(sys, cg, a), yb = solve_state(sys, cg, b), yab = solve_state(sys, cg, ab);
  const double scale = max_abs(yab.values());
  for (std::size_t k = 0; k < ya.size(); ++k) {
    CHECK(std::abs(yab.values()[k] - ya.values()[k] - yb.values()[k]) <= 1e-10 * scale);
  }
}

TEST_CASE("manufactured solution converges at second order") {
  const double eps = 1.5e-2, bx = std::cos(kPi / 32), by = std::sin(kPi / 32);
  auto exact = [](Point p) { return std::sin(kPi * p.x / 2) * std::sin(kPi * p.y); };
  auto source = [&](Point p) {
    return eps * (kPi * kPi / 4 + kPi * kPi) * exact(p) + bx * kPi / 2 * std::cos(kPi * p.x / 2) * std::sin(kPi * p.y) +
           by * kPi * std::sin(kPi * p.x / 2) * std::cos(kPi * p.y);
  };
  std::vector<double> err;
  for (int n : {32, 64, 128}) {
    const LinearSystem sys(model_setup(n, 1.5));
    const auto y = sys.solve(pointwise_rhs(sys, source));
    double e2 = 0;
    for (int k = 0; k < sys.size(); ++k) {
      const double d = y[k] - exact(node_position(sys.state_grid(), k));
      e2 += sys.state_grid().cell_measure() * sys.row_weights()[k] * d * d;
    }
    err.push_back(std::sqrt(e2));
  }
  for (std::size_t k = 1; k < err.size(); ++k) {
    const double order = std::log2(err[k - 1] / err[k]);
    CHECK(order >= 1.7);
    CHECK(order <= 2.3);
  }
}

TEST_CASE("node to cell injection") {
  const auto cells = node_to_cell(GridSpec(4, 4), GridSpec(8, 8));
  const GridSpec s(8, 8);
  // node (2, 2) sits on the corner of cells; it belongs to the lower-index cell (0, 0)
  CHECK(cells[static_cast<std::size_t>(node_index(s, 2, 2))] == 0);
  CHECK(cells[static_cast<std::size_t>(node_index(s, 3, 3))] == GridSpec(4, 4).index(1, 1));
  CHECK(cells[static_cast<std::size_t>(node_index(s, 8, 7))] == GridSpec(4, 4).index(3, 3));
  // same grid: node (i, j) lies at the upper-right corner of cell (i-1, j-1)
  const auto same = node_to_cell(GridSpec(5, 5), GridSpec(5, 5));
  const GridSpec g(5, 5);
  for (int j = 1; j < 5; ++j) {
    for (int i = 1; i <= 5; ++i) CHECK(same[static_cast<std::size_t>(node_index(g, i, j))] == g.index(i - 1, j - 1));
  }
}

TEST_CASE("state csv round trip") {
  const LinearSystem sys(model_setup(64));
  const auto y = solve_state(sys, ControlField(GridSpec(4, 4), LabelSet({0, 1}), 1));
  std::stringstream ss;
  write_csv(ss, y);
  const auto back = read_scalar_csv(ss);
  CHECK(back.state_grid() == y.state_grid());
  for (std::size_t k = 0; k < y.size(); ++k) CHECK(back.values()[k] == y.values()[k]);
}
