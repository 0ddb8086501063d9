#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <random>

#include "slip/simplex.hpp"

using namespace slip;

namespace {

// Minimum over all basic solutions (basis of m columns, every other column at a bound).
double vertex_enumeration(const LinearProgram& lp) {
  const int m = lp.rows, n = lp.cols;
  double best = std::numeric_limits<double>::infinity();
  for (unsigned mask = 0; mask < (1u << n); ++mask) {
    if (__builtin_popcount(mask) != m) continue;
    std::vector<int> basic, nonbasic;
    for (int j = 0; j < n; ++j) ((mask >> j) & 1u ? basic : nonbasic).push_back(j);
    Eigen::MatrixXd ab(m, m);
    for (int r = 0; r < m; ++r) {
      for (int k = 0; k < m; ++k) ab(r, k) = lp.a[static_cast<std::size_t>(r * n + basic[k])];
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(ab);
    if (lu.rank() < m) continue;
    for (unsigned at = 0; at < (1u << nonbasic.size()); ++at) {
      std::vector<double> x(static_cast<std::size_t>(n));
      Eigen::VectorXd rhs(m);
      for (int r = 0; r < m; ++r) rhs(r) = lp.b[static_cast<std::size_t>(r)];
      for (std::size_t k = 0; k < nonbasic.size(); ++k) {
        const int j = nonbasic[k];
        x[j] = (at >> k) & 1u ? lp.upper[j] : lp.lower[j];
        for (int r = 0; r < m; ++r) rhs(r) -= lp.a[static_cast<std::size_t>(r * n + j)] * x[j];
      }
      const Eigen::VectorXd xb = lu.solve(rhs);
      bool ok = true;
      for (int k = 0; k < m; ++k) {
        x[basic[k]] = xb(k);
        ok = ok && xb(k) >= lp.lower[basic[k]] - 1e-9 && xb(k) <= lp.upper[basic[k]] + 1e-9;
      }
      if (!ok) continue;
      double obj = 0;
      for (int j = 0; j < n; ++j) obj += lp.c[j] * x[j];
      best = std::min(best, obj);
    }
  }
  return best;
}

}  // namespace

TEST_CASE("simplex matches vertex enumeration on random boxed programs") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-1, 1);
  std::uniform_int_distribution<int> small(-3, 3);
  for (int t = 0; t < 300; ++t) {
    LinearProgram lp;
    lp.rows = 1 + static_cast<int>(rng() % 3);
    lp.cols = lp.rows + 1 + static_cast<int>(rng() % 4);
    const bool integral = t % 2 == 0;  // integer data produces many degenerate vertices
    for (int k = 0; k < lp.rows * lp.cols; ++k) lp.a.push_back(integral ? small(rng) : u(rng));
    std::vector<double> x0;
    for (int j = 0; j < lp.cols; ++j) {
      lp.lower.push_back(integral ? 0.0 : u(rng));
      lp.upper.push_back(lp.lower.back() + (integral ? 2.0 : 1.0 + u(rng)));
      lp.c.push_back(integral ? small(rng) : u(rng));
      x0.push_back(integral ? static_cast<double>(rng() % 3) : lp.lower.back());
    }
    for (int r = 0; r < lp.rows; ++r) {
      double s = 0;
      for (int j = 0; j < lp.cols; ++j) s += lp.a[static_cast<std::size_t>(r * lp.cols + j)] * x0[j];
      lp.b.push_back(s);
    }
    const LpResult res = solve_lp(lp);
    REQUIRE(res.status == LpStatus::optimal);
    CHECK(res.objective == doctest::Approx(vertex_enumeration(lp)).epsilon(1e-9).scale(1.0));
    for (int r = 0; r < lp.rows; ++r) {
      double s = 0;
      for (int j = 0; j < lp.cols; ++j) s += lp.a[static_cast<std::size_t>(r * lp.cols + j)] * res.x[j];
      CHECK(std::abs(s - lp.b[r]) <= 1e-8);
    }
    for (int j = 0; j < lp.cols; ++j) {
      CHECK(res.x[j] >= lp.lower[j] - 1e-9);
      CHECK(res.x[j] <= lp.upper[j] + 1e-9);
    }
  }
}

TEST_CASE("Beale's cycling example terminates at the optimum") {
  LinearProgram lp;
  lp.rows = 3;
  lp.cols = 7;
  lp.a = {1, 0, 0, 0.25, -8, -1, 9,  //
          0, 1, 0, 0.5, -12, -0.5, 3,  //
          0, 0, 1, 0, 0, 1, 0};
  lp.b = {0, 0, 1};
  lp.c = {0, 0, 0, -0.75, 20, -0.5, 6};
  lp.lower.assign(7, 0.0);
  lp.upper.assign(7, LinearProgram::inf);
  const LpResult res = solve_lp(lp);
  REQUIRE(res.status == LpStatus::optimal);
  CHECK(res.objective == doctest::Approx(-1.25));
}

TEST_CASE("infeasible and unbounded programs") {
  LinearProgram bad;
  bad.rows = 1;
  bad.cols = 2;
  bad.a = {1, 1};
  bad.b = {5};
  bad.c = {1, 1};
  bad.lower = {0, 0};
  bad.upper = {1, 1};
  CHECK(solve_lp(bad).status == LpStatus::infeasible);

  LinearProgram open;
  open.rows = 1;
  open.cols = 2;
  open.a = {1, -1};
  open.b = {0};
  open.c = {-1, 0};
  open.lower = {0, 0};
  open.upper = {LinearProgram::inf, LinearProgram::inf};
  CHECK(solve_lp(open).status == LpStatus::unbounded);
}

TEST_CASE("iteration limit is reported") {
  LinearProgram lp;
  lp.rows = 2;
  lp.cols = 4;
  lp.a = {1, 1, 1, 0, 1, -1, 0, 1};
  lp.b = {4, 1};
  lp.c = {-1, -2, 0, 0};
  lp.lower.assign(4, 0.0);
  lp.upper.assign(4, LinearProgram::inf);
  const auto full = solve_lp(lp);
  CHECK(full.status == LpStatus::optimal);
  CHECK(full.objective == doctest::Approx(-8.0));
  REQUIRE(full.iterations > 1);
  SimplexOptions tight;
  tight.max_iterations = 1;
  CHECK(solve_lp(lp, tight).status == LpStatus::iteration_limit);
}
