#pragma once

#include <limits>
#include <vector>

namespace slip {

// min c^T x  s.t.  A x = b,  lower <= x <= upper  (lower finite, upper may be +inf).
// A is dense row-major, rows x cols.
struct LinearProgram {
  int rows = 0;
  int cols = 0;
  std::vector<double> a;
  std::vector<double> b;
  std::vector<double> c;
  std::vector<double> lower;
  std::vector<double> upper;

  static constexpr double inf = std::numeric_limits<double>::infinity();
};

enum class LpStatus { optimal, infeasible, unbounded, iteration_limit };

const char* to_string(LpStatus status);

struct LpResult {
  LpStatus status = LpStatus::infeasible;
  double objective = 0.0;
  std::vector<double> x;
  int iterations = 0;
};

struct SimplexOptions {
  double pivot_tol = 1e-9;
  double cost_tol = 1e-9;
  double feasibility_tol = 1e-9;
  // 0 selects 50 * (rows + cols).
  int max_iterations = 0;
};

// Dense-tableau bounded-variable primal simplex, two phases, Bland's rule for both the
// entering and the leaving choice. Columns that are singletons in a row seed the starting
// basis; the remaining rows receive artificials driven out in phase one.
LpResult solve_lp(const LinearProgram& lp, const SimplexOptions& options = {});

}  // namespace slip
