#include "slip/simplex.hpp"

#include <algorithm>
#include <cmath>

#include "slip/error.hpp"

namespace slip {

const char* to_string(LpStatus status) {
  switch (status) {
    case LpStatus::optimal: return "optimal";
    case LpStatus::infeasible: return "infeasible";
    case LpStatus::unbounded: return "unbounded";
    case LpStatus::iteration_limit: return "iteration_limit";
  }
  return "unknown";
}

namespace {

class Tableau {
 public:
  Tableau(const LinearProgram& lp, const SimplexOptions& opt) : opt_(opt), m_(lp.rows), n_(lp.cols) {
    lower_ = lp.lower;
    upper_ = lp.upper;
    x_ = lp.lower;
    std::vector<double> residual = lp.b;
    for (int i = 0; i < m_; ++i) {
      for (int j = 0; j < n_; ++j) residual[i] -= lp.a[idx(lp, i, j)] * x_[j];
    }

    // Crash basis from singleton columns whose implied value respects the bounds.
    std::vector<int> nnz(n_, 0);
    std::vector<int> nz_row(n_, -1);
    for (int i = 0; i < m_; ++i) {
      for (int j = 0; j < n_; ++j) {
        if (lp.a[idx(lp, i, j)] != 0.0) {
          ++nnz[j];
          nz_row[j] = i;
        }
      }
    }
    basis_.assign(m_, -1);
    std::vector<double> row_scale(m_, 1.0);
    std::vector<bool> used(n_, false);
    for (int j = 0; j < n_; ++j) {
      if (nnz[j] != 1) continue;
      const int i = nz_row[j];
      if (basis_[i] >= 0 || used[j]) continue;
      const double aij = lp.a[idx(lp, i, j)];
      const double value = lower_[j] + residual[i] / aij;
      if (value < lower_[j] - opt_.feasibility_tol || value > upper_[j] + opt_.feasibility_tol) continue;
      basis_[i] = j;
      used[j] = true;
      row_scale[i] = 1.0 / aij;
      x_[j] = std::clamp(value, lower_[j], upper_[j]);
    }

    artificial_begin_ = n_;
    std::vector<std::pair<int, double>> artificials;
    for (int i = 0; i < m_; ++i) {
      if (basis_[i] >= 0) continue;
      const double s = residual[i] >= 0.0 ? 1.0 : -1.0;
      row_scale[i] = s;
      basis_[i] = n_ + static_cast<int>(artificials.size());
      artificials.emplace_back(i, std::abs(residual[i]));
    }
    total_ = n_ + static_cast<int>(artificials.size());
    for (const auto& [row, value] : artificials) {
      (void)row;
      lower_.push_back(0.0);
      upper_.push_back(LinearProgram::inf);
      x_.push_back(value);
    }

    t_.assign(static_cast<std::size_t>(m_) * total_, 0.0);
    for (int i = 0; i < m_; ++i) {
      for (int j = 0; j < n_; ++j) at(i, j) = lp.a[idx(lp, i, j)] * row_scale[i];
    }
    for (std::size_t k = 0; k < artificials.size(); ++k) at(artificials[k].first, n_ + static_cast<int>(k)) = 1.0;
    at_upper_.assign(total_, false);
    is_basic_.assign(total_, false);
    for (int i = 0; i < m_; ++i) is_basic_[basis_[i]] = true;
  }

  bool has_artificials() const { return total_ > n_; }

  // Returns status of the optimization over the current cost vector.
  LpStatus optimize(const std::vector<double>& cost, int& iterations, int max_iterations) {
    compute_reduced_costs(cost);
    while (true) {
      if (iterations >= max_iterations) return LpStatus::iteration_limit;
      const int enter = choose_entering();
      if (enter < 0) return LpStatus::optimal;
      ++iterations;
      if (!step(enter)) return LpStatus::unbounded;
    }
  }

  double artificial_sum() const {
    double s = 0.0;
    for (int j = artificial_begin_; j < total_; ++j) s += x_[j];
    return s;
  }

  // Fix artificials at zero and pivot basic ones out where possible.
  void retire_artificials() {
    for (int j = artificial_begin_; j < total_; ++j) {
      upper_[j] = 0.0;
      if (!is_basic_[j]) {
        x_[j] = 0.0;
        at_upper_[j] = false;
      }
    }
    for (int i = 0; i < m_; ++i) {
      if (basis_[i] < artificial_begin_) continue;
      for (int j = 0; j < artificial_begin_; ++j) {
        if (is_basic_[j] || std::abs(at(i, j)) <= opt_.pivot_tol) continue;
        pivot(i, j);
        break;
      }
    }
  }

  std::vector<double> solution() const { return {x_.begin(), x_.begin() + n_}; }
  std::vector<double> phase_one_cost() const {
    std::vector<double> c(total_, 0.0);
    for (int j = artificial_begin_; j < total_; ++j) c[j] = 1.0;
    return c;
  }
  std::vector<double> extend_cost(const std::vector<double>& c) const {
    std::vector<double> out(c);
    out.resize(total_, 0.0);
    return out;
  }

 private:
  static std::size_t idx(const LinearProgram& lp, int i, int j) {
    return static_cast<std::size_t>(i) * lp.cols + j;
  }
  double& at(int i, int j) { return t_[static_cast<std::size_t>(i) * total_ + j]; }
  double at(int i, int j) const { return t_[static_cast<std::size_t>(i) * total_ + j]; }

  void compute_reduced_costs(const std::vector<double>& cost) {
    d_ = cost;
    for (int i = 0; i < m_; ++i) {
      const double cb = cost[basis_[i]];
      if (cb == 0.0) continue;
      for (int j = 0; j < total_; ++j) d_[j] -= cb * at(i, j);
    }
  }

  int choose_entering() const {
    for (int j = 0; j < total_; ++j) {
      if (is_basic_[j] || upper_[j] <= lower_[j]) continue;
      if (!at_upper_[j] && d_[j] < -opt_.cost_tol) return j;
      if (at_upper_[j] && d_[j] > opt_.cost_tol) return j;
    }
    return -1;
  }

  bool step(int enter) {
    const double dir = at_upper_[enter] ? -1.0 : 1.0;
    double best = upper_[enter] - lower_[enter];
    int best_var = enter;
    int best_row = -1;
    std::vector<std::pair<double, int>> ratios;
    ratios.reserve(16);
    for (int i = 0; i < m_; ++i) {
      const double alpha = dir * at(i, enter);
      if (std::abs(alpha) <= opt_.pivot_tol) continue;
      const int bvar = basis_[i];
      double theta;
      if (alpha > 0.0) {
        theta = (x_[bvar] - lower_[bvar]) / alpha;
      } else {
        if (!std::isfinite(upper_[bvar])) continue;
        theta = (upper_[bvar] - x_[bvar]) / -alpha;
      }
      ratios.emplace_back(std::max(theta, 0.0), i);
    }
    for (const auto& [theta, i] : ratios) best = std::min(best, theta);
    if (!std::isfinite(best)) return false;
    // Bland: among (near-)minimal ratios take the variable with the smallest index.
    const double tie = best + 1e-12 * (1.0 + best);
    if (!(upper_[enter] - lower_[enter] <= tie)) best_var = -1;
    for (const auto& [theta, i] : ratios) {
      if (theta > tie) continue;
      if (best_var < 0 || basis_[i] < best_var) {
        best_var = basis_[i];
        best_row = i;
      }
    }
    if (best_var == enter) best_row = -1;
    const double theta = best_row < 0 ? upper_[enter] - lower_[enter] : best;

    x_[enter] += dir * theta;
    for (int i = 0; i < m_; ++i) {
      const double a = at(i, enter);
      if (a != 0.0) x_[basis_[i]] -= dir * theta * a;
    }
    if (best_row < 0) {
      at_upper_[enter] = !at_upper_[enter];
      x_[enter] = at_upper_[enter] ? upper_[enter] : lower_[enter];
      return true;
    }
    const int leave = basis_[best_row];
    const bool to_upper = dir * at(best_row, enter) < 0.0;
    x_[leave] = to_upper ? upper_[leave] : lower_[leave];
    at_upper_[leave] = to_upper;
    pivot(best_row, enter);
    return true;
  }

  void pivot(int r, int enter) {
    const int leave = basis_[r];
    const double p = at(r, enter);
    nz_.clear();
    for (int j = 0; j < total_; ++j) {
      double& v = at(r, j);
      if (v == 0.0) continue;
      v /= p;
      nz_.push_back(j);
    }
    at(r, enter) = 1.0;
    for (int i = 0; i < m_; ++i) {
      if (i == r) continue;
      const double f = at(i, enter);
      if (f == 0.0) continue;
      double* row = &t_[static_cast<std::size_t>(i) * total_];
      const double* prow = &t_[static_cast<std::size_t>(r) * total_];
      for (int j : nz_) row[j] -= f * prow[j];
      row[enter] = 0.0;
    }
    if (!d_.empty()) {
      const double f = d_[enter];
      if (f != 0.0) {
        const double* prow = &t_[static_cast<std::size_t>(r) * total_];
        for (int j : nz_) d_[j] -= f * prow[j];
        d_[enter] = 0.0;
      }
    }
    basis_[r] = enter;
    is_basic_[enter] = true;
    is_basic_[leave] = false;
  }

  SimplexOptions opt_;
  int m_;
  int n_;
  int total_ = 0;
  int artificial_begin_ = 0;
  std::vector<double> t_;
  std::vector<double> d_;
  std::vector<double> x_;
  std::vector<double> lower_;
  std::vector<double> upper_;
  std::vector<int> basis_;
  std::vector<bool> at_upper_;
  std::vector<bool> is_basic_;
  std::vector<int> nz_;
};

void validate(const LinearProgram& lp) {
  const auto m = static_cast<std::size_t>(lp.rows);
  const auto n = static_cast<std::size_t>(lp.cols);
  if (lp.rows < 0 || lp.cols < 0 || lp.a.size() != m * n || lp.b.size() != m || lp.c.size() != n ||
      lp.lower.size() != n || lp.upper.size() != n) {
    throw UsageError("linear program has inconsistent dimensions");
  }
  for (std::size_t j = 0; j < n; ++j) {
    if (!std::isfinite(lp.lower[j])) throw UsageError("simplex requires finite lower bounds");
    if (std::isnan(lp.upper[j])) throw UsageError("simplex upper bound is NaN");
  }
}

}  // namespace

LpResult solve_lp(const LinearProgram& lp, const SimplexOptions& options) {
  validate(lp);
  LpResult result;
  for (int j = 0; j < lp.cols; ++j) {
    if (lp.upper[j] < lp.lower[j]) {
      result.status = LpStatus::infeasible;
      return result;
    }
  }
  const int max_iterations = options.max_iterations > 0 ? options.max_iterations : 50 * (lp.rows + lp.cols);
  Tableau tab(lp, options);
  if (tab.has_artificials()) {
    const LpStatus s = tab.optimize(tab.phase_one_cost(), result.iterations, max_iterations);
    if (s == LpStatus::iteration_limit) {
      result.status = s;
      return result;
    }
    double scale = 1.0;
    for (double v : lp.b) scale = std::max(scale, std::abs(v));
    if (tab.artificial_sum() > options.feasibility_tol * scale) {
      result.status = LpStatus::infeasible;
      return result;
    }
    tab.retire_artificials();
  }
  result.status = tab.optimize(tab.extend_cost(lp.c), result.iterations, max_iterations);
  result.x = tab.solution();
  double obj = 0.0;
  for (int j = 0; j < lp.cols; ++j) obj += lp.c[j] * result.x[j];
  result.objective = obj;
  return result;
}

}  // namespace slip
