#include "slip/objective.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "slip/error.hpp"

namespace slip {

namespace {

void check_compatible(const Problem& prob, const ControlField& v) {
  if (!prob.smooth) throw UsageError("problem has no smooth term");
  if (!(v.grid() == prob.control_grid())) throw UsageError("control lives on a different grid than the problem");
  if (!(v.labels() == prob.labels)) throw UsageError("control uses a different label set than the problem");
}

}  // namespace

TrackingTerm::TrackingTerm(const PdeSetup& pde, GridSpec control_grid, ScalarField y_d)
    : system_(pde), control_grid_(control_grid), y_d_(std::move(y_d)) {
  if (!(y_d_.state_grid() == pde.state_grid)) throw UsageError("target state lives on a different grid");
  node_cell_ = node_to_cell(control_grid_, pde.state_grid);
  const double area = pde.state_grid.hx() * pde.state_grid.hy();
  const auto d = system_.row_weights();
  mass_.resize(d.size());
  for (std::size_t k = 0; k < d.size(); ++k) mass_[k] = area * d[k];
}

ScalarField TrackingTerm::state(std::span<const double> w) const {
  return solve_state(system_, control_grid_, w);
}

double TrackingTerm::value(std::span<const double> w) const {
  const ScalarField y = state(w);
  const auto yd = y_d_.values();
  double total = 0.0;
  for (std::size_t k = 0; k < mass_.size(); ++k) {
    const double r = y.values()[k] - yd[k];
    total += mass_[k] * r * r;
  }
  return 0.5 * total;
}

std::vector<double> TrackingTerm::gradient(std::span<const double> w) const {
  const ScalarField y = state(w);
  std::vector<double> rhs(mass_.size());
  for (std::size_t k = 0; k < rhs.size(); ++k) rhs[k] = mass_[k] * (y.values()[k] - y_d_.values()[k]);
  const std::vector<double> p = system_.solve_transpose(rhs);
  const auto d = system_.row_weights();
  std::vector<double> c(static_cast<std::size_t>(control_grid_.num_cells()), 0.0);
  for (std::size_t k = 0; k < p.size(); ++k) c[static_cast<std::size_t>(node_cell_[k])] += d[k] * p[k];
  return c;
}

LinearTerm::LinearTerm(GridSpec control_grid, std::vector<double> c, double offset)
    : grid_(control_grid), c_(std::move(c)), offset_(offset) {
  if (c_.size() != static_cast<std::size_t>(grid_.num_cells())) throw UsageError("linear term size mismatch");
}

double LinearTerm::value(std::span<const double> w) const {
  if (w.size() != c_.size()) throw UsageError("linear term: control size mismatch");
  double total = offset_;
  for (std::size_t p = 0; p < c_.size(); ++p) total += c_[p] * w[p];
  return total;
}

Problem make_tracking_problem(const PdeSetup& pde, GridSpec control_grid, ScalarField y_d, double alpha,
                              LabelSet labels) {
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw ConfigError("alpha must be a nonnegative number");
  Problem prob;
  prob.smooth = std::make_shared<TrackingTerm>(pde, control_grid, std::move(y_d));
  prob.alpha = alpha;
  prob.labels = std::move(labels);
  return prob;
}

ScalarField target_from_control(const PdeSetup& pde, const ControlField& reference) {
  return solve_state(LinearSystem(pde), reference);
}

double f_value(const Problem& prob, const ControlField& v) {
  check_compatible(prob, v);
  return prob.smooth->value(v.as_real());
}

GradientField gradient(const Problem& prob, const ControlField& v) {
  check_compatible(prob, v);
  GradientField g{v.grid(), prob.smooth->gradient(v.as_real())};
  for (double c : g.values) {
    if (!std::isfinite(c)) throw NumericalError("gradient contains non-finite values");
  }
  return g;
}

double j_value(const Problem& prob, const ControlField& v) { return f_value(prob, v) + prob.alpha * tv(v); }

GradientCheck check_gradient(const SmoothTerm& term, std::span<const double> w, std::span<const double> delta,
                             const std::vector<double>& steps) {
  const auto n = static_cast<std::size_t>(term.control_grid().num_cells());
  if (w.size() != n || delta.size() != n) throw UsageError("gradient check: size mismatch");
  if (steps.empty()) throw UsageError("gradient check needs at least one step");
  GradientCheck out;
  const std::vector<double> c = term.gradient(w);
  for (std::size_t k = 0; k < n; ++k) out.directional += c[k] * delta[k];
  std::vector<double> plus(n), minus(n);
  out.best_relative_error = std::numeric_limits<double>::infinity();
  for (double h : steps) {
    for (std::size_t k = 0; k < n; ++k) {
      plus[k] = w[k] + h * delta[k];
      minus[k] = w[k] - h * delta[k];
    }
    const double fd = (term.value(plus) - term.value(minus)) / (2.0 * h);
    const double err = std::abs(fd - out.directional) / std::max(std::abs(out.directional), 1e-300);
    out.steps.push_back(h);
    out.central_differences.push_back(fd);
    out.relative_errors.push_back(err);
    out.best_relative_error = std::min(out.best_relative_error, err);
  }
  return out;
}

}  // namespace slip
