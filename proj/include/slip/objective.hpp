#pragma once

#include <memory>
#include <span>
#include <vector>

#include "slip/control.hpp"
#include "slip/grid.hpp"
#include "slip/pde.hpp"

namespace slip {

// Cell-integrated gradient c_P of the smooth part of the objective.
struct GradientField {
  GridSpec grid;
  std::vector<double> values;
};

// Smooth part F of the objective, evaluated on real-valued cellwise controls so that
// finite-difference checks can use non-integer directions.
class SmoothTerm {
 public:
  virtual ~SmoothTerm() = default;
  virtual const GridSpec& control_grid() const = 0;
  virtual double value(std::span<const double> w) const = 0;
  virtual std::vector<double> gradient(std::span<const double> w) const = 0;
};

// F(w) = 1/2 sum_k m_k (y_k - yd_k)^2 with y = S w, trapezoid weights m_k on the nodes.
class TrackingTerm final : public SmoothTerm {
 public:
  TrackingTerm(const PdeSetup& pde, GridSpec control_grid, ScalarField y_d);

  const GridSpec& control_grid() const override { return control_grid_; }
  double value(std::span<const double> w) const override;
  // c = P^T D p with A^T p = M (y - y_d): the exact transpose of the discrete map.
  std::vector<double> gradient(std::span<const double> w) const override;

  ScalarField state(std::span<const double> w) const;
  const LinearSystem& system() const { return system_; }
  const ScalarField& target() const { return y_d_; }
  std::span<const double> quadrature_weights() const { return mass_; }

 private:
  LinearSystem system_;
  GridSpec control_grid_;
  ScalarField y_d_;
  std::vector<int> node_cell_;
  std::vector<double> mass_;
};

// F(w) = sum_P c_P w_P + offset. Zero curvature, so ared == pred.
class LinearTerm final : public SmoothTerm {
 public:
  LinearTerm(GridSpec control_grid, std::vector<double> c, double offset = 0.0);

  const GridSpec& control_grid() const override { return grid_; }
  double value(std::span<const double> w) const override;
  std::vector<double> gradient(std::span<const double>) const override { return c_; }

 private:
  GridSpec grid_;
  std::vector<double> c_;
  double offset_;
};

struct Problem {
  std::shared_ptr<const SmoothTerm> smooth;
  double alpha = 0.0;
  LabelSet labels{{0, 1}};

  const GridSpec& control_grid() const { return smooth->control_grid(); }
};

Problem make_tracking_problem(const PdeSetup& pde, GridSpec control_grid, ScalarField y_d, double alpha,
                              LabelSet labels);

// y_d = S w for a reference control.
ScalarField target_from_control(const PdeSetup& pde, const ControlField& reference);

double f_value(const Problem& prob, const ControlField& v);
GradientField gradient(const Problem& prob, const ControlField& v);
double j_value(const Problem& prob, const ControlField& v);

struct GradientCheck {
  double directional = 0.0;  // <c, delta>
  std::vector<double> steps;
  std::vector<double> central_differences;
  std::vector<double> relative_errors;
  double best_relative_error = 0.0;
};

// Central differences of F along delta at the real control w, compared with <grad F(w), delta>.
GradientCheck check_gradient(const SmoothTerm& term, std::span<const double> w, std::span<const double> delta,
                             const std::vector<double>& steps = {1e-3, 1e-4, 1e-5});

}  // namespace slip
