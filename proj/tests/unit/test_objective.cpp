#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "slip/objective.hpp"

using namespace slip;

namespace {

PdeSetup model_setup(int n, double peclet_limit = 1.0) {
  PdeSetup s;
  s.b = {std::cos(std::numbers::pi / 32), std::sin(std::numbers::pi / 32)};
  s.state_grid = GridSpec(n, n);
  s.peclet_limit = peclet_limit;
  return s;
}

ControlField random_control(std::mt19937_64& rng, const GridSpec& g, const LabelSet& labels) {
  std::vector<int> v(static_cast<std::size_t>(g.num_cells()));
  for (auto& x : v) x = labels[rng() % labels.size()];
  return ControlField(g, labels, v);
}

}  // namespace

TEST_CASE("exact fit and zero data") {
  const PdeSetup pde = model_setup(64);
  const LabelSet labels({0, 1, 2});
  std::mt19937_64 rng(8);
  const auto ref = random_control(rng, GridSpec(16, 16), labels);
  const Problem fit = make_tracking_problem(pde, ref.grid(), target_from_control(pde, ref), 1e-4, labels);
  CHECK(f_value(fit, ref) == 0.0);
  for (double c : gradient(fit, ref).values) CHECK(c == 0.0);

  const Problem zero = make_tracking_problem(pde, GridSpec(16, 16), ScalarField::zeros(pde.state_grid), 0.0, labels);
  CHECK(f_value(zero, ControlField(GridSpec(16, 16), labels, 0)) == 0.0);

  const ControlField flat(GridSpec(16, 16), labels, 2);
  const Problem flat_fit = make_tracking_problem(pde, flat.grid(), target_from_control(pde, flat), 1e-4, labels);
  CHECK(j_value(flat_fit, flat) == 0.0);
}

TEST_CASE("j adds alpha times tv") {
  const PdeSetup pde = model_setup(64);
  const LabelSet labels({0, 1});
  const ControlField cb(GridSpec(2, 2), labels, {0, 1, 1, 0});
  const ScalarField yd = target_from_control(pde, ControlField(GridSpec(2, 2), labels, 1));
  const Problem p0 = make_tracking_problem(pde, cb.grid(), yd, 0.0, labels);
  CHECK(j_value(p0, cb) == f_value(p0, cb));
  const Problem p = make_tracking_problem(pde, cb.grid(), yd, 1e-4, labels);
  CHECK(f_value(p, cb) > 0.0);
  CHECK(j_value(p, cb) == doctest::Approx(f_value(p, cb) + 2e-4).epsilon(1e-14));
  CHECK(j_value(p, cb) >= f_value(p, cb));
}

TEST_CASE("gradient against coordinate differences") {
  // F is quadratic, so (F(w + e_P) - F(w - e_P)) / 2 is its exact partial derivative.
  const PdeSetup pde = model_setup(32, 1.5);
  const GridSpec cg(4, 4);
  const LabelSet labels({0, 1, 2});
  std::mt19937_64 rng(12);
  const ScalarField yd = target_from_control(pde, random_control(rng, cg, labels));
  const TrackingTerm term(pde, cg, yd);
  const auto v = random_control(rng, cg, labels);
  std::vector<double> w = v.as_real();
  const auto c = term.gradient(w);
  for (int p = 0; p < cg.num_cells(); ++p) {
    auto plus = w, minus = w;
    plus[p] += 1.0;
    minus[p] -= 1.0;
    const double d = (term.value(plus) - term.value(minus)) / 2.0;
    CHECK(std::abs(d - c[p]) <= 1e-10 * std::max(1e-8, std::abs(c[p])) + 1e-15);
  }
}

TEST_CASE("directional derivative matches central differences") {
  const PdeSetup pde = model_setup(32, 1.5);
  const GridSpec cg(16, 16);
  const LabelSet labels({0, 1, 2});
  std::mt19937_64 rng(21);
  const TrackingTerm term(pde, cg, target_from_control(pde, random_control(rng, cg, labels)));
  std::uniform_real_distribution<double> u(-1, 1);
  for (int t = 0; t < 20; ++t) {
    const auto w = random_control(rng, cg, labels).as_real();
    std::vector<double> d(w.size());
    for (auto& x : d) x = u(rng);
    const auto chk = check_gradient(term, w, d);
    CHECK(chk.relative_errors.size() == 3);
    CHECK(chk.best_relative_error <= 1e-6);
  }
}

TEST_CASE("F is quadratic along a line") {
  const PdeSetup pde = model_setup(64);
  const GridSpec cg(16, 16);
  const LabelSet labels({0, 1, 2});
  std::mt19937_64 rng(5);
  const TrackingTerm term(pde, cg, target_from_control(pde, random_control(rng, cg, labels)));
  const auto w = random_control(rng, cg, labels).as_real();
  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<double> d(w.size());
  for (auto& x : d) x = u(rng);
  auto at = [&](double t) {
    std::vector<double> x(w.size());
    for (std::size_t k = 0; k < w.size(); ++k) x[k] = w[k] + t * d[k];
    return term.value(x);
  };
  const double f0 = at(0), f1 = at(1), f2 = at(2), f3 = at(3.5);
  // Lagrange interpolant through t = 0, 1, 2 evaluated at 3.5
  const double t = 3.5;
  const double q = f0 * (t - 1) * (t - 2) / 2 - f1 * t * (t - 2) + f2 * t * (t - 1) / 2;
  CHECK(std::abs(q - f3) <= 1e-9 * std::abs(f3));
}

TEST_CASE("gradient is symmetric for symmetric data without advection") {
  PdeSetup pde;
  pde.state_grid = GridSpec(12, 9);
  const GridSpec cg(4, 4);
  const LabelSet labels({0, 1, 2});
  // symmetric under row j -> 3 - j
  const ControlField ref(cg, labels, {0, 2, 1, 0, 1, 1, 0, 2, 1, 1, 0, 2, 0, 2, 1, 0});
  const ControlField v(cg, labels, {1, 0, 0, 2, 2, 1, 1, 0, 2, 1, 1, 0, 1, 0, 0, 2});
  const Problem prob = make_tracking_problem(pde, cg, target_from_control(pde, ref), 1e-4, labels);
  const auto c = gradient(prob, v).values;
  for (int j = 0; j < 4; ++j) {
    for (int i = 0; i < 4; ++i) CHECK(std::abs(c[cg.index(i, j)] - c[cg.index(i, 3 - j)]) <= 1e-10);
  }
}

TEST_CASE("linear term") {
  const GridSpec g(2, 1);
  const LinearTerm term(g, {1.5, -2.0}, 0.25);
  const std::vector<double> w{2.0, 1.0};
  CHECK(term.value(w) == 1.25);
  CHECK(term.gradient(w) == std::vector<double>{1.5, -2.0});
}
