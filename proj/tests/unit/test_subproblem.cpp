#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "slip/error.hpp"
#include "slip/subproblem.hpp"

using namespace slip;

namespace {

TRInstance make(int nx, int ny, std::vector<int> labels, std::vector<int> vbar, std::vector<double> c, double delta,
                double alpha) {
  const GridSpec g(nx, ny);
  return TRInstance{ControlField(g, LabelSet(std::move(labels)), std::move(vbar)), GradientField{g, std::move(c)},
                    delta, alpha};
}

TRInstance random_instance(std::mt19937_64& rng) {
  const int nx = 1 + static_cast<int>(rng() % 3), ny = 1 + static_cast<int>(rng() % 3);
  const std::vector<std::vector<int>> sets = {{0}, {0, 1}, {-1, 2}, {0, 1, 2}, {0, 2, 5}};
  const auto& labels = sets[rng() % sets.size()];
  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<int> vbar;
  std::vector<double> c;
  for (int p = 0; p < nx * ny; ++p) {
    vbar.push_back(labels[rng() % labels.size()]);
    c.push_back(u(rng));
  }
  const double span = labels.back() - labels.front();
  const double deltas[] = {0.0, 0.1, 0.5, span};
  const double alphas[] = {0.0, 1e-4, 1e-1};
  return make(nx, ny, labels, vbar, c, deltas[rng() % 4], alphas[rng() % 3]);
}

}  // namespace

TEST_CASE("model sizes") {
  const auto one = build_ip(make(1, 1, {0, 1, 2}, {0}, {-1}, 3, 0));
  CHECK(one.num_integer() == 1);
  CHECK(one.num_continuous() == 1);
  const auto four = build_ip(make(2, 2, {0, 1}, {0, 0, 0, 0}, {1, 1, 1, 1}, 1, 0.1));
  CHECK(four.num_integer() == 4);
  CHECK(four.num_continuous() == 8);
  std::ostringstream lp;
  write_lp(lp, four);
  CHECK(lp.str().find("Minimize") != std::string::npos);
  CHECK(lp.str().find("General") != std::string::npos);
}

TEST_CASE("zero radius keeps vbar") {
  const auto inst = make(2, 2, {0, 1, 2}, {0, 2, 1, 0}, {-1, 0.5, -0.2, 0.3}, 0.0, 1e-4);
  for (const auto& sol : {solve_exhaustive(inst), solve_bnb(inst)}) {
    CHECK(sol.v_opt == inst.vbar);
    CHECK(sol.objective == 0.0);
  }
  CHECK(solve_bnb(inst).nodes == 1);
}

TEST_CASE("single cell moves to the top label") {
  const auto inst = make(1, 1, {0, 1, 2}, {0}, {-1}, 3, 0);
  const auto ex = solve_exhaustive(inst);
  CHECK(ex.v_opt[0] == 2);
  CHECK(ex.objective == doctest::Approx(-2.0));
  CHECK(solve_bnb(inst).objective == doctest::Approx(-2.0));
  CHECK(pred(inst, ex.v_opt) == doctest::Approx(2.0));
  CHECK(pred(inst, inst.vbar) == 0.0);
}

TEST_CASE("flip only the negative cell") {
  const auto inst = make(2, 2, {0, 1}, {0, 0, 0, 0}, {1, 1, -1, 1}, 0.25, 1e-4);
  const auto ex = solve_exhaustive(inst);
  CHECK(ex.v_opt == ControlField(GridSpec(2, 2), LabelSet({0, 1}), {0, 0, 1, 0}));
  CHECK(ex.objective == doctest::Approx(-1.0 + 1e-4).epsilon(1e-14));
  CHECK(solve_bnb(inst).objective == doctest::Approx(ex.objective).epsilon(1e-14));
}

TEST_CASE("positive costs at the bottom label keep vbar") {
  const auto inst = make(3, 2, {0, 1, 2}, {0, 0, 0, 0, 0, 0}, {0.1, 0.2, 0.3, 0.4, 0.5, 0.6}, 1.0, 1e-2);
  const auto sol = solve_bnb(inst);
  CHECK(sol.v_opt == inst.vbar);
  CHECK(sol.objective == 0.0);
}

TEST_CASE("branch and bound agrees with enumeration") {
  std::mt19937_64 rng(101);
  for (int t = 0; t < 300; ++t) {
    const auto inst = random_instance(rng);
    const auto ex = solve_exhaustive(inst);
    const auto bb = solve_bnb(inst);
    REQUIRE(bb.status == IPStatus::optimal);
    CHECK(std::abs(ex.objective - bb.objective) <= 1e-9);
    CHECK(bb.objective <= 0.0);
    CHECK(tr_feasible(inst, bb.v_opt));
    CHECK(tr_objective(inst, bb.v_opt) == doctest::Approx(bb.objective).epsilon(1e-12).scale(1.0));
    CHECK(pred(inst, bb.v_opt) >= 0.0);
  }
}

TEST_CASE("optimum is nonincreasing in the radius") {
  std::mt19937_64 rng(55);
  for (int t = 0; t < 40; ++t) {
    auto inst = random_instance(rng);
    double prev = 0.0;
    for (double d : {0.0, 0.05, 0.1, 0.25, 0.5, 1.0, 2.0, 5.0}) {
      inst.delta = d;
      const double obj = solve_bnb(inst).objective;
      CHECK(obj <= prev + 1e-12);
      prev = obj;
    }
  }
}

TEST_CASE("node limit is a status") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<double> c;
  for (int p = 0; p < 9; ++p) c.push_back(u(rng));
  const auto inst = make(3, 3, {0, 1, 2}, std::vector<int>(9, 1), c, 0.5, 0.1);
  BnbOptions opt;
  opt.node_limit = 1;
  const auto sol = solve_bnb(inst, opt);
  if (sol.status == IPStatus::node_limit) {
    CHECK(tr_feasible(inst, sol.v_opt));
  } else {
    CHECK(sol.objective == doctest::Approx(solve_exhaustive(inst).objective));
  }
}

TEST_CASE("thread count does not change the answer") {
  std::mt19937_64 rng(77);
  for (int t = 0; t < 30; ++t) {
    const auto inst = random_instance(rng);
    const auto one = solve_bnb(inst, BnbOptions{100000, 1});
    const auto four = solve_bnb(inst, BnbOptions{100000, 4});
    CHECK(one.v_opt == four.v_opt);
    CHECK(one.objective == four.objective);
    CHECK(one.nodes == four.nodes);
  }
}

TEST_CASE("exhaustive guard and infeasible pred") {
  const auto big = make(4, 4, {0, 1, 2}, std::vector<int>(16, 0), std::vector<double>(16, 0.0), 1.0, 0.0);
  CHECK_THROWS_AS(solve_exhaustive(big), UsageError);
  const auto inst = make(1, 2, {0, 1, 2}, {0, 0}, {-1, -1}, 0.5, 0.0);
  CHECK_THROWS_AS(pred(inst, ControlField(GridSpec(1, 2), LabelSet({0, 1, 2}), 2)), UsageError);
}

TEST_CASE("instance text round trip") {
  std::mt19937_64 rng(4);
  const auto inst = random_instance(rng);
  std::stringstream ss;
  write_instance(ss, inst);
  const auto back = read_instance(ss);
  CHECK(back.vbar == inst.vbar);
  CHECK(back.c.values == inst.c.values);
  CHECK(back.delta == inst.delta);
  CHECK(back.alpha == inst.alpha);
  std::istringstream bad("2 2 1 1\n0 1\n");
  CHECK_THROWS_AS(read_instance(bad), ConfigError);
}
