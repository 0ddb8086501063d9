#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "slip/control.hpp"
#include "slip/error.hpp"

using namespace slip;

namespace {

ControlField checkerboard() { return ControlField(GridSpec(2, 2), LabelSet({0, 1}), {0, 1, 1, 0}); }

ControlField random_field(std::mt19937_64& rng, int nx, int ny, const std::vector<int>& labels) {
  std::vector<int> v(static_cast<std::size_t>(nx * ny));
  for (auto& x : v) x = labels[rng() % labels.size()];
  return ControlField(GridSpec(nx, ny), LabelSet(labels), v);
}

// TV by scanning every cell against its right and upper neighbours.
double tv_by_scan(const ControlField& v) {
  const GridSpec& g = v.grid();
  double s = 0;
  for (int j = 0; j < g.ny(); ++j) {
    for (int i = 0; i < g.nx(); ++i) {
      if (i + 1 < g.nx()) s += g.hy() * std::abs(v.at(i, j) - v.at(i + 1, j));
      if (j + 1 < g.ny()) s += g.hx() * std::abs(v.at(i, j) - v.at(i, j + 1));
    }
  }
  return s;
}

}  // namespace

TEST_CASE("label set") {
  const LabelSet v({2, 0, 5});
  CHECK(v.values() == std::vector<int>{0, 2, 5});
  CHECK(v.floor(3.5) == 2);
  CHECK(v.ceil(3.5) == 5);
  CHECK_FALSE(v.floor(-0.5).has_value());
  CHECK(v.index_of(5) == 2u);
  CHECK_THROWS_AS(LabelSet({1, 1}), UsageError);
  CHECK_THROWS_AS(LabelSet(std::vector<int>{}), UsageError);
  CHECK_THROWS_AS(ControlField(GridSpec(1, 1), LabelSet({0, 1}), 3), UsageError);
}

TEST_CASE("tv examples") {
  CHECK(tv(ControlField(GridSpec(5, 3), LabelSet({0, 1}), 1)) == 0.0);
  CHECK(tv(checkerboard()) == doctest::Approx(2.0));
  ControlField spot(GridSpec(4, 4), LabelSet({0, 1, 2}), 0);
  spot.set(spot.grid().index(1, 2), 2);
  CHECK(tv(spot) == doctest::Approx(2.0));
}

TEST_CASE("pairwise interfaces examples") {
  const auto flat = pairwise_interfaces(ControlField(GridSpec(3, 3), LabelSet({0, 1, 2}), 1));
  for (const auto& [key, m] : flat) CHECK(m == 0.0);

  const auto cb = pairwise_interfaces(checkerboard());
  REQUIRE(cb.size() == 1);
  CHECK(cb.at({0, 1}) == doctest::Approx(2.0));

  const auto stripes = pairwise_interfaces(ControlField(GridSpec(3, 1), LabelSet({0, 1, 2}), {0, 1, 2}));
  CHECK(stripes.at({0, 1}) == doctest::Approx(1.0));
  CHECK(stripes.at({1, 2}) == doctest::Approx(1.0));
  CHECK(stripes.at({0, 2}) == 0.0);
}

TEST_CASE("l1 distance examples and metric axioms") {
  const ControlField z(GridSpec(2, 2), LabelSet({0, 1, 2}), 0);
  CHECK(l1_dist(z, z) == 0.0);
  ControlField one = z;
  one.set(3, 1);
  CHECK(l1_dist(z, one) == doctest::Approx(0.25));
  CHECK(l1_dist(z, ControlField(GridSpec(2, 2), LabelSet({0, 1, 2}), 2)) == doctest::Approx(2.0));

  std::mt19937_64 rng(11);
  for (int k = 0; k < 100; ++k) {
    const auto a = random_field(rng, 5, 4, {0, 1, 2});
    const auto b = random_field(rng, 5, 4, {0, 1, 2});
    const auto c = random_field(rng, 5, 4, {0, 1, 2});
    CHECK(l1_dist(a, b) == l1_dist(b, a));
    CHECK((l1_dist(a, b) == 0.0) == (a == b));
    CHECK(l1_dist(a, c) <= l1_dist(a, b) + l1_dist(b, c) + 1e-15);
  }
}

TEST_CASE("perimeter lower bound") {
  CHECK(perimeter_lower_bound_check(ControlField(GridSpec(3, 3), LabelSet({0, 1}), 0)));
  const auto per = level_set_perimeters(checkerboard());
  CHECK(per[0] == doctest::Approx(2.0));
  CHECK(per[1] == doctest::Approx(2.0));
  CHECK(perimeter_lower_bound_check(checkerboard()));
  std::mt19937_64 rng(3);
  for (int k = 0; k < 100; ++k) CHECK(perimeter_lower_bound_check(random_field(rng, 8, 8, {0, 1, 2})));
}

TEST_CASE("tv identities on random fields") {
  std::mt19937_64 rng(5);
  for (int k = 0; k < 100; ++k) {
    const auto v = random_field(rng, 8, 8, {0, 1, 2});
    CHECK(tv(v) == tv_from_interfaces(v.labels(), pairwise_interfaces(v)));
    CHECK(tv(v) == doctest::Approx(tv_by_scan(v)).epsilon(1e-13));
    std::vector<int> shifted(v.values().begin(), v.values().end());
    for (auto& x : shifted) x += 7;
    CHECK(tv(ControlField(v.grid(), LabelSet({7, 8, 9}), shifted)) == tv(v));
  }
}

TEST_CASE("control csv round trip") {
  std::mt19937_64 rng(9);
  const auto v = random_field(rng, 6, 3, {-1, 0, 4});
  std::stringstream ss;
  write_csv(ss, v);
  CHECK(read_csv(ss, v.labels()) == v);
  std::istringstream bad("2,2,1,1\n0,1\n0,3\n");
  CHECK_THROWS_AS(read_csv(bad, LabelSet({0, 1})), ConfigError);
}

TEST_CASE("pgm header") {
  std::ostringstream out;
  write_pgm(out, checkerboard());
  std::istringstream in(out.str());
  std::string magic;
  int w = 0, h = 0, maxv = 0;
  in >> magic >> w >> h >> maxv;
  CHECK(magic == "P2");
  CHECK(w == 2);
  CHECK(h == 2);
  CHECK(maxv == 255);
}
