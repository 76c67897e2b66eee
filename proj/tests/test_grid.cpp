// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>

#include "podloc/grid.hpp"

using namespace podloc;

TEST_CASE("trapezoidal weights on reference grids") {
  const TimeGrid g1(std::vector<double>{0.0, 0.5, 1.0});
  CHECK(g1.weight(0) == Catch::Approx(0.25).margin(1e-15));
  CHECK(g1.weight(1) == Catch::Approx(0.5).margin(1e-15));
  CHECK(g1.weight(2) == Catch::Approx(0.25).margin(1e-15));

  const TimeGrid g2(std::vector<double>{0.0, 1.0});
  CHECK(g2.weight(0) == Catch::Approx(0.5).margin(1e-15));
  CHECK(g2.weight(1) == Catch::Approx(0.5).margin(1e-15));

  const TimeGrid g3(std::vector<double>{0.0, 0.1, 1.0});
  CHECK(g3.weight(0) == Catch::Approx(0.05).margin(1e-15));
  CHECK(g3.weight(1) == Catch::Approx(0.5).margin(1e-15));
  CHECK(g3.weight(2) == Catch::Approx(0.45).margin(1e-15));
}

TEST_CASE("weights sum to T and integrate affine functions exactly") {
  const TimeGrid g(std::vector<double>{0.0, 0.013, 0.2, 0.21, 0.7, 0.95, 2.0});
  double sum = 0.0;
  for (double w : g.weights()) sum += w;
  CHECK(std::abs(sum - g.T()) < 1e-12);

  // exact for a(t) = 3t - 1: integral over [0,2] is 3*2 - 2 = 4
  dvec vals(g.dof());
  for (int j = 0; j < g.dof(); ++j) vals[j] = 3.0 * g.node(j) - 1.0;
  CHECK(time_quadrature(g, vals) == Catch::Approx(4.0).margin(1e-12));
}

TEST_CASE("bisection inserts midpoints of marked intervals") {
  const TimeGrid g(std::vector<double>{0.0, 1.0});
  const TimeGrid h = g.bisect({1});
  REQUIRE(h.dof() == 3);
  CHECK(h.node(1) == Catch::Approx(0.5).margin(0.0));

  const TimeGrid k = h.bisect({2});
  REQUIRE(k.dof() == 4);
  CHECK(k.node(0) == 0.0);
  CHECK(k.node(1) == 0.5);
  CHECK(k.node(2) == 0.75);
  CHECK(k.node(3) == 1.0);
}

TEST_CASE("bisecting every interval of a uniform grid doubles it") {
  const int n = 8;
  const TimeGrid g = TimeGrid::uniform(1.0, n);
  std::vector<int> all(n);
  for (int j = 0; j < n; ++j) all[j] = j + 1;
  const TimeGrid h = g.bisect(all);
  const TimeGrid ref = TimeGrid::uniform(1.0, 2 * n);
  REQUIRE(h.dof() == ref.dof());
  for (int j = 0; j < h.dof(); ++j)
    CHECK(h.node(j) == Catch::Approx(ref.node(j)).margin(1e-15));
}

TEST_CASE("repeated bisection never duplicates nodes") {
  TimeGrid g = TimeGrid::uniform(1.0, 2);
  for (int round = 0; round < 6; ++round) {
    g = g.bisect({g.intervals()});  // keep splitting the last interval
    for (int j = 1; j < g.dof(); ++j) REQUIRE(g.node(j) > g.node(j - 1));
  }
}

TEST_CASE("invalid grids are rejected") {
  CHECK_THROWS_AS(TimeGrid(std::vector<double>{0.0, 0.5, 0.5, 1.0}),
                  std::invalid_argument);
  CHECK_THROWS_AS(TimeGrid(std::vector<double>{1.0}), std::invalid_argument);
  CHECK_THROWS_AS(SpatialGrid::unit(1), std::invalid_argument);
}

TEST_CASE("spatial grid spacing is exact") {
  for (int nx : {2, 5, 37, 100}) {
    const SpatialGrid g = SpatialGrid::unit(nx);
    CHECK(std::abs(g.h * g.n_x - 1.0) < 1e-14);
    CHECK(g.interior() == nx - 1);
  }
}
