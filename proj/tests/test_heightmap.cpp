#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <vector>

#include "armada/dual.hpp"
#include "armada/heightmap.hpp"

using namespace armada;

TEST_CASE("flat map returns its height everywhere") {
  const HeightMap m = HeightMap::flat(0.25);
  CHECK(m.height_at(0.0, 0.0) == 0.25);
  CHECK(m.height_at(-100.0, 42.0) == 0.25);
  CHECK(!m.is_grid());
}

TEST_CASE("plane map is exact and has a constant analytic gradient") {
  const HeightMap m = HeightMap::plane(0.1, 0.2, -0.3);
  CHECK(m.height_at(1.0, 2.0) == doctest::Approx(0.1 + 0.2 - 0.6).epsilon(1e-15));

  Dual<2> x(1.3), y(-0.7);
  x.d[0] = 1.0;
  y.d[1] = 1.0;
  const Dual<2> z = m.height(x, y);
  CHECK(z.v == doctest::Approx(0.1 + 0.2 * 1.3 + 0.3 * 0.7).epsilon(1e-15));
  CHECK(z.d[0] == doctest::Approx(0.2).epsilon(1e-15));
  CHECK(z.d[1] == doctest::Approx(-0.3).epsilon(1e-15));
}

TEST_CASE("grid map interpolates bilinearly between corners") {
  // 2x2 cells (3x3 corners), cell 1.0, origin (0,0). Row-major along y.
  const std::vector<double> h = {0.0, 1.0, 2.0,   // y = 0
                                 1.0, 2.0, 3.0,   // y = 1
                                 2.0, 3.0, 4.0};  // y = 2
  const HeightMap m = HeightMap::grid({0.0, 0.0}, 1.0, 3, 3, h);

  CHECK(m.is_grid());
  // Exact at corners.
  CHECK(m.height_at(0.0, 0.0) == doctest::Approx(0.0));
  CHECK(m.height_at(2.0, 0.0) == doctest::Approx(2.0));
  CHECK(m.height_at(1.0, 2.0) == doctest::Approx(3.0));
  // Bilinear in the cell interior: this sheet is the plane x + y.
  CHECK(m.height_at(0.5, 0.5) == doctest::Approx(1.0));
  CHECK(m.height_at(1.25, 0.75) == doctest::Approx(2.0));
}

TEST_CASE("grid gradient from dual numbers matches central differences") {
  const std::vector<double> h = {0.0, 0.4, 0.1, 0.9, 0.3, 0.7, 0.2, 0.5, 0.8};
  const HeightMap m = HeightMap::grid({-1.0, -1.0}, 1.0, 3, 3, h);
  const double step = 1e-6;
  for (double x : {-0.6, -0.2, 0.4}) {
    for (double y : {-0.7, 0.1, 0.6}) {
      Dual<2> dx(x), dy(y);
      dx.d[0] = 1.0;
      dy.d[1] = 1.0;
      const Dual<2> z = m.height(dx, dy);
      const double gx = (m.height_at(x + step, y) - m.height_at(x - step, y)) / (2.0 * step);
      const double gy = (m.height_at(x, y + step) - m.height_at(x, y - step)) / (2.0 * step);
      CHECK(std::abs(z.d[0] - gx) < 1e-9);
      CHECK(std::abs(z.d[1] - gy) < 1e-9);
      CHECK(z.v == doctest::Approx(m.height_at(x, y)).epsilon(1e-12));
    }
  }
}

TEST_CASE("grid queries beyond the bounds throw, the clamped path extends edges") {
  const std::vector<double> h = {0.0, 1.0, 1.0, 2.0};
  const HeightMap m = HeightMap::grid({0.0, 0.0}, 1.0, 2, 2, h);
  CHECK_THROWS(m.height_at(-0.1, 0.5));
  CHECK_THROWS(m.height_at(0.5, 1.2));
  // The templated path clamps instead of throwing so line searches that probe
  // beyond the edge stay finite.
  CHECK(m.height(-5.0, 0.0) == doctest::Approx(m.height_at(0.0, 0.0)));
  CHECK(m.height(5.0, 5.0) == doctest::Approx(m.height_at(1.0, 1.0)));
}

TEST_CASE("grid construction validates its dimensions") {
  CHECK_THROWS(HeightMap::grid({0.0, 0.0}, 1.0, 3, 3, {1.0, 2.0}));
  CHECK_THROWS(HeightMap::grid({0.0, 0.0}, -1.0, 2, 2, {1.0, 2.0, 3.0, 4.0}));
  CHECK_THROWS(HeightMap::grid({0.0, 0.0}, 1.0, 1, 2, {1.0, 2.0}));
}
