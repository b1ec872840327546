#include <doctest.h>

#include <numbers>

#include "dht/grids.hpp"

using namespace dht;

TEST_CASE("grid hierarchy sizes") {
  auto g = buildGridHierarchy(60, 30, 0.2, 0.1);
  CHECK(g.fine.nx == 1200);
  CHECK(g.fine.ny == 600);
  CHECK(g.fineScale == 20);
  CHECK(g.wavelength == doctest::Approx(2.0));
  CHECK(g.inter.h == doctest::Approx(0.2));
  CHECK(g.interFine.h == doctest::Approx(0.1));
  CHECK(g.fine.h == doctest::Approx(0.05));
  CHECK(g.coarse.h >= g.inter.h);

  g = buildGridHierarchy(60, 30, 0.1, 0.1);
  CHECK(g.fine.nx == 2400);
  CHECK(g.fine.ny == 1200);

  g = buildGridHierarchy(2, 2, 2.0, 1.0);
  CHECK(g.wavelength == doctest::Approx(2.0));
  CHECK(g.fine.h == doctest::Approx(0.05));
  CHECK(g.fine.nx == 40);
  CHECK(g.fine.ny == 40);
  for (const Grid* gr : {&g.inter, &g.interFine, &g.fine}) {
    CHECK(gr->lengthX() == doctest::Approx(2.0));
    CHECK(gr->lengthY() == doctest::Approx(2.0));
  }
}

TEST_CASE("grid hierarchy rejects bad input") {
  CHECK_THROWS_AS(buildGridHierarchy(1, 30, 0.2, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(buildGridHierarchy(60, 30, -0.2, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(buildGridHierarchy(60, 30, 0.2, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(buildGridHierarchy(10, 4, 1.0, 0.1), std::invalid_argument);
}

TEST_CASE("interpolation reproduces constants and ramps") {
  const auto g = buildGridHierarchy(8, 6, 0.2, 0.1);
  const Grid* grids[] = {&g.coarse, &g.inter, &g.interFine, &g.fine};
  for (const Grid* a : grids)
    for (const Grid* b : grids)
      for (Interp m : {Interp::Linear, Interp::Cubic}) {
        const Field c = Field::Constant(a->ny, a->nx, 0.37);
        const Field r = interpolate<double>(c, *a, *b, m);
        CHECK((r - 0.37).abs().maxCoeff() <= 1e-14);
      }
  // linear ramp inside the span of source centres
  const Field X = g.coarse.xCoords();
  const Field r = interpolate<double>(X, g.coarse, g.inter, Interp::Linear);
  const Field Xi = g.inter.xCoords();
  for (int ix = 0; ix < g.inter.nx; ++ix)
    if (Xi(0, ix) >= 0.5 && Xi(0, ix) <= 7.5) CHECK(r(0, ix) == doctest::Approx(Xi(0, ix)).epsilon(1e-12));
}

TEST_CASE("cubic interpolation of a cubic") {
  Grid src{10, 1, 1.0}, dst{20, 1, 0.5};
  Field f(1, 10);
  for (int i = 0; i < 10; ++i) f(0, i) = std::pow(src.x(i), 3) / 100.0;
  const Field r = interpolate<double>(f, src, dst, Interp::Cubic);
  // midpoint between source centres 4.5 and 5.5 lies at dst centre 5.25 / 4.75 pairs; check interior points
  for (int i = 4; i < 16; ++i) CHECK(r(0, i) == doctest::Approx(std::pow(dst.x(i), 3) / 100.0).epsilon(1e-6));
}

TEST_CASE("complex interpolation is componentwise") {
  Grid a{4, 4, 1.0}, b{8, 8, 0.5};
  ComplexField c(4, 4);
  Field re(4, 4), im(4, 4);
  for (int i = 0; i < 16; ++i) {
    re(i) = std::sin(i);
    im(i) = std::cos(3 * i);
    c(i) = {re(i), im(i)};
  }
  const ComplexField r = interpolate<std::complex<double>>(c, a, b, Interp::Cubic);
  CHECK((r.real() - interpolate<double>(re, a, b, Interp::Cubic)).abs().maxCoeff() <= 1e-14);
  CHECK((r.imag() - interpolate<double>(im, a, b, Interp::Cubic)).abs().maxCoeff() <= 1e-14);
}

TEST_CASE("orientation interpolation") {
  Grid a{2, 1, 1.0}, b{4, 1, 0.5};
  Orientation n{Field::Constant(1, 2, 1.0), Field::Zero(1, 2)};
  Orientation r = interpolateOrientation(n, a, b);
  CHECK((r.nx - 1.0).abs().maxCoeff() <= 1e-12);

  n.nx << 1.0, -1.0;
  r = interpolateOrientation(n, a, b);
  for (int i = 0; i < 4; ++i) {
    CHECK(std::abs(r.nx(0, i)) == doctest::Approx(1.0));
    CHECK(std::abs(r.ny(0, i)) <= 1e-12);
  }

  // smoothly rotating field a(x) = x pi / 8; a 2h grid puts every target at a midpoint
  Grid s{4, 1, 1.0}, d{2, 1, 2.0};
  Orientation rot{Field(1, 4), Field(1, 4)};
  for (int i = 0; i < 4; ++i) {
    rot.nx(0, i) = std::cos(s.x(i) * std::numbers::pi / 8);
    rot.ny(0, i) = std::sin(s.x(i) * std::numbers::pi / 8);
  }
  r = interpolateOrientation(rot, s, d);
  for (int i = 0; i < 2; ++i) {
    CHECK(std::hypot(r.nx(0, i), r.ny(0, i)) == doctest::Approx(1.0).epsilon(1e-12));
    const double ang = std::atan2(r.ny(0, i), r.nx(0, i));
    CHECK(std::abs(ang - d.x(i) * std::numbers::pi / 8) <= 1e-3);
  }
}

TEST_CASE("bilinear sampling uses physical y up") {
  Grid g{2, 2, 1.0};
  Field f(2, 2);
  f << 1, 1, 0, 0;  // top row 1
  CHECK(sampleBilinear(f, g, 1.0, 1.5) == doctest::Approx(1.0));
  CHECK(sampleBilinear(f, g, 1.0, 0.5) == doctest::Approx(0.0));
  CHECK(sampleBilinear(f, g, 1.0, 1.0) == doctest::Approx(0.5));
}

TEST_CASE("island removal") {
  Field f = Field::Zero(10, 10);
  f.block(1, 1, 4, 4) = 1;
  Field r = removeIslands(f, 0.1);
  CHECK((r == f).all());

  Field g = f;
  g(8, 8) = g(8, 7) = g(7, 8) = 1;
  r = removeIslands(g, 0.1);
  CHECK((r == f).all());
  CHECK((removeIslands(r, 0.1) == r).all());

  // two equal blobs; only the one touching the kept region survives besides the largest
  Field two = Field::Zero(10, 10);
  two.block(0, 0, 3, 3) = 1;
  two.block(6, 6, 3, 3) = 1;
  Mask keep = Mask::Constant(10, 10, false);
  keep(8, 8) = true;
  r = removeIslands(two, 0.1, keep);
  CHECK(r.block(6, 6, 3, 3).minCoeff() == 1.0);
  CHECK(r.sum() >= 9);

  CHECK(removeIslands(Field::Zero(5, 5), 0.1).sum() == 0.0);
}

TEST_CASE("component labelling") {
  Mask m = Mask::Constant(3, 3, false);
  m(0, 0) = m(1, 1) = true;
  int n4 = 0, n8 = 0;
  labelComponents(m, 4, &n4);
  labelComponents(m, 8, &n8);
  CHECK(n4 == 2);
  CHECK(n8 == 1);
}
