#include <doctest.h>

#include <numbers>

#include "dht/dehom.hpp"
#include "synthetic.hpp"

using namespace dht;

namespace {

std::vector<Eigen::MatrixXd> uniformNormals(Eigen::Index ne, int L) {
  std::vector<Eigen::MatrixXd> N;
  for (int i = 0; i < L; ++i) {
    Eigen::MatrixXd n = Eigen::MatrixXd::Zero(ne, 2);
    n.col(i % 2).setOnes();
    N.push_back(n);
  }
  return N;
}

Mask discMask(int n, double r) {
  Mask m(n, n);
  for (int ix = 0; ix < n; ++ix)
    for (int iy = 0; iy < n; ++iy) m(iy, ix) = std::hypot(ix + 0.5 - n / 2.0, iy + 0.5 - n / 2.0) <= r;
  return m;
}

}  // namespace

TEST_CASE("layer indicators") {
  const auto g = buildGridHierarchy(8, 8, 0.2, 0.1);
  auto ind = layerIndicators(Eigen::MatrixXd::Ones(64, 2), 0.1, g);
  CHECK(ind.combinedCoarse.minCoeff() == 1.0);
  CHECK(ind.combinedInter.minCoeff() == 1.0);
  ind = layerIndicators(Eigen::MatrixXd::Zero(64, 2), 0.1, g);
  CHECK(ind.combinedCoarse.maxCoeff() == 0.0);
  CHECK(ind.inter[1].maxCoeff() == 0.0);

  // half-plane: the 0.5 level stays within one coarse cell of the interface
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(64, 1);
  w.topRows(32).setConstant(0.5);  // columns 0..3
  ind = layerIndicators(w, 0.1, g);
  for (int ix = 0; ix < g.inter.nx; ++ix) {
    const double x = g.inter.x(ix), v = ind.inter[0](0, ix);
    if (x < 3.0) CHECK(v > 0.5);
    if (x > 5.0) CHECK(v < 0.5);
  }
}

TEST_CASE("full solid and full void") {
  const auto g = buildGridHierarchy(8, 8, 0.4, 0.1);
  auto r = dehomogenise(Eigen::MatrixXd::Ones(64, 2), uniformNormals(64, 2), 0.1, g);
  CHECK(r.rho.minCoeff() == 1.0);
  CHECK(r.volume == 1.0);
  r = dehomogenise(Eigen::MatrixXd::Zero(64, 2), uniformNormals(64, 2), 0.1, g);
  CHECK(r.rho.maxCoeff() == 0.0);
  CHECK(r.volume == 0.0);
}

TEST_CASE("full solid has no boundary") {
  const auto g = buildGridHierarchy(8, 8, 0.2, 0.1);
  const Eigen::MatrixXd w = Eigen::MatrixXd::Constant(64, 2, 0.3);
  const auto N = uniformNormals(64, 2);
  const auto ind = layerIndicators(w, 0.1, g);
  std::vector<Field> wf(2, Field::Constant(g.fine.ny, g.fine.nx, 0.3));
  const auto b = addBoundary(g, wf, 0.1, ind, N);
  CHECK(b.kernels.count() == 0);
  CHECK(b.domain.minCoeff() == 1.0);
  CHECK(b.shell.maxCoeff() == 0.0);
}

TEST_CASE("solid disc gets a ring of boundary kernels and a closed shell") {
  const int n = 24;
  const auto g = buildGridHierarchy(n, n, 0.4, 0.1);
  const Mask disc = discMask(n, 8.0);
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n * n, 1);
  for (int e = 0; e < n * n; ++e)
    if (disc(e)) w(e, 0) = 0.1;
  const auto ind = layerIndicators(w, 0.1, g);
  const std::vector<Field> wf(1, Field::Constant(g.fine.ny, g.fine.nx, 0.1));
  const auto b = addBoundary(g, wf, 0.1, ind, uniformNormals(n * n, 1));
  REQUIRE(b.kernels.count() > 0);
  for (int ix = 0; ix < n; ++ix)
    for (int iy = 0; iy < n; ++iy)
      if (b.kernels(iy, ix)) CHECK(std::abs(std::hypot(ix + 0.5 - n / 2.0, iy + 0.5 - n / 2.0) - 8.0) <= 2.0);
  // the shell separates the inside from the outside
  int parts = 0;
  labelComponents(b.shell < 0.5, 4, &parts);
  CHECK(parts >= 2);
  // outward directions point away from the centre
  for (int ix = 0; ix < n; ++ix)
    for (int iy = 0; iy < n; ++iy) {
      const Eigen::Index e = iy + static_cast<Eigen::Index>(ix) * n;
      if (!b.kernels(e)) continue;
      const Eigen::Vector2d r(ix + 0.5 - n / 2.0, n / 2.0 - (iy + 0.5));
      CHECK(r.normalized().dot(b.direction.row(e).transpose()) > 0.5);
    }
}

TEST_CASE("kernels parallel to a straight edge are boundary-aligned") {
  const int n = 16;
  const auto g = buildGridHierarchy(n, n, 0.4, 0.1);
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n * n, 2);
  w.topRows(n * n / 2).setConstant(0.3);  // left half solid, vertical edge
  std::vector<Eigen::MatrixXd> N = uniformNormals(n * n, 2);  // layer 1 normal (1, 0)
  const auto ind = layerIndicators(w, 0.1, g);
  const std::vector<Field> wf(2, Field::Constant(g.fine.ny, g.fine.nx, 0.3));
  const auto b = addBoundary(g, wf, 0.1, ind, N);
  int flagged = 0;
  for (Eigen::Index e = 0; e < n * n; ++e) {
    if (!b.kernels(e)) continue;
    CHECK(b.aligned[1][e] == 0);
    flagged += b.aligned[0][e];
  }
  CHECK(flagged > 0);
  CHECK(b.bdist.col(0).minCoeff() == 0.0);
}

TEST_CASE("disconnection measure and closure direction") {
  const Grid g{40, 40, 0.1};
  const Eigen::Vector2d gamma(2.0, 2.0), n(1.0, 0.0);
  auto b = disconnection(gamma, n, Field::Ones(40, 40), g, 2.0);
  CHECK(b.rho == 0.0);
  CHECK(b.dir == n);
  b = disconnection(gamma, n, Field::Constant(40, 40, -1.0), g, 2.0);
  CHECK(b.rho == 1.0);
  CHECK(b.dir == n);
  CHECK((b.centre - (gamma + 2.0 / 3.0 * b.rho * b.dir)).norm() <= 1e-15);
  CHECK((b.control - (gamma + 4.0 / 3.0 * b.rho * b.dir)).norm() <= 1e-15);

  // material to the left pulls the closure towards the void on the right
  Field psi(40, 40);
  for (int ix = 0; ix < 40; ++ix) psi.col(ix).setConstant(g.x(ix) < 2.0 ? 1.0 : -1.0);
  b = disconnection(gamma, n, psi, g, 2.0);
  CHECK(b.dir == -n);
}

TEST_CASE("branch points of simple fields") {
  const auto g = buildGridHierarchy(12, 12, 0.2, 0.1);
  ComplexField plane(g.inter.ny, g.inter.nx);
  for (int ix = 0; ix < g.inter.nx; ++ix)
    for (int iy = 0; iy < g.inter.ny; ++iy) plane(iy, ix) = std::polar(1.0 + 0.1 * std::sin(ix), 3.0 * g.inter.x(ix));
  const Mask all = Mask::Constant(g.inter.ny, g.inter.nx, true);
  CHECK(locateBranchPoints(plane, all, g.inter, g.wavelength).empty());
  CHECK(locateBranchPoints(plane, Mask::Constant(g.inter.ny, g.inter.nx, false), g.inter, g.wavelength).empty());

  const auto s = synthetic::twoOrientationField(16, 0.2, 0.1, 30.0, 0.2);
  const auto pts = locateBranchPoints(s.Gi, s.region, s.g.inter, s.g.wavelength);
  REQUIRE(!pts.empty());
  for (const auto& p : pts) CHECK(std::abs(p.x() - 8.0) <= s.g.wavelength);
}

TEST_CASE("branch closure connects the fork") {
  const auto s = synthetic::twoOrientationField(16, 0.2, 0.1, 30.0, 0.2);
  std::vector<BranchPoint> br;
  const Field pre = triangular(sawtooth(s.Gf).sin());
  const Field post = closeBranches(s.Gi, s.region, s.g.inter, s.Gf, s.wf, s.nf, s.g.interFine, s.g.wavelength, &br);
  REQUIRE(!br.empty());
  const Mask a = synthetic::threshold(pre, 0.2), b = synthetic::threshold(post, 0.2);
  for (const auto& x : br) {
    const double r = 0.5 * s.g.wavelength;
    CHECK(synthetic::componentsInDisc(a, s.g.interFine, x.gamma, r) >= 2);
    CHECK(synthetic::componentsInDisc(b, s.g.interFine, x.gamma, r) == 1);
    CHECK((x.centre - (x.gamma + s.g.wavelength / 3 * x.rho * x.dir)).norm() <= 1e-12);
  }
  CHECK(post.minCoeff() >= 0.0);
  CHECK(post.maxCoeff() <= 1.0);
}

TEST_CASE("pinch with full width is the identity") {
  const auto s = synthetic::twoOrientationField(16, 0.2, 0.1, 30.0, 0.2);
  std::vector<BranchPoint> br;
  closeBranches(s.Gi, s.region, s.g.inter, s.Gf, s.wf, s.nf, s.g.interFine, s.g.wavelength, &br);
  REQUIRE(!br.empty());
  const Field tau = triangular(sawtooth(s.Gf).sin());
  const Field ones = Field::Ones(tau.rows(), tau.cols());
  CHECK((pinchBranches(tau, ones, s.nf, br, s.g.interFine, s.g.wavelength) == tau).all());
  CHECK((pinchBranches(tau, s.wf, s.nf, {}, s.g.interFine, s.g.wavelength) == tau).all());
}

TEST_CASE("uniform layer realises its width") {
  const int n = 16;
  const auto g = buildGridHierarchy(n, n, 0.2, 0.1);
  DehomOptions opt;
  opt.boundary = false;
  opt.removeIslands = false;  // parallel members are disconnected without a boundary
  const auto r = dehomogenise(Eigen::MatrixXd::Constant(n * n, 1, 0.5), uniformNormals(n * n, 1), 0.1, g, opt);
  CHECK(std::abs(r.volume - 0.5) <= 0.05);
  CHECK(std::abs(r.volume - 0.5) / 0.5 <= 2 * g.fine.h / g.wavelength);
}

TEST_CASE("dehomogenisation is deterministic and keeps passive solids") {
  const int n = 16;
  const auto g = buildGridHierarchy(n, n, 0.4, 0.1);
  Eigen::MatrixXd w(n * n, 2);
  std::vector<Eigen::MatrixXd> N(2, Eigen::MatrixXd(n * n, 2));
  for (int ix = 0; ix < n; ++ix)
    for (int iy = 0; iy < n; ++iy) {
      const int e = iy + n * ix;
      const double a = 0.05 * ix + 0.03 * iy;
      N[0].row(e) = Eigen::RowVector2d(std::cos(a), std::sin(a));
      N[1].row(e) = Eigen::RowVector2d(-std::sin(a), std::cos(a));
      w(e, 0) = 0.15 + 0.02 * (ix % 5);
      w(e, 1) = 0.1 + 0.03 * (iy % 4);
    }
  DehomOptions opt;
  opt.passiveSolid = Mask::Constant(n, n, false);
  opt.passiveSolid.block(n - 2, 0, 2, 3).setConstant(true);
  const auto a = dehomogenise(w, N, 0.1, g, opt);
  const auto b = dehomogenise(w, N, 0.1, g, opt);
  CHECK((a.rho == b.rho).all());
  CHECK(a.volume == b.volume);
  CHECK(a.volume == a.rho.mean());
  const Mask up = upsampleMask(opt.passiveSolid, g.fineScale);
  for (Eigen::Index k = 0; k < up.size(); ++k)
    if (up(k)) CHECK(a.rho(k) == 1.0);
  CHECK(((a.rho == 0.0) || (a.rho == 1.0)).all());

  // more material never lowers the volume
  const auto c = dehomogenise((w.array() + 0.1).min(1.0).matrix(), N, 0.1, g, opt);
  CHECK(c.volume >= a.volume);
}
