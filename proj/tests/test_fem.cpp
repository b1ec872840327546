#include <doctest.h>

#include <numbers>
#include <random>

#include "dht/fem.hpp"

using namespace dht;

namespace {

Tri<double> randomSpd(std::mt19937& rng) {
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  Eigen::Matrix3d A;
  for (int i = 0; i < 9; ++i) A(i) = U(rng);
  return toTri<double>(A * A.transpose() + 0.1 * Eigen::Matrix3d::Identity());
}

/// Clamped 2x2 patch with a tip load, small enough to solve densely.
FEModel patch() {
  FEModel m = makeGridModel(2, 2);
  for (int iy = 0; iy <= 2; ++iy) {
    m.fixedDofs.push_back(2 * m.node(0, iy));
    m.fixedDofs.push_back(2 * m.node(0, iy) + 1);
  }
  m.F(2 * m.node(2, 2) + 1) = -1.0;
  return m;
}

}  // namespace

TEST_CASE("element matrices have rigid-body null space") {
  const auto KE0 = elementBaseMatrices(1.0);
  for (const auto& K : KE0) CHECK((K - K.transpose()).cwiseAbs().maxCoeff() == 0.0);
  const Mat8 K = elementStiffness(KE0, isotropicConstitutive(1.0, 0.3));
  CHECK(K.rowwise().sum().cwiseAbs().maxCoeff() <= 1e-12);

  std::mt19937 rng(1);
  for (int k = 0; k < 20; ++k) {
    const Eigen::SelfAdjointEigenSolver<Mat8> es(elementStiffness(KE0, randomSpd(rng)));
    const auto ev = es.eigenvalues();
    const double scale = ev.maxCoeff();
    int zeros = 0;
    for (int i = 0; i < 8; ++i) {
      CHECK(ev(i) >= -1e-12 * scale);
      zeros += std::abs(ev(i)) <= 1e-10 * scale;
    }
    CHECK(zeros == 3);
  }
}

TEST_CASE("element stiffness is scale invariant in 2D") {
  std::mt19937 rng(2);
  const Tri<double> C = randomSpd(rng);
  const Mat8 a = elementStiffness(elementBaseMatrices(1.0), C);
  const Mat8 b = elementStiffness(elementBaseMatrices(2.0), C);
  CHECK((a - b).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("edof numbering starts south-west and runs anticlockwise") {
  const FEModel m = makeGridModel(3, 2);
  const auto d = m.edof(m.element(1, 0));
  // element (1, 0) is in the top row; its south-west node is (1, 1)
  CHECK(d[0] == 2 * m.node(1, 1));
  CHECK(d[2] == 2 * m.node(2, 1));
  CHECK(d[4] == 2 * m.node(2, 0));
  CHECK(d[6] == 2 * m.node(1, 0));
}

TEST_CASE("sparse solve matches a dense oracle") {
  const FEModel m = patch();
  const auto KE0 = elementBaseMatrices(m.h);
  std::mt19937 rng(4);
  TriField C(6, m.numElements());
  for (int e = 0; e < m.numElements(); ++e) C.col(e) = randomSpd(rng);

  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(m.numDofs(), m.numDofs());
  for (int e = 0; e < m.numElements(); ++e) {
    const auto d = m.edof(e);
    const Mat8 Ke = elementStiffness(KE0, C.col(e));
    for (int i = 0; i < 8; ++i)
      for (int j = 0; j < 8; ++j) K(d[i], d[j]) += Ke(i, j);
  }
  std::vector<int> freeDofs;
  for (int i = 0; i < m.numDofs(); ++i)
    if (std::find(m.fixedDofs.begin(), m.fixedDofs.end(), i) == m.fixedDofs.end()) freeDofs.push_back(i);
  const int nf = static_cast<int>(freeDofs.size());
  Eigen::MatrixXd Kf(nf, nf);
  Eigen::VectorXd Ff(nf);
  for (int i = 0; i < nf; ++i) {
    Ff(i) = m.F(freeDofs[i]);
    for (int j = 0; j < nf; ++j) Kf(i, j) = K(freeDofs[i], freeDofs[j]);
  }
  const Eigen::VectorXd Uf = Kf.ldlt().solve(Ff);

  StiffnessSystem sys(m);
  const Eigen::VectorXd U = sys.solve(C);
  for (int i = 0; i < nf; ++i) CHECK(U(freeDofs[i]) == doctest::Approx(Uf(i)).epsilon(1e-10));
  for (int d : m.fixedDofs) CHECK(U(d) == 0.0);
  CHECK(compliance(m.F, U) > 0);

  const Eigen::VectorXd U2 = sys.solve(2.0 * C);
  CHECK((U2 - 0.5 * U).cwiseAbs().maxCoeff() <= 1e-12 * U.cwiseAbs().maxCoeff());
}

TEST_CASE("compliance of zero load is zero") {
  CHECK(compliance(Eigen::VectorXd::Zero(4), Eigen::VectorXd::Ones(4)) == 0.0);
}

TEST_CASE("energy density balances compliance") {
  FEModel m = makeGridModel(6, 3);
  for (int iy = 0; iy <= 3; ++iy) {
    m.fixedDofs.push_back(2 * m.node(0, iy));
    m.fixedDofs.push_back(2 * m.node(0, iy) + 1);
  }
  m.F(2 * m.node(6, 3) + 1) = -1.0;
  StiffnessSystem sys(m);
  const Eigen::VectorXd mod = Eigen::VectorXd::LinSpaced(m.numElements(), 0.5, 1.5);
  const Eigen::VectorXd U = sys.solveIsotropic(mod, 0.3);
  const Eigen::VectorXd w = strainEnergyDensityIsotropic(m, mod, 0.3, U);
  CHECK(w.sum() * m.h * m.h == doctest::Approx(0.5 * compliance(m.F, U)).epsilon(1e-8));
  CHECK(strainEnergyDensityIsotropic(m, mod, 0.3, Eigen::VectorXd::Zero(m.numDofs())).isZero());
}

TEST_CASE("uniaxial stretch energy") {
  const FEModel m = makeGridModel(1, 1);
  const double e0 = 1e-3;
  Eigen::VectorXd U = Eigen::VectorXd::Zero(8);
  for (int ix = 0; ix <= 1; ++ix)
    for (int iy = 0; iy <= 1; ++iy) U(2 * m.node(ix, iy)) = e0 * ix;
  const Eigen::VectorXd w = strainEnergyDensityIsotropic(m, Eigen::VectorXd::Ones(1), 0.25, U);
  const double C11 = 1.0 / (1 - 0.25 * 0.25);
  CHECK(w(0) == doctest::Approx(0.5 * C11 * e0 * e0).epsilon(1e-12));
}

TEST_CASE("more material is never softer") {
  FEModel m = makeGridModel(3, 3);
  for (int iy = 0; iy <= 3; ++iy) {
    m.fixedDofs.push_back(2 * m.node(0, iy));
    m.fixedDofs.push_back(2 * m.node(0, iy) + 1);
  }
  m.F(2 * m.node(3, 3) + 1) = -1.0;
  MaterialConstants mat;
  std::mt19937 rng(9);
  std::uniform_real_distribution<double> U(0.1, 0.8), A(0, std::numbers::pi);
  StiffnessSystem sys(m);
  for (int trial = 0; trial < 10; ++trial) {
    TriField C(6, 9), Cp(6, 9);
    for (int e = 0; e < 9; ++e) {
      const double m1 = U(rng), m2 = U(rng), a = A(rng);
      C.col(e) = constitutiveRank2(m1, m2, a, mat).C;
      Cp.col(e) = constitutiveRank2(m1 + 0.1, m2 + 0.1, a, mat).C;
    }
    const double J = compliance(m.F, sys.solve(C));
    const double Jp = compliance(m.F, sys.solve(Cp));
    CHECK(Jp <= J * (1 + 1e-12));
  }
}

TEST_CASE("principal angles") {
  CHECK(principalAngle(1.0, 0.0, 0.0) == doctest::Approx(0.0));
  CHECK(principalAngle(0.0, 0.0, 1.0) == doctest::Approx(std::numbers::pi / 4));
  CHECK(principalAngle(2.0, 2.0, 0.0) == 0.0);
  // sigma_1 along -pi/3 is reported at 2pi/3
  const double a = -std::numbers::pi / 3, c = std::cos(a), s = std::sin(a);
  CHECK(principalAngle(c * c, s * s, c * s) == doctest::Approx(2 * std::numbers::pi / 3));
}
