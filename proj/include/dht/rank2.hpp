#pragma once

#include <Eigen/Dense>
#include <cmath>

namespace dht {

/// Lower triangle of a symmetric 3x3 constitutive matrix, ordered C11, C21, C31, C22, C32, C33.
template <typename Scalar>
using Tri = Eigen::Matrix<Scalar, 6, 1>;

struct MaterialConstants {
  double E = 1.0;
  double Emin = 1e-9;
  double nu = 1.0 / 3.0;
};

template <typename Scalar>
Eigen::Matrix<Scalar, 3, 3> fromTri(const Tri<Scalar>& t) {
  Eigen::Matrix<Scalar, 3, 3> C;
  C << t(0), t(1), t(2),
       t(1), t(3), t(4),
       t(2), t(4), t(5);
  return C;
}

template <typename Scalar>
Tri<Scalar> toTri(const Eigen::Matrix<Scalar, 3, 3>& C) {
  Tri<Scalar> t;
  t << C(0, 0), C(1, 0), C(2, 0), C(1, 1), C(2, 1), C(2, 2);
  return t;
}

/// Relative density of an N-layer laminate: 1 - prod(1 - xi).
template <typename Derived>
typename Derived::Scalar rhoN(const Eigen::DenseBase<Derived>& xi) {
  return typename Derived::Scalar(1) - (typename Derived::Scalar(1) - xi.derived().array()).prod();
}

template <typename Scalar>
Scalar rho2(Scalar w1, Scalar w2) {
  return w1 + w2 - w1 * w2;
}

template <typename Scalar>
Tri<Scalar> isotropicConstitutive(Scalar E, Scalar nu) {
  const Scalar f = E / (Scalar(1) - nu * nu);
  Tri<Scalar> t;
  t << f, f * nu, Scalar(0), f, Scalar(0), f * (Scalar(1) - nu) / Scalar(2);
  return t;
}

template <typename Scalar>
struct MuFromW {
  Scalar mu1 = 0, mu2 = 0;
  /// dmu(i, j) = d mu_i / d wbar_j
  Eigen::Matrix<Scalar, 2, 2> dmu = Eigen::Matrix<Scalar, 2, 2>::Zero();
};

/// Single-scale widths to nested multi-scale widths. The second width is
/// evaluated through the equivalent denominator S - w1*rho, which stays
/// positive away from (1, 0) and reduces to the printed form elsewhere.
template <typename Scalar>
MuFromW<Scalar> muFromW(Scalar w1, Scalar w2) {
  MuFromW<Scalar> r;
  const Scalar S = w1 + w2;
  if (S <= Scalar(0)) return r;
  const Scalar rho = rho2(w1, w2);
  r.mu1 = w1 * rho / S;
  r.dmu(0, 0) = (rho + w1 * (Scalar(1) - w2)) / S - w1 * rho / (S * S);
  r.dmu(0, 1) = w1 * (Scalar(1) - w1) / S - w1 * rho / (S * S);

  const Scalar D = S - w1 * rho;
  if (D <= Scalar(0)) {
    // (1, 0): the laminate is fully solid in layer 1.
    r.mu2 = w2;
    r.dmu(1, 1) = Scalar(1);
    return r;
  }
  const Scalar dD1 = Scalar(1) - rho - w1 * (Scalar(1) - w2);
  const Scalar dD2 = Scalar(1) - w1 * (Scalar(1) - w1);
  r.mu2 = w2 * rho / D;
  r.dmu(1, 0) = w2 * (Scalar(1) - w2) / D - w2 * rho * dD1 / (D * D);
  r.dmu(1, 1) = (rho + w2 * (Scalar(1) - w1)) / D - w2 * rho * dD2 / (D * D);
  return r;
}

template <typename Scalar>
Eigen::Matrix<Scalar, 3, 3> rotationT(Scalar a) {
  const Scalar c = std::cos(a), s = std::sin(a);
  Eigen::Matrix<Scalar, 3, 3> T;
  T << c * c, s * s, c * s,
       s * s, c * c, -c * s,
       Scalar(-2) * c * s, Scalar(2) * c * s, c * c - s * s;
  return T;
}

template <typename Scalar>
Eigen::Matrix<Scalar, 3, 3> rotationTDerivative(Scalar a) {
  const Scalar c2 = std::cos(Scalar(2) * a), s2 = std::sin(Scalar(2) * a);
  Eigen::Matrix<Scalar, 3, 3> dT;
  dT << -s2, s2, c2,
        s2, -s2, -c2,
        Scalar(-2) * c2, Scalar(2) * c2, Scalar(-2) * s2;
  return dT;
}

template <typename Scalar>
struct Rank2Constitutive {
  Tri<Scalar> C, dmu1, dmu2, da;
};

/// Rotated Rank-2 laminate stiffness with isotropic background and its derivatives.
template <typename Scalar>
Rank2Constitutive<Scalar> constitutiveRank2(Scalar mu1, Scalar mu2, Scalar a,
                                            const MaterialConstants& mat) {
  using M3 = Eigen::Matrix<Scalar, 3, 3>;
  const Scalar nu = Scalar(mat.nu), E = Scalar(mat.E);
  const Scalar q = Scalar(1) - nu * nu;
  const Scalar den = Scalar(1) - mu2 + mu1 * mu2 * q;
  const Scalar dden1 = mu2 * q;
  const Scalar dden2 = Scalar(-1) + mu1 * q;

  M3 N = M3::Zero(), dN1 = M3::Zero(), dN2 = M3::Zero();
  N(0, 0) = mu1;
  N(0, 1) = N(1, 0) = mu1 * mu2 * nu;
  N(1, 1) = mu2 * (Scalar(1) - mu2 + mu1 * mu2);
  dN1(0, 0) = Scalar(1);
  dN1(0, 1) = dN1(1, 0) = mu2 * nu;
  dN1(1, 1) = mu2 * mu2;
  dN2(0, 1) = dN2(1, 0) = mu1 * nu;
  dN2(1, 1) = Scalar(1) - Scalar(2) * mu2 + Scalar(2) * mu1 * mu2;

  const M3 Cb = fromTri(isotropicConstitutive<Scalar>(Scalar(mat.Emin), nu));
  M3 C = Cb, dC1 = M3::Zero(), dC2 = M3::Zero();
  if (den > Scalar(0)) {
    C += E / den * N;
    dC1 = E / den * dN1 - E * dden1 / (den * den) * N;
    dC2 = E / den * dN2 - E * dden2 / (den * den) * N;
  }

  const M3 T = rotationT(a), dT = rotationTDerivative(a);
  Rank2Constitutive<Scalar> r;
  r.C = toTri<Scalar>(T.transpose() * C * T);
  r.dmu1 = toTri<Scalar>(T.transpose() * dC1 * T);
  r.dmu2 = toTri<Scalar>(T.transpose() * dC2 * T);
  r.da = toTri<Scalar>(dT.transpose() * C * T + T.transpose() * C * dT);
  return r;
}

}  // namespace dht
