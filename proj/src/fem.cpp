#include "dht/fem.hpp"

#include <Eigen/CholmodSupport>
#include <algorithm>
#include <limits>
#include <cmath>
#include <stdexcept>

namespace dht {

namespace {

// Local node offsets (ix - elx, iy - ely) for SW, SE, NE, NW.
constexpr int kLocalDx[4] = {0, 1, 1, 0};
constexpr int kLocalDy[4] = {1, 1, 0, 0};

int localNode(int dx, int dy) {
  if (dy == 1) return dx == 0 ? 0 : 1;
  return dx == 1 ? 2 : 3;
}

Eigen::Matrix3d unitTri(int k) {
  Tri<double> t = Tri<double>::Zero();
  t(k) = 1.0;
  return fromTri(t);
}

}  // namespace

Eigen::Matrix<double, 3, 8> strainDisplacement(double h, double xi, double eta) {
  const double xin[4] = {-1, 1, 1, -1};
  const double etan[4] = {-1, -1, 1, 1};
  Eigen::Matrix<double, 3, 8> B = Eigen::Matrix<double, 3, 8>::Zero();
  for (int i = 0; i < 4; ++i) {
    const double dx = 0.25 * xin[i] * (1 + eta * etan[i]) * 2.0 / h;
    const double dy = 0.25 * etan[i] * (1 + xi * xin[i]) * 2.0 / h;
    B(0, 2 * i) = dx;
    B(1, 2 * i + 1) = dy;
    B(2, 2 * i) = dy;
    B(2, 2 * i + 1) = dx;
  }
  return B;
}

ElementBasis elementBaseMatrices(double h) {
  if (!(h > 0)) throw std::invalid_argument("element size must be positive");
  const double g = 1.0 / std::sqrt(3.0);
  const double jac = 0.25 * h * h;
  ElementBasis KE0;
  for (int k = 0; k < 6; ++k) {
    const Eigen::Matrix3d Ek = unitTri(k);
    KE0[k].setZero();
    for (double xi : {-g, g})
      for (double eta : {-g, g}) {
        const auto B = strainDisplacement(h, xi, eta);
        KE0[k] += jac * B.transpose() * Ek * B;
      }
  }
  return KE0;
}

Mat8 elementStiffness(const ElementBasis& KE0, const Tri<double>& C) {
  Mat8 K = Mat8::Zero();
  for (int k = 0; k < 6; ++k) K += C(k) * KE0[k];
  return K;
}

std::array<int, 8> FEModel::edof(int e) const {
  const int elx = e / nelY, ely = e % nelY;
  std::array<int, 8> d{};
  for (int i = 0; i < 4; ++i) {
    const int n = node(elx + kLocalDx[i], ely + kLocalDy[i]);
    d[2 * i] = 2 * n;
    d[2 * i + 1] = 2 * n + 1;
  }
  return d;
}

FEModel makeGridModel(int nelX, int nelY, double h) {
  if (nelX < 1 || nelY < 1) throw std::invalid_argument("mesh needs at least one element per direction");
  FEModel m;
  m.nelX = nelX;
  m.nelY = nelY;
  m.h = h;
  m.F = Eigen::VectorXd::Zero(m.numDofs());
  return m;
}

namespace {

// Supernodal factorisation depends on the BLAS CHOLMOD was built against;
// some BLAS builds misdetect the CPU and return garbage, so probe once.
bool supernodalWorks() {
  static const bool ok = [] {
    const int n = 3000, band = 50;
    std::vector<Eigen::Triplet<double>> t;
    for (int i = 0; i < n; ++i) {
      t.emplace_back(i, i, 4.0);
      if (i + 1 < n) t.emplace_back(i + 1, i, -1.0);
      if (i + band < n) t.emplace_back(i + band, i, -1.0);
    }
    Eigen::SparseMatrix<double> A(n, n);
    A.setFromTriplets(t.begin(), t.end());
    Eigen::CholmodSupernodalLLT<Eigen::SparseMatrix<double>, Eigen::Lower> llt;
    llt.cholmod().print = 0;
    llt.compute(A);
    if (llt.info() != Eigen::Success) return false;
    const Eigen::VectorXd b = Eigen::VectorXd::Ones(n);
    const Eigen::VectorXd x = llt.solve(b);
    const Eigen::VectorXd r = A.selfadjointView<Eigen::Lower>() * x - b;
    return r.norm() < 1e-8 * b.norm();
  }();
  return ok;
}

}  // namespace

struct StiffnessSystem::Solver {
  Eigen::CholmodSupernodalLLT<Eigen::SparseMatrix<double>, Eigen::Lower> super;
  Eigen::CholmodSimplicialLLT<Eigen::SparseMatrix<double>, Eigen::Lower> simplicial;
  bool useSuper = supernodalWorks();
  bool analysed = false;

  template <typename F>
  auto visit(F&& f) {
    return useSuper ? f(super) : f(simplicial);
  }
};

StiffnessSystem::StiffnessSystem(const FEModel& model, const std::vector<int>& extraFixed)
    : model_(model), KE0_(elementBaseMatrices(model.h)), solver_(std::make_unique<Solver>()) {
  const int nd = model_.numDofs();
  std::vector<char> fixed(nd, 0);
  for (int d : model_.fixedDofs) fixed.at(d) = 1;
  for (int d : extraFixed) fixed.at(d) = 1;
  freeIndex_.assign(nd, -1);
  for (int d = 0; d < nd; ++d)
    if (!fixed[d]) {
      freeIndex_[d] = static_cast<int>(freeDofs_.size());
      freeDofs_.push_back(d);
    }

  std::vector<std::vector<int>> blocksOf(nd);
  for (int b = 0; b < static_cast<int>(model_.penalty.size()); ++b)
    for (int d : model_.penalty[b].dofs) blocksOf.at(d).push_back(b);

  const int nf = numFree();
  const int ny1 = model_.nelY + 1;
  std::vector<int> outer(nf + 1, 0);
  std::vector<int> inner;
  inner.reserve(static_cast<size_t>(nf) * 10);
  std::vector<int> rows;
  for (int c = 0; c < nf; ++c) {
    const int g = freeDofs_[c];
    const int n = g / 2, ix = n / ny1, iy = n % ny1;
    rows.clear();
    for (int dx = -1; dx <= 1; ++dx)
      for (int dy = -1; dy <= 1; ++dy) {
        const int jx = ix + dx, jy = iy + dy;
        if (jx < 0 || jx > model_.nelX || jy < 0 || jy > model_.nelY) continue;
        for (int k = 0; k < 2; ++k) {
          const int r = freeIndex_[2 * model_.node(jx, jy) + k];
          if (r >= c) rows.push_back(r);
        }
      }
    for (int b : blocksOf[g])
      for (int d : model_.penalty[b].dofs) {
        const int r = freeIndex_[d];
        if (r >= c) rows.push_back(r);
      }
    std::sort(rows.begin(), rows.end());
    rows.erase(std::unique(rows.begin(), rows.end()), rows.end());
    for (int r : rows) {
      const int gr = freeDofs_[r];
      double w = 0.0;
      for (int b : blocksOf[g])
        if (std::find(model_.penalty[b].dofs.begin(), model_.penalty[b].dofs.end(), gr) !=
            model_.penalty[b].dofs.end())
          w += model_.penalty[b].weight;
      if (w != 0.0) penaltyEntries_.push_back({static_cast<Eigen::Index>(inner.size()), c, w, 0.0L});
      inner.push_back(r);
    }
    outer[c + 1] = static_cast<int>(inner.size());
  }

  K_.resize(nf, nf);
  K_.resizeNonZeros(static_cast<Eigen::Index>(inner.size()));
  std::copy(outer.begin(), outer.end(), K_.outerIndexPtr());
  std::copy(inner.begin(), inner.end(), K_.innerIndexPtr());
  std::fill(K_.valuePtr(), K_.valuePtr() + inner.size(), 0.0);
}

StiffnessSystem::~StiffnessSystem() = default;

template <typename ElemK>
Eigen::VectorXd StiffnessSystem::assembleAndSolve(const ElemK& elemEntry) {
  const FEModel& m = model_;
  const int ny1 = m.nelY + 1;

  // K(gr, gc) from the elements shared by the two nodes.
  auto entry = [&](int gr, int gc) {
    const int nr = gr / 2, nc = gc / 2;
    const int rx = nr / ny1, ry = nr % ny1, cx = nc / ny1, cy = nc % ny1;
    double v = 0.0;
    for (int elx = std::max(rx, cx) - 1; elx <= std::min(rx, cx); ++elx) {
      if (elx < 0 || elx >= m.nelX) continue;
      for (int ely = std::max(ry, cy) - 1; ely <= std::min(ry, cy); ++ely) {
        if (ely < 0 || ely >= m.nelY) continue;
        const int a = 2 * localNode(rx - elx, ry - ely) + gr % 2;
        const int b = 2 * localNode(cx - elx, cy - ely) + gc % 2;
        v += elemEntry(m.element(elx, ely), a, b);
      }
    }
    return v;
  };

  penaltyScale_ = 0.0;
  penaltyScaleDof_ = -1;
  for (int g = 0; g < m.numDofs(); ++g) {
    const double d = entry(g, g);
    if (d > penaltyScale_) {
      penaltyScale_ = d;
      penaltyScaleDof_ = g;
    }
  }

  const int nf = numFree();
  double* val = K_.valuePtr();
  const int* outer = K_.outerIndexPtr();
  const int* inner = K_.innerIndexPtr();
  for (int c = 0; c < nf; ++c)
    for (int p = outer[c]; p < outer[c + 1]; ++p) val[p] = entry(freeDofs_[inner[p]], freeDofs_[c]);
  // The penalty entries dominate their elastic part, so rounding them is
  // amplified by the large support displacements the soft springs allow.
  for (auto& pe : penaltyEntries_) {
    pe.exact = static_cast<long double>(val[pe.pos]) + static_cast<long double>(pe.weight) * penaltyScale_;
    val[pe.pos] = static_cast<double>(pe.exact);
  }

  Eigen::VectorXd Ff(nf);
  for (int c = 0; c < nf; ++c) Ff(c) = m.F(freeDofs_[c]);
  const bool first = !solver_->analysed;
  solver_->analysed = true;
  const Eigen::VectorXd Uf = solver_->visit([&](auto& llt) -> Eigen::VectorXd {
    if (first) llt.analyzePattern(K_);
    llt.factorize(K_);
    if (llt.info() != Eigen::Success)
      throw std::runtime_error("stiffness factorisation failed: system is not positive definite");
    // Refinement with extended-precision residuals keeps the solution
    // accurate for designs with large stiffness contrast.
    Eigen::VectorXd x = llt.solve(Ff);
    double last = std::numeric_limits<double>::infinity();
    for (int step = 0; step < 10; ++step) {
      const Eigen::VectorXd dx = llt.solve(residual(Ff, x));
      x += dx;
      const double size = dx.lpNorm<Eigen::Infinity>();
      if (size <= 1e-15 * x.lpNorm<Eigen::Infinity>() || size >= 0.5 * last) break;
      last = size;
    }
    return x;
  });
  Eigen::VectorXd U = Eigen::VectorXd::Zero(m.numDofs());
  for (int c = 0; c < nf; ++c) U(freeDofs_[c]) = Uf(c);
  return U;
}

Eigen::VectorXd StiffnessSystem::residual(const Eigen::VectorXd& b, const Eigen::VectorXd& x) const {
  std::vector<long double> r(b.data(), b.data() + b.size());
  const double* val = K_.valuePtr();
  const int* outer = K_.outerIndexPtr();
  const int* inner = K_.innerIndexPtr();
  for (int c = 0; c < K_.outerSize(); ++c)
    for (int p = outer[c]; p < outer[c + 1]; ++p) {
      const int row = inner[p];
      const long double v = val[p];
      r[row] -= v * x(c);
      if (row != c) r[c] -= v * x(row);
    }
  for (const auto& pe : penaltyEntries_) {
    const int row = inner[pe.pos], c = pe.col;
    const long double d = pe.exact - static_cast<long double>(val[pe.pos]);
    r[row] -= d * x(c);
    if (row != c) r[c] -= d * x(row);
  }
  Eigen::VectorXd out(b.size());
  for (Eigen::Index i = 0; i < b.size(); ++i) out(i) = static_cast<double>(r[i]);
  return out;
}

Eigen::VectorXd StiffnessSystem::solve(const TriField& C) {
  if (C.cols() != model_.numElements()) throw std::invalid_argument("one constitutive triangle per element expected");
  return assembleAndSolve([&](int e, int a, int b) {
    double v = 0.0;
    for (int k = 0; k < 6; ++k) v += C(k, e) * KE0_[k](a, b);
    return v;
  });
}

Eigen::VectorXd StiffnessSystem::solveIsotropic(const Eigen::VectorXd& modulus, double nu) {
  if (modulus.size() != model_.numElements()) throw std::invalid_argument("one modulus per element expected");
  const Mat8 KE = elementStiffness(KE0_, isotropicConstitutive(1.0, nu));
  return assembleAndSolve([&](int e, int a, int b) { return modulus(e) * KE(a, b); });
}

double compliance(const Eigen::VectorXd& F, const Eigen::VectorXd& U) { return F.dot(U); }

double penaltyQuadratic(const FEModel& model, const Eigen::VectorXd& U) {
  double q = 0.0;
  for (const auto& blk : model.penalty) {
    double s = 0.0;
    for (int d : blk.dofs) s += U(d);
    q += blk.weight * s * s;
  }
  return q;
}

namespace {

Eigen::Matrix<double, 8, 1> elementDisplacement(const FEModel& model, const Eigen::VectorXd& U, int e) {
  const auto d = model.edof(e);
  Eigen::Matrix<double, 8, 1> ue;
  for (int i = 0; i < 8; ++i) ue(i) = U(d[i]);
  return ue;
}

}  // namespace

TriField elementQuadraticForms(const FEModel& model, const ElementBasis& KE0, const Eigen::VectorXd& U) {
  TriField q(6, model.numElements());
  for (int e = 0; e < model.numElements(); ++e) {
    const auto ue = elementDisplacement(model, U, e);
    for (int k = 0; k < 6; ++k) q(k, e) = ue.dot(KE0[k] * ue);
  }
  return q;
}

Eigen::VectorXd strainEnergyDensity(const FEModel& model, const TriField& C, const Eigen::VectorXd& U) {
  const TriField q = elementQuadraticForms(model, elementBaseMatrices(model.h), U);
  const double area = model.h * model.h;
  Eigen::VectorXd w(model.numElements());
  for (int e = 0; e < model.numElements(); ++e) w(e) = 0.5 * C.col(e).dot(q.col(e)) / area;
  return w;
}

Eigen::VectorXd strainEnergyDensityIsotropic(const FEModel& model, const Eigen::VectorXd& modulus, double nu,
                                             const Eigen::VectorXd& U) {
  const Mat8 KE = elementStiffness(elementBaseMatrices(model.h), isotropicConstitutive(1.0, nu));
  const double area = model.h * model.h;
  Eigen::VectorXd w(model.numElements());
  for (int e = 0; e < model.numElements(); ++e) {
    const auto ue = elementDisplacement(model, U, e);
    w(e) = 0.5 * modulus(e) * ue.dot(KE * ue) / area;
  }
  return w;
}

double principalAngle(double sxx, double syy, double sxy) {
  const double dev = std::hypot(2.0 * sxy, sxx - syy);
  if (dev <= 1e-12 * (std::abs(sxx) + std::abs(syy))) return 0.0;
  double a = 0.5 * std::atan2(2.0 * sxy, sxx - syy);
  if (a < 0) a += M_PI;
  return a;
}

Eigen::VectorXd principalDirections(const FEModel& model, const Tri<double>& C, const Eigen::VectorXd& U) {
  const Eigen::Matrix<double, 3, 8> SB = fromTri(C) * strainDisplacement(model.h, 0.0, 0.0);
  Eigen::VectorXd a(model.numElements());
  for (int e = 0; e < model.numElements(); ++e) {
    const Eigen::Vector3d s = SB * elementDisplacement(model, U, e);
    a(e) = principalAngle(s(0), s(1), s(2));
  }
  return a;
}

}  // namespace dht
