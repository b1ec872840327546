#include "dht/regularize.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace dht {

void PassiveSet::set(Eigen::Index e, double v, Eigen::Index n) {
  if (mask.size() == 0) {
    mask = Eigen::Array<bool, Eigen::Dynamic, 1>::Constant(n, false);
    value = Eigen::VectorXd::Zero(n);
  }
  mask(e) = true;
  value(e) = v;
}

Eigen::SparseMatrix<double> coneFilter(int nelX, int nelY, double radius) {
  if (!(radius > 0)) throw std::invalid_argument("filter radius must be positive");
  const int reach = static_cast<int>(std::ceil(radius)) - 1;
  std::vector<Eigen::Triplet<double>> trip;
  for (int i = 0; i < nelX; ++i)
    for (int j = 0; j < nelY; ++j) {
      const int row = j + i * nelY;
      double sum = 0.0;
      const size_t first = trip.size();
      for (int k = std::max(i - reach, 0); k <= std::min(i + reach, nelX - 1); ++k)
        for (int l = std::max(j - reach, 0); l <= std::min(j + reach, nelY - 1); ++l) {
          const double w = radius - std::hypot(i - k, j - l);
          if (w <= 0) continue;
          trip.emplace_back(row, l + k * nelY, w);
          sum += w;
        }
      if (sum == 0.0) {
        trip.emplace_back(row, row, 1.0);
        continue;
      }
      for (size_t t = first; t < trip.size(); ++t)
        trip[t] = Eigen::Triplet<double>(trip[t].row(), trip[t].col(), trip[t].value() / sum);
    }
  Eigen::SparseMatrix<double> H(nelX * nelY, nelX * nelY);
  H.setFromTriplets(trip.begin(), trip.end());
  return H;
}

Eigen::VectorXd applyFilter(const Eigen::SparseMatrix<double>& H, const Eigen::VectorXd& x,
                            const PassiveSet& passive) {
  Eigen::VectorXd y = H * x;
  passive.impose(y);
  return y;
}

Eigen::VectorXd applyFilterAdjoint(const Eigen::SparseMatrix<double>& H, const Eigen::VectorXd& g,
                                   const PassiveSet& passive) {
  Eigen::VectorXd gm = g;
  passive.zero(gm);
  Eigen::VectorXd r = H.transpose() * gm;
  passive.zero(r);
  return r;
}

double project(double x, double beta, double eta) {
  const double a = std::tanh(beta * eta);
  return (a + std::tanh(beta * (x - eta))) / (a + std::tanh(beta * (1.0 - eta)));
}

double projectDerivative(double x, double beta, double eta) {
  const double t = std::tanh(beta * (x - eta));
  return beta * (1.0 - t * t) / (std::tanh(beta * eta) + std::tanh(beta * (1.0 - eta)));
}

Eigen::VectorXd project(const Eigen::VectorXd& x, double beta, double eta) {
  return x.unaryExpr([&](double v) { return project(v, beta, eta); });
}

Eigen::VectorXd projectDerivative(const Eigen::VectorXd& x, double beta, double eta) {
  return x.unaryExpr([&](double v) { return projectDerivative(v, beta, eta); });
}

Eigen::MatrixXd physicalWidths(const Eigen::MatrixXd& wTilde, const Eigen::VectorXd& sBar) {
  return wTilde.array().colwise() * sBar.array();
}

TildeGradient widthProductRule(const Eigen::MatrixXd& dWbar, const Eigen::MatrixXd& wTilde,
                               const Eigen::VectorXd& sBar, const Eigen::VectorXd& dsBar) {
  TildeGradient g;
  g.w = dWbar.array().colwise() * sBar.array();
  g.s = (dWbar.array() * wTilde.array()).rowwise().sum() * dsBar.array();
  return g;
}

RawGradient chainRuleBack(const TildeGradient& g, const Eigen::SparseMatrix<double>& Hw,
                          const Eigen::SparseMatrix<double>& Hs, const PassiveSet* wPassive,
                          const PassiveSet& sPassive) {
  RawGradient r;
  r.w.resize(g.w.rows(), g.w.cols());
  for (Eigen::Index i = 0; i < g.w.cols(); ++i)
    r.w.col(i) = applyFilterAdjoint(Hw, g.w.col(i), wPassive[i]);
  r.s = applyFilterAdjoint(Hs, g.s, sPassive);
  return r;
}

}  // namespace dht
