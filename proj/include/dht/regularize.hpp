#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace dht {

/// Prescribed values for a subset of elements. An empty mask means no passive entries.
struct PassiveSet {
  Eigen::Array<bool, Eigen::Dynamic, 1> mask;
  Eigen::VectorXd value;

  bool empty() const { return mask.size() == 0 || !mask.any(); }
  bool isPassive(Eigen::Index e) const { return mask.size() != 0 && mask(e); }
  void set(Eigen::Index e, double v, Eigen::Index n);
  template <typename Derived>
  void impose(Eigen::MatrixBase<Derived>&& x) const {
    if (mask.size() == 0) return;
    for (Eigen::Index e = 0; e < x.size(); ++e)
      if (mask(e)) x(e) = value(e);
  }
  template <typename Derived>
  void impose(Eigen::MatrixBase<Derived>& x) const {
    impose(std::move(x));
  }
  template <typename Derived>
  void zero(Eigen::MatrixBase<Derived>&& g) const {
    if (mask.size() == 0) return;
    for (Eigen::Index e = 0; e < g.size(); ++e)
      if (mask(e)) g(e) = 0.0;
  }
  template <typename Derived>
  void zero(Eigen::MatrixBase<Derived>& g) const {
    zero(std::move(g));
  }
};

/// Row-normalised linear-decay (cone) convolution of the given radius on a
/// nelX x nelY element grid with y-major numbering.
Eigen::SparseMatrix<double> coneFilter(int nelX, int nelY, double radius);

/// H x with passive elements re-imposed.
Eigen::VectorXd applyFilter(const Eigen::SparseMatrix<double>& H, const Eigen::VectorXd& x,
                            const PassiveSet& passive);
/// Adjoint of applyFilter: H' applied to g with passive entries zeroed.
Eigen::VectorXd applyFilterAdjoint(const Eigen::SparseMatrix<double>& H, const Eigen::VectorXd& g,
                                   const PassiveSet& passive);

/// Robust tanh projection and its derivative.
double project(double x, double beta, double eta);
double projectDerivative(double x, double beta, double eta);
Eigen::VectorXd project(const Eigen::VectorXd& x, double beta, double eta);
Eigen::VectorXd projectDerivative(const Eigen::VectorXd& x, double beta, double eta);

/// wbar_i = wtilde_i * sbar, column per layer.
Eigen::MatrixXd physicalWidths(const Eigen::MatrixXd& wTilde, const Eigen::VectorXd& sBar);

struct TildeGradient {
  Eigen::MatrixXd w;  ///< d/d wtilde, one column per layer
  Eigen::VectorXd s;  ///< d/d stilde
};

/// Product rule of wbar = wtilde * sbar(stilde): maps d/d wbar to d/d wtilde and d/d stilde.
TildeGradient widthProductRule(const Eigen::MatrixXd& dWbar, const Eigen::MatrixXd& wTilde,
                               const Eigen::VectorXd& sBar, const Eigen::VectorXd& dsBar);

struct RawGradient {
  Eigen::MatrixXd w;
  Eigen::VectorXd s;
};

/// Filter adjoints back to the raw width and indicator variables.
RawGradient chainRuleBack(const TildeGradient& g, const Eigen::SparseMatrix<double>& Hw,
                          const Eigen::SparseMatrix<double>& Hs, const PassiveSet* wPassive,
                          const PassiveSet& sPassive);

}  // namespace dht
