#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <array>
#include <memory>
#include <utility>
#include <vector>

#include "dht/rank2.hpp"

namespace dht {

using Mat8 = Eigen::Matrix<double, 8, 8>;
using ElementBasis = std::array<Mat8, 6>;
/// Per-element constitutive lower triangles, one column per element.
using TriField = Eigen::Matrix<double, 6, Eigen::Dynamic>;

/// Six base matrices with KE(C) = sum_k C_k * KE0_k for a square Q4 element of side h.
ElementBasis elementBaseMatrices(double h);
Mat8 elementStiffness(const ElementBasis& KE0, const Tri<double>& C);
/// Strain-displacement matrix of the square element at local coordinates (xi, eta).
Eigen::Matrix<double, 3, 8> strainDisplacement(double h, double xi, double eta);

/// All-ones coupling over a set of dofs, scaled by weight * max(diag(K)).
struct PenaltyBlock {
  std::vector<int> dofs;
  double weight = 1e4;
};

/// Structured Q4 mesh. Nodes are numbered column-wise from the top-left
/// corner, node = iy + ix*(nelY+1); element e = ely + elx*nelY with ely = 0
/// the top row. Local nodes run anticlockwise from the south-west corner.
struct FEModel {
  int nelX = 0, nelY = 0;
  double h = 1.0;
  Eigen::VectorXd F;
  std::vector<PenaltyBlock> penalty;
  std::vector<int> fixedDofs;

  int numElements() const { return nelX * nelY; }
  int numNodes() const { return (nelX + 1) * (nelY + 1); }
  int numDofs() const { return 2 * numNodes(); }
  int node(int ix, int iy) const { return iy + ix * (nelY + 1); }
  int element(int elx, int ely) const { return ely + elx * nelY; }
  std::array<int, 8> edof(int e) const;
};

FEModel makeGridModel(int nelX, int nelY, double h = 1.0);

/// Stiffness system on the free dofs of a structured mesh. The sparsity
/// pattern and symbolic factorisation are built once and reused across
/// constitutive updates. Extra dofs may be clamped on top of the model's.
class StiffnessSystem {
 public:
  StiffnessSystem(const FEModel& model, const std::vector<int>& extraFixed = {});
  ~StiffnessSystem();
  StiffnessSystem(const StiffnessSystem&) = delete;
  StiffnessSystem& operator=(const StiffnessSystem&) = delete;

  /// Assembles K from per-element triangles and solves K U = F.
  Eigen::VectorXd solve(const TriField& C);
  /// Isotropic elements with per-element modulus scale.
  Eigen::VectorXd solveIsotropic(const Eigen::VectorXd& modulus, double nu);

  /// max(diag(K)) of the last assembly, before the penalty is added.
  double penaltyScale() const { return penaltyScale_; }
  /// Global dof whose diagonal attains penaltyScale().
  int penaltyScaleDof() const { return penaltyScaleDof_; }
  const FEModel& model() const { return model_; }
  const ElementBasis& basis() const { return KE0_; }
  int numFree() const { return static_cast<int>(freeDofs_.size()); }
  const std::vector<int>& freeDofs() const { return freeDofs_; }
  /// Lower triangle of the last assembled free-dof matrix.
  const Eigen::SparseMatrix<double>& lowerMatrix() const { return K_; }

 private:
  template <typename ElemK>
  Eigen::VectorXd assembleAndSolve(const ElemK& elemEntry);
  /// b - K x with long double accumulation; penalty entries use their unrounded values.
  Eigen::VectorXd residual(const Eigen::VectorXd& b, const Eigen::VectorXd& x) const;

  FEModel model_;
  ElementBasis KE0_;
  std::vector<int> freeDofs_;
  std::vector<int> freeIndex_;
  Eigen::SparseMatrix<double> K_;
  struct PenaltyEntry {
    Eigen::Index pos;
    int col;
    double weight;
    long double exact;  ///< elastic + penalty value before rounding to K_
  };
  std::vector<PenaltyEntry> penaltyEntries_;
  double penaltyScale_ = 0.0;
  int penaltyScaleDof_ = -1;
  struct Solver;
  std::unique_ptr<Solver> solver_;
};

double compliance(const Eigen::VectorXd& F, const Eigen::VectorXd& U);

/// U' Kp U with the unscaled penalty blocks; multiply by max(diag K) for the spring term.
double penaltyQuadratic(const FEModel& model, const Eigen::VectorXd& U);

/// Element-averaged strain energy density 0.5 * Ue' KE Ue / area.
Eigen::VectorXd strainEnergyDensity(const FEModel& model, const TriField& C, const Eigen::VectorXd& U);
Eigen::VectorXd strainEnergyDensityIsotropic(const FEModel& model, const Eigen::VectorXd& modulus,
                                             double nu, const Eigen::VectorXd& U);

/// Per-element quadratic forms Ue' KE0_k Ue, one row per base matrix.
TriField elementQuadraticForms(const FEModel& model, const ElementBasis& KE0, const Eigen::VectorXd& U);

/// First principal stress angle at each element centre, in [0, pi) with the
/// negative-angle shift; hydrostatic states give 0.
Eigen::VectorXd principalDirections(const FEModel& model, const Tri<double>& C, const Eigen::VectorXd& U);
double principalAngle(double sxx, double syy, double sxy);

}  // namespace dht
