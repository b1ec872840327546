#pragma once

#include <array>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "dht/fem.hpp"
#include "dht/models.hpp"
#include "dht/rank2.hpp"
#include "dht/regularize.hpp"

namespace dht {

/// Raw design variables: widths (one column per layer), indicator, orientation.
struct Design {
  Eigen::MatrixXd w;
  Eigen::VectorXd s;
  Eigen::VectorXd a;
};

struct OptimizationParams {
  double volFrac = 0.3;
  double rMin = 2.0;
  double wMin = 0.1;
  double wMax = 1.0;
  double alphaRsc = 2.0;
  double gammaS = 1.0 / 20.0;
  std::array<double, 3> eta = {0.6, 0.5, 0.4};  ///< eroded, intermediate, dilated
  int maxIter = 300;
  double stopCrit = 0.01;
  double betaMax = 32.0;
  int betaInterval = 25;
  double moveW = 0.2;
  double moveA = 0.05 * 2.0 * 3.14159265358979323846;
  double angleScale = 0.1;  ///< asymptote scale of the angle variables, radians
  double aMin = -4.0 * 3.14159265358979323846;
  double aMax = 4.0 * 3.14159265358979323846;
};

enum Stage { Eroded = 0, Intermediate = 1, Dilated = 2 };

/// Everything that stays fixed during an optimisation run.
class Problem {
 public:
  Problem(ModelDefinition model, OptimizationParams params, MaterialConstants mat);

  const ModelDefinition& model() const { return model_; }
  const OptimizationParams& params() const { return params_; }
  const MaterialConstants& material() const { return mat_; }
  const Eigen::SparseMatrix<double>& Hw() const { return Hw_; }
  const Eigen::SparseMatrix<double>& Hs() const { return Hs_; }
  StiffnessSystem& system() const { return *system_; }
  int numElements() const { return model_.fe.numElements(); }

  /// Compliance of the all-solid isotropic domain.
  double solidCompliance() const { return jSolid_; }
  double gamma0() const { return gamma0_; }
  void setGamma0(double g) { gamma0_ = g; }

  /// Prescribed values written into a design.
  void imposePassive(Design& x) const;
  Design initialDesign() const;

 private:
  ModelDefinition model_;
  OptimizationParams params_;
  MaterialConstants mat_;
  Eigen::SparseMatrix<double> Hw_, Hs_;
  std::unique_ptr<StiffnessSystem> system_;
  Eigen::VectorXd solidU_;
  double jSolid_ = 0, gamma0_ = 1;
};

struct Evaluation {
  Eigen::MatrixXd wTilde;
  Eigen::VectorXd sTilde;
  std::array<Eigen::VectorXd, 3> sBar, dsBar;
  std::array<Eigen::MatrixXd, 3> wBar;
  Eigen::VectorXd a;
  Eigen::MatrixXd mu;  ///< eroded multi-scale widths
  TriField C;
  Eigen::VectorXd U;
  double J = 0, S = 0, phi = 0;
  double fDilated = 0, fIntermediate = 0, fEroded = 0;
  bool hasGradient = false;
  Design dPhi;  ///< d(Phi)/d(raw design)
  Design dF;    ///< d(f_dilated)/d(raw design); a entries are zero
};

/// Filters, projects and analyses a design at sharpness beta.
Evaluation evaluateDesign(const Problem& prob, const Design& x, double beta, bool gradients = true);

/// Compliance analysis of given physical widths and angles.
struct Analysis {
  TriField C;
  Eigen::VectorXd U;
  double J = 0;
};
Analysis analyseWidths(const Problem& prob, const Eigen::MatrixXd& wBar, const Eigen::VectorXd& a);

double betaAt(int loop, const OptimizationParams& p);

/// Moving-asymptote variant of the optimality-criteria update, driven by one
/// linearised volume constraint over the variables that carry it.
class OcUpdater {
 public:
  struct Bounds {
    Eigen::VectorXd lower, upper, move;
    Eigen::VectorXd scale;  ///< asymptote scale; defaults to upper - lower
  };
  explicit OcUpdater(Bounds b);

  /// x in place. g0: objective gradient, g1: constraint gradient, c: constraint value (<= 0 feasible).
  /// Returns the constraint value predicted by the linearisation.
  double update(Eigen::VectorXd& x, const Eigen::VectorXd& g0, const Eigen::VectorXd& g1, double c);
  void restart() { iter_ = 0; }

 private:
  Bounds b_;
  Eigen::VectorXd lowAsy_, uppAsy_, x1_, x2_;
  int iter_ = 0;
};

struct IterationRecord {
  int itr = 0;
  double obj = 0, J = 0, S = 0, vol = 0, change = 0, time = 0;
  double beta = 1;
  double dehomVol = -1, dehomTime = 0;
};

/// Coarse-scale result: physical intermediate widths and per-layer normals.
struct MultiScaleResult {
  int nelX = 0, nelY = 0;
  Eigen::MatrixXd w;               ///< Ne x L
  std::vector<Eigen::MatrixXd> N;  ///< L entries of Ne x 2
  double f = 0, J = 0;
  int layers() const { return static_cast<int>(w.cols()); }
};

/// Layer normals from the laminate angle: layer 1 is stiff along the local x axis.
std::vector<Eigen::MatrixXd> layerNormals(const Eigen::VectorXd& a);

struct OptimizationResult {
  MultiScaleResult result;
  Design design;
  std::vector<IterationRecord> history;
  double mnd = 0;  ///< mean 4 s(1-s) of the intermediate indicator
};

using DehomHook = std::function<double(const MultiScaleResult&)>;
using IterationCallback = std::function<void(const IterationRecord&)>;

MultiScaleResult packResult(const Problem& prob, const Design& x, double beta);

OptimizationResult runOptimization(const Problem& prob, const DehomHook& hook = {}, int dehomFrq = 0,
                                   const IterationCallback& onIteration = {});

}  // namespace dht
