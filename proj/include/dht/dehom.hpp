#pragma once

#include <Eigen/Dense>
#include <vector>

#include "dht/grids.hpp"
#include "dht/phasor.hpp"

namespace dht {

/// Layer-wise material indicators: 1 where a layer reaches wMin.
struct LayerIndicators {
  Eigen::MatrixXd coarse;     ///< Ne x L
  Field combinedCoarse;       ///< (nelY, nelX), any layer present
  std::vector<Field> inter;   ///< per layer, linear on the intermediate grid
  Field combinedInter;
};

LayerIndicators layerIndicators(const Eigen::MatrixXd& w, double wMin, const GridHierarchy& g);

struct BoundaryResult {
  Field domain;  ///< smoothed structural domain on the fine grid, 0/1
  Field shell;   ///< varying-thickness outer shell on the fine grid, 0/1
  Mask kernels;  ///< boundary kernels on the coarse grid
  Eigen::MatrixX2d direction;                ///< outward boundary normal per coarse element
  std::vector<std::vector<char>> aligned;    ///< per layer, kernels running along the boundary
  Eigen::MatrixXd bdist;                     ///< Ne x L, squared distance to aligned kernels, capped at 1
  ComplexField wave;                         ///< boundary phasor on the intermediate grid
};

/// Synthetic boundary layer. wFine holds the fine-grid widths of each layer.
BoundaryResult addBoundary(const GridHierarchy& g, const std::vector<Field>& wFine, double wMin,
                           const LayerIndicators& ind, const std::vector<Eigen::MatrixXd>& N);

struct BranchPoint {
  Eigen::Vector2d gamma = Eigen::Vector2d::Zero();
  Eigen::Vector2d normal = Eigen::Vector2d::UnitX();  ///< layer normal at gamma
  Eigen::Vector2d dir = Eigen::Vector2d::UnitX();     ///< closure direction
  Eigen::Vector2d centre = Eigen::Vector2d::Zero();   ///< gamma + lambda/3 rho dir
  Eigen::Vector2d control = Eigen::Vector2d::Zero();  ///< gamma + 2 lambda/3 rho dir
  double rho = 0;                                     ///< degree of disconnection
};

/// Strict local minima of |G| inside `region` below a tenth of the median
/// magnitude there, merged within lambda/4. Physical coordinates.
std::vector<Eigen::Vector2d> locateBranchPoints(const ComplexField& G, const Mask& region, const Grid& g,
                                                double lambda);

/// Degree of disconnection over the lambda-diameter disc and the closure
/// direction from single-point probes at gamma +- lambda/3 n.
BranchPoint disconnection(const Eigen::Vector2d& gamma, const Eigen::Vector2d& n, const Field& sine, const Grid& g,
                          double lambda);

/// Local phase shifts that join the branches; returns the updated sine.
Field solidifyBranches(const Field& saw, const Field& sine, const std::vector<BranchPoint>& branches, const Grid& g,
                       double lambda);

/// Three local pinch steps on the normalised triangular field tau.
Field pinchBranches(const Field& tau, const Field& w, const Orientation& n, const std::vector<BranchPoint>& branches,
                    const Grid& g, double lambda);

/// Connected normalised triangular wave on the finer grid gf.
Field closeBranches(const ComplexField& Gi, const Mask& region, const Grid& gi, const ComplexField& Gf,
                    const Field& wf, const Orientation& nf, const Grid& gf, double lambda,
                    std::vector<BranchPoint>* found = nullptr);

struct DehomOptions {
  int alignItr = 20;
  bool boundary = true;
  bool closeBranches = true;
  bool removeIslands = true;  ///< drop members not connected to the main structure
  Mask passiveSolid;  ///< coarse elements forced solid; may be empty
};

struct DehomResult {
  Field rho;               ///< fine grid, 0/1
  std::vector<Field> tau;  ///< per layer normalised triangular wave on the interFine grid
  Field domain, shell;
  std::vector<std::vector<BranchPoint>> branches;
  double volume = 0;
};

/// Realises a multi-scale design with L layers; w is Ne x L, N holds one
/// Ne x 2 block of unit normals per layer.
DehomResult dehomogenise(const Eigen::MatrixXd& w, const std::vector<Eigen::MatrixXd>& N, double wMin,
                         const GridHierarchy& g, const DehomOptions& opt = {});

/// Coarse mask replicated onto a grid with `scale` cells per coarse cell.
Mask upsampleMask(const Mask& coarse, int scale);

}  // namespace dht
