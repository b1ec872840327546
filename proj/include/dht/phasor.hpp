#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "dht/grids.hpp"

namespace dht {

/// Shape of the kernel Gaussians and the sampling filter.
struct PhasorParams {
  double omega = 1.0;            ///< waves per unit length
  double bandwidth = 2.0;        ///< kernel bandwidth
  double filterBandwidth = 2.0;  ///< sampling filter bandwidth
  double cutoff = 1.0;           ///< squared anisotropic distance limit
  double rx = 0.5;               ///< weight along the layer
  double ry = 2.0;               ///< weight across the layer
  double alignRadius = 1.0;      ///< neighbourhood radius of the phase alignment

  static PhasorParams fromGrids(const GridHierarchy& g);
};

/// One layer of phasor kernels. Positions are physical (y up).
struct PhasorKernels {
  Eigen::MatrixX2d x;
  Eigen::MatrixX2d n;
  Eigen::VectorXd phase;
  std::vector<char> active;
  std::vector<char> seed;   ///< boundary-aligned kernels, start at -pi/2
  std::vector<char> fixed;  ///< kept constant by the alignment; empty means none
  Eigen::VectorXd bdist;    ///< ordering key, ascending
  Eigen::VectorXd w;        ///< secondary ordering key, descending

  Eigen::Index size() const { return x.rows(); }
  /// Kernels at the coarse cell centres with all entries active and zero phase.
  static PhasorKernels onGrid(const Grid& g, const Eigen::MatrixX2d& n);
};

/// Squared distance with weight rx along the layer and ry across it.
inline double anisotropicDistance(const Eigen::Vector2d& n, const Eigen::Vector2d& d, double rx, double ry) {
  const double t = d.x() * n.y() - d.y() * n.x();
  const double s = d.x() * n.x() + d.y() * n.y();
  return rx * t * t + ry * s * s;
}

/// Layer-relabelling correction of a coarse frame field. Each element in a
/// single raster sweep takes whichever of the unmodified frame, the pi flip
/// and the two pi/2 rotations best matches the already visited active
/// neighbours; ties keep the current frame. The pi/2 rotations exchange the
/// layers of a two-layer frame, widths and activity included, so the
/// represented laminate is unchanged. N holds one Ne x 2 block per layer.
void filterVectorField(const Grid& coarse, std::vector<Eigen::MatrixXd>& N, Eigen::MatrixXd& w,
                       std::vector<std::vector<char>>& active);

/// Sequential phase alignment. Seeds start at -pi/2, everything else at 0,
/// and active kernels are visited in (bdist ascending, w descending) order.
void phaseAlignment(PhasorKernels& k, const PhasorParams& p, int iterations);

/// Complex field on grid g from the active kernels, filtered by the line
/// field nAt (sign-agnostic). Points outside `mask` stay zero.
ComplexField samplePhasor(const PhasorKernels& k, const PhasorParams& p, const Grid& g, const Orientation& nAt,
                          const Mask& mask);

/// Arg, sine and normalised triangular wave of a phasor field.
Field sawtooth(const ComplexField& G);
Field triangular(const Field& sine);

}  // namespace dht
