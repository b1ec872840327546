#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

namespace dht {

/// Scalar field on a cell-centred grid, stored (ny, nx) with row 0 at the top
/// of the domain. Column-major storage makes the linear index y-major, which
/// matches the element numbering of the FE mesh on the coarse grid.
using Field = Eigen::ArrayXXd;
using ComplexField = Eigen::ArrayXXcd;
using Mask = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;
using LabelField = Eigen::ArrayXXi;

struct Grid {
  int nx = 0, ny = 0;
  double h = 1.0;

  double lengthX() const { return nx * h; }
  double lengthY() const { return ny * h; }
  double x(int ix) const { return (ix + 0.5) * h; }
  /// Physical y points up; row 0 is the top row.
  double y(int iy) const { return lengthY() - (iy + 0.5) * h; }
  Field xCoords() const;
  Field yCoords() const;
};

struct GridHierarchy {
  int nelX = 0, nelY = 0;
  double wavelength = 0;  ///< lambda = dMin / wMin
  double omega = 0;       ///< one wave per wavelength
  double cutoff = 0;      ///< squared anisotropic distance beyond which kernels are truncated
  double bandwidth = 0;   ///< kernel and filter Gaussian bandwidth
  int fineScale = 0;      ///< fine cells per coarse cell
  Grid coarse, inter, interFine, fine;
};

/// Spacings lambda/10, lambda/20 and lambda/40 under a unit coarse grid.
GridHierarchy buildGridHierarchy(int nelX, int nelY, double dMin, double wMin);

enum class Interp { Linear, Cubic };

/// Resamples a cell-centred field between two grids spanning the same
/// domain; values outside the source cell centres are clamped.
template <typename Scalar>
Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic> interpolate(
    const Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic>& src, const Grid& from, const Grid& to,
    Interp method);

/// Samples a field at arbitrary physical points (x, y up) by bilinear interpolation.
double sampleBilinear(const Field& f, const Grid& g, double x, double y);

struct Orientation {
  Field nx, ny;
};

/// Interpolates a line field in the angle-doubled representation, so n and
/// -n are equivalent inputs. Cancelling neighbourhoods fall back to the
/// nearest source vector.
Orientation interpolateOrientation(const Orientation& src, const Grid& from, const Grid& to,
                                   Interp method = Interp::Linear);

/// Connected components of a mask; returns labels (0 = background, 1..count).
LabelField labelComponents(const Mask& mask, int connectivity, int* count = nullptr);

/// Binarises at `threshold` (strictly greater), keeps the largest 8-connected
/// component and every component touching `keep` (may be empty).
Field removeIslands(const Field& field, double threshold, const Mask& keep = Mask());

}  // namespace dht
