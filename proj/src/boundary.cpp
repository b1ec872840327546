#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "dht/dehom.hpp"
#include "stencils.hpp"

namespace dht {

namespace {
constexpr double kPi = 3.14159265358979323846;

Field asField(const Eigen::VectorXd& v, int ny, int nx) { return Eigen::Map<const Field>(v.data(), ny, nx); }
}  // namespace

LayerIndicators layerIndicators(const Eigen::MatrixXd& w, double wMin, const GridHierarchy& g) {
  const int L = static_cast<int>(w.cols());
  const int ny = g.nelY, nx = g.nelX;
  if (w.rows() != static_cast<Eigen::Index>(nx) * ny) throw std::invalid_argument("widths do not match the grid");
  LayerIndicators ind;
  ind.coarse = (w.array() >= wMin * (1 - 1e-6)).cast<double>();
  ind.combinedCoarse = Field::Zero(ny, nx);
  for (int i = 0; i < L; ++i) {
    const Field c = asField(ind.coarse.col(i), ny, nx);
    ind.combinedCoarse = ind.combinedCoarse.max(c);
    ind.inter.push_back(interpolate<double>(c, g.coarse, g.inter, Interp::Linear));
  }
  ind.combinedInter = interpolate<double>(ind.combinedCoarse, g.coarse, g.inter, Interp::Linear);
  return ind;
}

BoundaryResult addBoundary(const GridHierarchy& g, const std::vector<Field>& wFine, double wMin,
                           const LayerIndicators& ind, const std::vector<Eigen::MatrixXd>& N) {
  const int ny = g.nelY, nx = g.nelX, L = static_cast<int>(N.size());
  const Eigen::Index ne = static_cast<Eigen::Index>(nx) * ny;
  BoundaryResult out;

  // Filtered structural indicator and its gradient on the coarse grid.
  const Field solid = (ind.combinedCoarse >= 0.5).cast<double>();
  const Field idsp = detail::gaussianBlur(solid, 1.0);
  Field vx, vy;
  detail::sobel(idsp, g.coarse.h, vx, vy);
  const Field vmag = vx.square() + vy.square();
  const Mask potential = vmag > 1e-3;
  const double vmax = vmag.maxCoeff();
  out.kernels = potential && (vmag >= 0.25 * vmax);

  // Outward normals, smoothed among potential kernels. Pairs closer to
  // orthogonal than parallel contribute less, opposite sides not at all.
  Eigen::VectorXd theta(ne);
  for (Eigen::Index e = 0; e < ne; ++e) theta(e) = std::atan2(-vy(e), -vx(e));
  for (int sweep = 0; sweep < 5; ++sweep)
    for (int ix = 0; ix < nx; ++ix)
      for (int iy = 0; iy < ny; ++iy) {
        const Eigen::Index e = iy + static_cast<Eigen::Index>(ix) * ny;
        if (!potential(e)) continue;
        std::complex<double> sum = std::polar(1.0, theta(e));
        for (int dx = -1; dx <= 1; ++dx)
          for (int dy = -1; dy <= 1; ++dy) {
            const int qx = ix + dx, qy = iy + dy;
            if ((dx == 0 && dy == 0) || qx < 0 || qy < 0 || qx >= nx || qy >= ny) continue;
            const Eigen::Index f = qy + static_cast<Eigen::Index>(qx) * ny;
            if (!potential(f)) continue;
            const double c = std::max(0.0, std::cos(theta(e) - theta(f)));
            sum += c * c * std::exp(-0.5 * (dx * dx + dy * dy)) * std::polar(1.0, theta(f));
          }
        theta(e) = std::arg(sum);
      }
  out.direction.resize(ne, 2);
  out.direction.col(0) = theta.array().cos();
  out.direction.col(1) = theta.array().sin();

  // Boundary wave at a lower frequency; the phase shift places the crest
  // relative to the filtered indicator level at each kernel.
  PhasorParams p = PhasorParams::fromGrids(g);
  const double omegaB = std::min(1.0 / (8.0 * g.coarse.h), g.omega / 2.0);
  const double ratio = omegaB / g.omega;
  p.omega = omegaB;
  PhasorKernels bk = PhasorKernels::onGrid(g.coarse, out.direction);
  for (Eigen::Index e = 0; e < ne; ++e) {
    bk.active[e] = out.kernels(e);
    bk.phase(e) = kPi * ((1.0 - idsp(e)) * 0.5 + 1.0 / 3.0);
  }
  const Orientation coarseDir{asField(out.direction.col(0), ny, nx), asField(out.direction.col(1), ny, nx)};
  const Orientation interDir = interpolateOrientation(coarseDir, g.coarse, g.inter);
  const Field potI = interpolate<double>(potential.cast<double>(), g.coarse, g.inter, Interp::Linear);
  out.wave = samplePhasor(bk, p, g.inter, interDir, potI > 0.0);

  // Cut field: inside the transition band the wave decides the edge.
  const Field& indI = ind.combinedInter;
  const Field saw = sawtooth(out.wave);
  const Field positive = (saw.sin() > 0.1).cast<double>() * (indI * (1.0 - indI)).max(0.0).sqrt();
  const Field cutfi = 10.0 * positive * (saw + kPi / 2).sin() + indI;
  out.domain = (interpolate<double>(cutfi, g.inter, g.fine, Interp::Linear) > 0.5).cast<double>();

  // Shell: crest band of the boundary wave, as thick as the local layers.
  const ComplexField waveF = interpolate<std::complex<double>>(out.wave, g.inter, g.fine, Interp::Linear);
  const Field sawF = sawtooth(waveF);
  Field wmax = Field::Constant(g.fine.ny, g.fine.nx, wMin);
  for (const Field& wf : wFine) wmax = wmax.max(wf);
  const int fy = g.fine.ny, fx = g.fine.nx;
  out.shell = Field::Zero(fy, fx);
  for (int ix = 0; ix < fx; ++ix)
    for (int iy = 0; iy < fy; ++iy) {
      if (out.domain(iy, ix) <= 0) continue;
      bool edge = false;
      if (iy > 0 && out.domain(iy - 1, ix) <= 0) edge = true;
      if (iy + 1 < fy && out.domain(iy + 1, ix) <= 0) edge = true;
      if (ix > 0 && out.domain(iy, ix - 1) <= 0) edge = true;
      if (ix + 1 < fx && out.domain(iy, ix + 1) <= 0) edge = true;
      const double wave = 2.0 / kPi * std::asin(std::sin(sawF(iy, ix)));
      const double th = 2.0 * ratio * std::min(wmax(iy, ix), 0.99);
      if (std::max(wave, edge ? 1.0 : -1.0) >= 1.0 - th) out.shell(iy, ix) = 1.0;
    }

  // Layer kernels running along the boundary seed the phase alignment.
  Eigen::MatrixXd adot(ne, L);
  for (int i = 0; i < L; ++i) adot.col(i) = (N[i].array() * out.direction.array()).rowwise().sum().abs();
  const Eigen::VectorXd nd = adot.rowwise().maxCoeff();
  double ndMax = 0.0;
  for (Eigen::Index e = 0; e < ne; ++e)
    if (out.kernels(e)) ndMax = std::max(ndMax, nd(e));
  out.aligned.assign(L, std::vector<char>(ne, 0));
  out.bdist = Eigen::MatrixXd::Ones(ne, L);
  const Field X = g.coarse.xCoords(), Y = g.coarse.yCoords();
  for (int i = 0; i < L; ++i) {
    std::vector<Eigen::Index> seeds;
    for (Eigen::Index e = 0; e < ne; ++e)
      if (out.kernels(e) && adot(e, i) == nd(e) && adot(e, i) > 0.95 * ndMax) {
        out.aligned[i][e] = 1;
        seeds.push_back(e);
      }
    for (Eigen::Index e = 0; e < ne; ++e)
      for (Eigen::Index f : seeds) {
        const double d2 = (X(e) - X(f)) * (X(e) - X(f)) + (Y(e) - Y(f)) * (Y(e) - Y(f));
        out.bdist(e, i) = std::min(out.bdist(e, i), d2);
      }
  }
  return out;
}

}  // namespace dht
