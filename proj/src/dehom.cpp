#include "dht/dehom.hpp"

#include <algorithm>
#include <stdexcept>

namespace dht {

namespace {

Field asField(const Eigen::VectorXd& v, int ny, int nx) { return Eigen::Map<const Field>(v.data(), ny, nx); }

}  // namespace

Mask upsampleMask(const Mask& coarse, int scale) {
  Mask out(coarse.rows() * scale, coarse.cols() * scale);
  for (Eigen::Index ix = 0; ix < out.cols(); ++ix)
    for (Eigen::Index iy = 0; iy < out.rows(); ++iy) out(iy, ix) = coarse(iy / scale, ix / scale);
  return out;
}

DehomResult dehomogenise(const Eigen::MatrixXd& wIn, const std::vector<Eigen::MatrixXd>& NIn, double wMin,
                         const GridHierarchy& g, const DehomOptions& opt) {
  const int L = static_cast<int>(wIn.cols());
  const int ny = g.nelY, nx = g.nelX;
  const Eigen::Index ne = static_cast<Eigen::Index>(nx) * ny;
  if (L < 1 || static_cast<int>(NIn.size()) != L || wIn.rows() != ne)
    throw std::invalid_argument("widths and normals do not match the grid");
  for (const auto& n : NIn)
    if (n.rows() != ne || n.cols() != 2) throw std::invalid_argument("normals must be Ne x 2 per layer");

  Eigen::MatrixXd w = wIn;
  std::vector<Eigen::MatrixXd> N = NIn;
  for (auto& n : N) n.rowwise().normalize();
  std::vector<std::vector<char>> active(L, std::vector<char>(ne, 0));
  for (int i = 0; i < L; ++i)
    for (Eigen::Index e = 0; e < ne; ++e) active[i][e] = w(e, i) >= wMin * (1 - 1e-6) && w(e, i) < 1 - 1e-3;
  filterVectorField(g.coarse, N, w, active);

  const LayerIndicators ind = layerIndicators(w, wMin, g);
  std::vector<Orientation> nI(L), nIf(L);
  std::vector<Field> wI(L), wIf(L), wF(L);
  for (int i = 0; i < L; ++i) {
    const Orientation c{asField(N[i].col(0), ny, nx), asField(N[i].col(1), ny, nx)};
    nI[i] = interpolateOrientation(c, g.coarse, g.inter);
    nIf[i] = interpolateOrientation(c, g.coarse, g.interFine);
    // Outside the structure the widths are extended at wMin so the
    // interpolated thickness does not collapse at the boundary.
    Eigen::VectorXd wc = w.col(i);
    for (Eigen::Index e = 0; e < ne; ++e)
      if (ind.combinedCoarse(e) <= 0) wc(e) = wMin;
    const Field cw = asField(wc, ny, nx);
    wI[i] = interpolate<double>(cw, g.coarse, g.inter, Interp::Linear);
    wIf[i] = interpolate<double>(cw, g.coarse, g.interFine, Interp::Linear);
    wF[i] = interpolate<double>(cw, g.coarse, g.fine, Interp::Linear);
  }

  DehomResult r;
  BoundaryResult bnd;
  if (opt.boundary) {
    bnd = addBoundary(g, wF, wMin, ind, N);
    r.domain = bnd.domain;
    r.shell = bnd.shell;
  } else {
    r.domain = (interpolate<double>(ind.combinedCoarse, g.coarse, g.fine, Interp::Linear) > 0.5).cast<double>();
    r.shell = Field::Zero(g.fine.ny, g.fine.nx);
  }

  const PhasorParams p = PhasorParams::fromGrids(g);
  Field rho = Field::Zero(g.fine.ny, g.fine.nx);
  for (int i = 0; i < L; ++i) rho = rho.max(wF[i]);
  rho = (rho >= 0.99).cast<double>();
  r.branches.resize(L);
  for (int i = 0; i < L; ++i) {
    PhasorKernels k = PhasorKernels::onGrid(g.coarse, N[i]);
    k.active = active[i];
    k.w = w.col(i);
    if (opt.boundary) {
      k.seed = bnd.aligned[i];
      k.bdist = bnd.bdist.col(i);
    }
    phaseAlignment(k, p, opt.alignItr);

    const Field nonSolid = (wI[i] < 1 - 1e-3).cast<double>() * ind.inter[i];
    const ComplexField Gi = samplePhasor(k, p, g.inter, nI[i], nonSolid >= 0.01);
    const ComplexField Gif = interpolate<std::complex<double>>(Gi, g.inter, g.interFine, Interp::Cubic);
    Field tau;
    if (opt.closeBranches)
      tau = closeBranches(Gi, nonSolid >= 0.5, g.inter, Gif, wIf[i], nIf[i], g.interFine, g.wavelength,
                          &r.branches[i]);
    else
      tau = triangular(sawtooth(Gif).sin());
    const Field tauF = interpolate<double>(tau, g.interFine, g.fine, Interp::Linear);
    rho += (tauF >= 1.0 - wF[i]).cast<double>();
    r.tau.push_back(std::move(tau));
  }

  rho = (rho * r.domain + r.shell).min(1.0);
  Mask keep;
  if (opt.passiveSolid.size() == ne) {
    keep = upsampleMask(opt.passiveSolid, g.fineScale);
    rho = keep.select(1.0, rho);
  }
  r.rho = opt.removeIslands ? removeIslands(rho, 0.1, keep) : (rho > 0.1).cast<double>();
  r.volume = r.rho.mean();
  return r;
}

}  // namespace dht
