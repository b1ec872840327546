#include "dht/grids.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dht {

Field Grid::xCoords() const {
  Field X(ny, nx);
  for (int ix = 0; ix < nx; ++ix) X.col(ix).setConstant(x(ix));
  return X;
}

Field Grid::yCoords() const {
  Field Y(ny, nx);
  for (int iy = 0; iy < ny; ++iy) Y.row(iy).setConstant(y(iy));
  return Y;
}

GridHierarchy buildGridHierarchy(int nelX, int nelY, double dMin, double wMin) {
  if (nelX < 2 || nelY < 2) throw std::invalid_argument("coarse grid needs at least 2x2 elements");
  if (!(wMin > 0 && wMin <= 1)) throw std::invalid_argument("wMin must lie in (0, 1]");
  if (!(dMin > 0)) throw std::invalid_argument("dMin must be positive");
  const double lambda = dMin / wMin;
  if (lambda > std::min(nelX, nelY)) throw std::invalid_argument("wavelength dMin/wMin exceeds the domain");

  const double scale = 40.0 / lambda;
  const int fine = static_cast<int>(std::lround(scale));
  if (fine < 1 || std::abs(scale - fine) > 1e-9 * scale)
    throw std::invalid_argument("40*wMin/dMin must be an integer");
  if ((nelX * fine) % 4 != 0 || (nelY * fine) % 4 != 0)
    throw std::invalid_argument("fine grid dimensions must be divisible by 4");

  GridHierarchy g;
  g.nelX = nelX;
  g.nelY = nelY;
  g.wavelength = lambda;
  g.omega = 1.0 / lambda;
  g.bandwidth = 2.0 / (lambda * lambda);
  g.cutoff = std::log(1000.0) / (g.bandwidth * g.bandwidth / (2.0 * g.bandwidth));
  g.fineScale = fine;
  g.coarse = {nelX, nelY, 1.0};
  g.inter = {nelX * fine / 4, nelY * fine / 4, lambda / 10.0};
  g.interFine = {nelX * fine / 2, nelY * fine / 2, lambda / 20.0};
  g.fine = {nelX * fine, nelY * fine, lambda / 40.0};
  return g;
}

namespace {

struct Stencil {
  int i0 = 0;
  int n = 0;
  double w[4] = {0, 0, 0, 0};
};

// 1D weights mapping dst cell centres onto src cell centres (index space measured from the top/left).
std::vector<Stencil> stencils(int nsrc, double hsrc, int ndst, double hdst, Interp method) {
  std::vector<Stencil> st(ndst);
  for (int j = 0; j < ndst; ++j) {
    const double u = std::clamp((j + 0.5) * hdst / hsrc - 0.5, 0.0, static_cast<double>(nsrc - 1));
    Stencil& s = st[j];
    if (nsrc == 1) {
      s.n = 1;
      s.w[0] = 1.0;
      continue;
    }
    int i0 = std::min(static_cast<int>(std::floor(u)), nsrc - 2);
    if (method == Interp::Linear || nsrc < 4) {
      const double t = u - i0;
      s.i0 = i0;
      s.n = 2;
      s.w[0] = 1.0 - t;
      s.w[1] = t;
      continue;
    }
    const int start = std::clamp(i0 - 1, 0, nsrc - 4);
    s.i0 = start;
    s.n = 4;
    for (int a = 0; a < 4; ++a) {
      double l = 1.0;
      for (int b = 0; b < 4; ++b)
        if (b != a) l *= (u - (start + b)) / static_cast<double>(a - b);
      s.w[a] = l;
    }
  }
  return st;
}

}  // namespace

template <typename Scalar>
Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic> interpolate(
    const Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic>& src, const Grid& from, const Grid& to,
    Interp method) {
  using A = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  if (src.rows() != from.ny || src.cols() != from.nx) throw std::invalid_argument("field does not match its grid");
  const auto sx = stencils(from.nx, from.h, to.nx, to.h, method);
  const auto sy = stencils(from.ny, from.h, to.ny, to.h, method);

  A tmp(from.ny, to.nx);
  for (int j = 0; j < to.nx; ++j) {
    const Stencil& s = sx[j];
    tmp.col(j) = s.w[0] * src.col(s.i0);
    for (int a = 1; a < s.n; ++a) tmp.col(j) += s.w[a] * src.col(s.i0 + a);
  }
  A out(to.ny, to.nx);
  for (int i = 0; i < to.ny; ++i) {
    const Stencil& s = sy[i];
    out.row(i) = s.w[0] * tmp.row(s.i0);
    for (int a = 1; a < s.n; ++a) out.row(i) += s.w[a] * tmp.row(s.i0 + a);
  }
  return out;
}

template Eigen::ArrayXXd interpolate<double>(const Eigen::ArrayXXd&, const Grid&, const Grid&, Interp);
template Eigen::ArrayXXcd interpolate<std::complex<double>>(const Eigen::ArrayXXcd&, const Grid&, const Grid&,
                                                            Interp);

double sampleBilinear(const Field& f, const Grid& g, double x, double y) {
  const double u = std::clamp(x / g.h - 0.5, 0.0, static_cast<double>(g.nx - 1));
  const double v = std::clamp((g.lengthY() - y) / g.h - 0.5, 0.0, static_cast<double>(g.ny - 1));
  const int i0 = std::min(static_cast<int>(u), std::max(g.nx - 2, 0));
  const int j0 = std::min(static_cast<int>(v), std::max(g.ny - 2, 0));
  const int i1 = std::min(i0 + 1, g.nx - 1), j1 = std::min(j0 + 1, g.ny - 1);
  const double tu = u - i0, tv = v - j0;
  return (1 - tv) * ((1 - tu) * f(j0, i0) + tu * f(j0, i1)) + tv * ((1 - tu) * f(j1, i0) + tu * f(j1, i1));
}

Orientation interpolateOrientation(const Orientation& src, const Grid& from, const Grid& to, Interp method) {
  const ComplexField z = (src.nx.cast<std::complex<double>>() + std::complex<double>(0, 1) * src.ny).square();
  const ComplexField zi = interpolate<std::complex<double>>(z, from, to, method);
  Orientation out{Field(to.ny, to.nx), Field(to.ny, to.nx)};
  for (int ix = 0; ix < to.nx; ++ix)
    for (int iy = 0; iy < to.ny; ++iy) {
      const std::complex<double> v = zi(iy, ix);
      if (std::abs(v) < 1e-12) {
        const int sx = std::clamp(static_cast<int>(to.x(ix) / from.h), 0, from.nx - 1);
        const int sy = std::clamp(static_cast<int>((iy + 0.5) * to.h / from.h), 0, from.ny - 1);
        const double n = std::hypot(src.nx(sy, sx), src.ny(sy, sx));
        out.nx(iy, ix) = src.nx(sy, sx) / n;
        out.ny(iy, ix) = src.ny(sy, sx) / n;
        continue;
      }
      const double t = 0.5 * std::arg(v);
      out.nx(iy, ix) = std::cos(t);
      out.ny(iy, ix) = std::sin(t);
    }
  return out;
}

LabelField labelComponents(const Mask& mask, int connectivity, int* count) {
  if (connectivity != 4 && connectivity != 8) throw std::invalid_argument("connectivity must be 4 or 8");
  const int ny = static_cast<int>(mask.rows()), nx = static_cast<int>(mask.cols());
  LabelField lab = LabelField::Zero(ny, nx);
  std::vector<std::pair<int, int>> stack;
  int next = 0;
  for (int ix = 0; ix < nx; ++ix)
    for (int iy = 0; iy < ny; ++iy) {
      if (!mask(iy, ix) || lab(iy, ix)) continue;
      lab(iy, ix) = ++next;
      stack.assign(1, {iy, ix});
      while (!stack.empty()) {
        const auto [cy, cx] = stack.back();
        stack.pop_back();
        for (int dx = -1; dx <= 1; ++dx)
          for (int dy = -1; dy <= 1; ++dy) {
            if ((dx == 0 && dy == 0) || (connectivity == 4 && dx != 0 && dy != 0)) continue;
            const int qy = cy + dy, qx = cx + dx;
            if (qy < 0 || qy >= ny || qx < 0 || qx >= nx) continue;
            if (!mask(qy, qx) || lab(qy, qx)) continue;
            lab(qy, qx) = next;
            stack.emplace_back(qy, qx);
          }
      }
    }
  if (count) *count = next;
  return lab;
}

Field removeIslands(const Field& field, double threshold, const Mask& keep) {
  const Mask solid = field > threshold;
  int count = 0;
  const LabelField lab = labelComponents(solid, 8, &count);
  Field out = Field::Zero(field.rows(), field.cols());
  if (count == 0) return out;

  std::vector<long> size(count + 1, 0);
  std::vector<char> kept(count + 1, 0);
  const bool hasKeep = keep.size() == field.size();
  for (Eigen::Index k = 0; k < lab.size(); ++k) {
    size[lab(k)]++;
    if (hasKeep && keep(k)) kept[lab(k)] = 1;
  }
  const auto largest = std::max_element(size.begin() + 1, size.end()) - size.begin();
  kept[largest] = 1;
  for (Eigen::Index k = 0; k < lab.size(); ++k)
    if (lab(k) && kept[lab(k)]) out(k) = 1.0;
  return out;
}

}  // namespace dht
