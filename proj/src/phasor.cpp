#include "dht/phasor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace dht {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

PhasorParams PhasorParams::fromGrids(const GridHierarchy& g) {
  PhasorParams p;
  p.omega = g.omega;
  p.bandwidth = g.bandwidth;
  p.filterBandwidth = g.bandwidth;
  p.cutoff = g.cutoff;
  p.alignRadius = 1.5 * g.wavelength;
  return p;
}

PhasorKernels PhasorKernels::onGrid(const Grid& g, const Eigen::MatrixX2d& n) {
  const Eigen::Index ne = static_cast<Eigen::Index>(g.nx) * g.ny;
  if (n.rows() != ne) throw std::invalid_argument("normals do not match the grid");
  PhasorKernels k;
  k.x.resize(ne, 2);
  for (int ix = 0; ix < g.nx; ++ix)
    for (int iy = 0; iy < g.ny; ++iy) {
      const Eigen::Index e = iy + static_cast<Eigen::Index>(ix) * g.ny;
      k.x(e, 0) = g.x(ix);
      k.x(e, 1) = g.y(iy);
    }
  k.n = n;
  k.phase = Eigen::VectorXd::Zero(ne);
  k.active.assign(ne, 1);
  k.seed.assign(ne, 0);
  k.bdist = Eigen::VectorXd::Ones(ne);
  k.w = Eigen::VectorXd::Zero(ne);
  return k;
}

void filterVectorField(const Grid& coarse, std::vector<Eigen::MatrixXd>& N, Eigen::MatrixXd& w,
                       std::vector<std::vector<char>>& active) {
  const int L = static_cast<int>(N.size());
  const int nx = coarse.nx, ny = coarse.ny;
  if (w.cols() != L || static_cast<int>(active.size()) != L) throw std::invalid_argument("layer count mismatch");
  const int ncand = L == 2 ? 4 : 2;

  // Candidate c for element e: layer i takes sign * N[src[i]].
  auto candidate = [&](int c, int i, int& src) {
    src = i;
    switch (c) {
      case 1: return -1.0;
      case 2: src = 1 - i; return i == 0 ? -1.0 : 1.0;
      case 3: src = 1 - i; return i == 0 ? 1.0 : -1.0;
      default: return 1.0;
    }
  };

  for (int ix = 0; ix < nx; ++ix)
    for (int iy = 0; iy < ny; ++iy) {
      const Eigen::Index e = iy + static_cast<Eigen::Index>(ix) * ny;
      bool any = false;
      for (int i = 0; i < L; ++i) any = any || active[i][e];
      if (!any) continue;
      double best = 0.0;
      int bestC = 0;
      for (int c = 0; c < ncand; ++c) {
        double score = 0.0;
        for (int dx = -1; dx <= 1; ++dx)
          for (int dy = -1; dy <= 1; ++dy) {
            const int qx = ix + dx, qy = iy + dy;
            if (qx < 0 || qy < 0 || qx >= nx || qy >= ny) continue;
            const Eigen::Index f = qy + static_cast<Eigen::Index>(qx) * ny;
            if (f >= e) continue;
            for (int i = 0; i < L; ++i) {
              int src;
              const double sgn = candidate(c, i, src);
              if (!active[src][e] || !active[i][f]) continue;
              score += sgn * N[src].row(e).dot(N[i].row(f));
            }
          }
        if (c == 0) {
          best = score;
        } else if (score > best + 1e-12) {
          best = score;
          bestC = c;
        }
      }
      if (bestC == 0) continue;
      std::vector<Eigen::RowVector2d> nn(L);
      std::vector<double> ww(L);
      std::vector<char> aa(L);
      for (int i = 0; i < L; ++i) {
        int src;
        const double sgn = candidate(bestC, i, src);
        nn[i] = sgn * N[src].row(e);
        ww[i] = w(e, src);
        aa[i] = active[src][e];
      }
      for (int i = 0; i < L; ++i) {
        N[i].row(e) = nn[i];
        w(e, i) = ww[i];
        active[i][e] = aa[i];
      }
    }
}

void phaseAlignment(PhasorKernels& k, const PhasorParams& p, int iterations) {
  const Eigen::Index n = k.size();
  for (Eigen::Index e = 0; e < n; ++e) k.phase(e) = k.seed.size() == static_cast<size_t>(n) && k.seed[e] ? -kPi / 2 : 0.0;
  if (iterations <= 0) return;

  std::vector<Eigen::Index> order;
  for (Eigen::Index e = 0; e < n; ++e)
    if (k.active[e]) order.push_back(e);
  const bool hasB = k.bdist.size() == n, hasW = k.w.size() == n;
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    const double da = hasB ? k.bdist(a) : 0.0, db = hasB ? k.bdist(b) : 0.0;
    if (da != db) return da < db;
    const double wa = hasW ? k.w(a) : 0.0, wb = hasW ? k.w(b) : 0.0;
    return wa > wb;
  });

  // Neighbour contributions are fixed apart from the phases.
  struct Nb {
    Eigen::Index f;
    std::complex<double> weight;
    double ort;
  };
  const double R = p.alignRadius, R2 = R * R;
  std::vector<std::vector<Nb>> nbs(n);
  for (Eigen::Index e : order) {
    const Eigen::Vector2d xe = k.x.row(e).transpose(), ne = k.n.row(e).transpose();
    for (Eigen::Index f : order) {
      if (f == e) continue;
      const Eigen::Vector2d d = xe - k.x.row(f).transpose();
      if (d.squaredNorm() > R2 / std::min(p.rx, p.ry)) continue;
      if (anisotropicDistance(ne, d, p.rx, p.ry) > R2) continue;
      const Eigen::Vector2d nf = k.n.row(f).transpose();
      const double ort = ne.dot(nf) < 0 ? -1.0 : 1.0;
      const double arg = 2.0 * kPi * p.omega * ort * nf.dot(d);
      nbs[e].push_back({f, std::exp(-d.squaredNorm() / R) * std::polar(1.0, arg), ort});
    }
  }

  const bool hasFixed = k.fixed.size() == static_cast<size_t>(n);
  for (int it = 0; it < iterations; ++it)
    for (Eigen::Index e : order) {
      if (hasFixed && k.fixed[e]) continue;
      if (nbs[e].empty()) continue;
      std::complex<double> sum = 0.0;
      for (const Nb& b : nbs[e]) sum += b.weight * std::polar(1.0, b.ort * k.phase(b.f) + kPi * (1.0 - b.ort) / 2.0);
      if (std::abs(sum) > 0.0) k.phase(e) = std::arg(sum);
    }
}

ComplexField samplePhasor(const PhasorKernels& k, const PhasorParams& p, const Grid& g, const Orientation& nAt,
                          const Mask& mask) {
  ComplexField G = ComplexField::Zero(g.ny, g.nx);
  const double a = p.filterBandwidth, b = p.bandwidth;
  const double babpainv = a * b / (a + b), bpainv = 1.0 / (a + b), abpainv = a / (a + b);
  const double reach = std::sqrt(p.cutoff / std::min(p.rx, p.ry));
  const bool useMask = mask.size() == G.size();
  const double H = g.lengthY();

  for (Eigen::Index e = 0; e < k.size(); ++e) {
    if (!k.active[e]) continue;
    const double xe = k.x(e, 0), ye = k.x(e, 1), Dx = k.n(e, 0), Dy = k.n(e, 1);
    const int ix0 = std::max(0, static_cast<int>(std::floor((xe - reach) / g.h - 0.5)));
    const int ix1 = std::min(g.nx - 1, static_cast<int>(std::ceil((xe + reach) / g.h - 0.5)));
    const int iy0 = std::max(0, static_cast<int>(std::floor((H - ye - reach) / g.h - 0.5)));
    const int iy1 = std::min(g.ny - 1, static_cast<int>(std::ceil((H - ye + reach) / g.h - 0.5)));
    for (int ix = ix0; ix <= ix1; ++ix) {
      const double xd = g.x(ix) - xe;
      for (int iy = iy0; iy <= iy1; ++iy) {
        if (useMask && !mask(iy, ix)) continue;
        const double yd = g.y(iy) - ye;
        const double along = Dx * xd + Dy * yd, across = xd * Dy - yd * Dx;
        const double s = p.rx * across * across + p.ry * along * along;
        if (!(s < p.cutoff)) continue;
        double mx = nAt.nx(iy, ix), my = nAt.ny(iy, ix);
        if (mx * Dx + my * Dy < 0) {
          mx = -mx;
          my = -my;
        }
        const double ljx = p.omega * (Dx - mx), ljy = p.omega * (Dy - my);
        const double mag = -s * babpainv - kPi * kPi * (ljx * ljx + ljy * ljy) * bpainv;
        const double arg = 2.0 * (kPi * p.omega * along + (ljx * xd + ljy * yd) * abpainv) + k.phase(e);
        G(iy, ix) += std::polar(std::exp(mag), arg);
      }
    }
  }
  return G;
}

Field sawtooth(const ComplexField& G) {
  return G.unaryExpr([](const std::complex<double>& z) { return std::atan2(z.imag(), z.real()); });
}

Field triangular(const Field& sine) {
  return sine.unaryExpr([](double s) { return std::asin(std::clamp(s, -1.0, 1.0)) / kPi + 0.5; });
}

}  // namespace dht
