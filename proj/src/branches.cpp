#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "dht/dehom.hpp"
#include "stencils.hpp"

namespace dht {

namespace {
constexpr double kPi = 3.14159265358979323846;

Eigen::Vector2d centreOf(const Grid& g, int iy, int ix) { return {g.x(ix), g.y(iy)}; }

void nearestCell(const Grid& g, const Eigen::Vector2d& p, int& iy, int& ix) {
  ix = std::clamp(static_cast<int>(std::floor(p.x() / g.h)), 0, g.nx - 1);
  iy = std::clamp(static_cast<int>(std::floor((g.lengthY() - p.y()) / g.h)), 0, g.ny - 1);
}

/// Tangential and normal offsets of d in the frame of unit normal n.
inline void frame(const Eigen::Vector2d& n, const Eigen::Vector2d& d, double& t, double& s) {
  t = d.x() * n.y() - d.y() * n.x();
  s = d.x() * n.x() + d.y() * n.y();
}

double smoothstep(double x) { return x * x * (3.0 - 2.0 * x); }
}  // namespace

std::vector<Eigen::Vector2d> locateBranchPoints(const ComplexField& G, const Mask& region, const Grid& g,
                                                double lambda) {
  const Field mag = G.abs();
  std::vector<double> inRegion;
  for (Eigen::Index k = 0; k < mag.size(); ++k)
    if (region(k)) inRegion.push_back(mag(k));
  if (inRegion.empty()) return {};
  const auto mid = inRegion.begin() + static_cast<std::ptrdiff_t>(inRegion.size() / 2);
  std::nth_element(inRegion.begin(), mid, inRegion.end());
  const double eps = 0.1 * *mid;

  struct Cand {
    double m;
    int iy, ix;
  };
  std::vector<Cand> cand;
  for (int ix = 1; ix + 1 < g.nx; ++ix)
    for (int iy = 1; iy + 1 < g.ny; ++iy) {
      if (!region(iy, ix) || !(mag(iy, ix) < eps)) continue;
      bool strict = true;
      for (int dx = -1; dx <= 1 && strict; ++dx)
        for (int dy = -1; dy <= 1; ++dy)
          if ((dx || dy) && !(mag(iy, ix) < mag(iy + dy, ix + dx))) {
            strict = false;
            break;
          }
      if (strict) cand.push_back({mag(iy, ix), iy, ix});
    }
  std::stable_sort(cand.begin(), cand.end(), [](const Cand& a, const Cand& b) { return a.m < b.m; });
  std::vector<Eigen::Vector2d> out;
  const double r2 = lambda * lambda / 16.0;
  for (const Cand& c : cand) {
    const Eigen::Vector2d p = centreOf(g, c.iy, c.ix);
    bool dup = false;
    for (const auto& q : out) dup = dup || (p - q).squaredNorm() <= r2;
    if (!dup) out.push_back(p);
  }
  return out;
}

BranchPoint disconnection(const Eigen::Vector2d& gamma, const Eigen::Vector2d& n, const Field& sine, const Grid& g,
                          double lambda) {
  BranchPoint b;
  b.gamma = gamma;
  b.normal = n.normalized();
  const double r = 0.5 * lambda;
  const auto w = detail::window(g, gamma.x(), gamma.y(), r);
  double sum = 0.0;
  int count = 0;
  for (int ix = w.ix0; ix <= w.ix1; ++ix)
    for (int iy = w.iy0; iy <= w.iy1; ++iy)
      if ((centreOf(g, iy, ix) - gamma).squaredNorm() <= r * r) {
        sum += (sine(iy, ix) + 1.0) / 2.0;
        ++count;
      }
  if (count == 0) {
    int iy, ix;
    nearestCell(g, gamma, iy, ix);
    sum = (sine(iy, ix) + 1.0) / 2.0;
    count = 1;
  }
  b.rho = std::clamp(1.0 - sum / count, 0.0, 1.0);

  auto probe = [&](const Eigen::Vector2d& p) { return 1.0 - (sampleBilinear(sine, g, p.x(), p.y()) + 1.0) / 2.0; };
  const Eigen::Vector2d step = lambda / 3.0 * b.normal;
  b.dir = probe(gamma + step) <= probe(gamma - step) ? b.normal : Eigen::Vector2d(-b.normal);
  b.centre = gamma + lambda / 3.0 * b.rho * b.dir;
  b.control = gamma + 2.0 * lambda / 3.0 * b.rho * b.dir;
  return b;
}

Field solidifyBranches(const Field& saw, const Field& sine, const std::vector<BranchPoint>& branches, const Grid& g,
                       double lambda) {
  Field out = sine;
  const double omega = 1.0 / lambda;
  const double s1 = 1.0 / (2.0 * kPi);
  for (const BranchPoint& b : branches) {
    const auto w = detail::window(g, b.centre.x(), b.centre.y(), 2.0 * lambda);
    for (int ix = w.ix0; ix <= w.ix1; ++ix)
      for (int iy = w.iy0; iy <= w.iy1; ++iy) {
        const Eigen::Vector2d d = centreOf(g, iy, ix) - b.centre;
        if (d.squaredNorm() > 4.0 * lambda * lambda) continue;
        double t, s;
        frame(b.normal, d, t, s);
        const double psi = out(iy, ix);
        const double Pi = std::exp(-4.0 * omega * omega * (s1 * t * t + s * s) * (1.0 - 0.5 * psi));
        const double tau = std::asin(std::clamp(psi, -1.0, 1.0)) / kPi + 0.5;
        const double shift = smoothstep(Pi) * kPi * (1.0 - tau);
        const double phi = saw(iy, ix);
        out(iy, ix) = std::max({psi, std::sin(phi + shift), std::sin(phi - shift)});
      }
  }
  return out;
}

Field pinchBranches(const Field& tau, const Field& w, const Orientation& n, const std::vector<BranchPoint>& branches,
                    const Grid& g, double lambda) {
  Field cur = tau;
  const double omega = 1.0 / lambda;
  const double s1 = 1.0 / (2.0 * kPi);
  for (const BranchPoint& b : branches) {
    const double R = 2.0 * lambda;
    const auto win = detail::window(g, b.centre.x(), b.centre.y(), R);
    // One extra ring so the derivative stencil sees real neighbours.
    const int ix0 = std::max(0, win.ix0 - 1), ix1 = std::min(g.nx - 1, win.ix1 + 1);
    const int iy0 = std::max(0, win.iy0 - 1), iy1 = std::min(g.ny - 1, win.iy1 + 1);
    const int wx = ix1 - ix0 + 1, wy = iy1 - iy0 + 1;
    for (int k = 1; k <= 3; ++k) {
      const double dk = std::min((1.0 - b.rho) / 2.0 * (k - 1), 1.0);
      const Eigen::Vector2d gk = (1.0 - dk) * b.centre + dk * b.control;
      const Eigen::Vector2d gt = (1.0 - dk * dk) * b.centre + dk * dk * b.control;
      const double sk = 3.0 / (4.0 * kPi) * (1.0 - (k - 1) / 2.0);

      Field Pi(wy, wx);
      for (int jx = 0; jx < wx; ++jx)
        for (int jy = 0; jy < wy; ++jy) {
          double t, s;
          frame(b.normal, centreOf(g, iy0 + jy, ix0 + jx) - gk, t, s);
          Pi(jy, jx) = std::exp(-omega * omega * (s1 * t * t + s * s));
        }
      Field vx, vy;
      detail::sobel(Pi, g.h, vx, vy);
      const double vmax = std::sqrt((vx.square() + vy.square()).maxCoeff());
      if (!(vmax > 0)) continue;

      const Field prev = cur.block(iy0, ix0, wy, wx);
      auto value = [&](int iy, int ix) {
        iy = std::clamp(iy, 0, g.ny - 1);
        ix = std::clamp(ix, 0, g.nx - 1);
        if (iy >= iy0 && iy <= iy1 && ix >= ix0 && ix <= ix1) return prev(iy - iy0, ix - ix0);
        return cur(iy, ix);
      };
      for (int jx = 0; jx < wx; ++jx)
        for (int jy = 0; jy < wy; ++jy) {
          const int ix = ix0 + jx, iy = iy0 + jy;
          const Eigen::Vector2d x = centreOf(g, iy, ix);
          if ((x - b.centre).squaredNorm() > R * R) continue;
          const double wl = std::clamp(w(iy, ix), 0.0, 1.0);
          double t, s;
          frame(b.normal, x - gt, t, s);
          const Eigen::Vector2d nx(n.nx(iy, ix), n.ny(iy, ix));
          const double delta = 2.0 * omega / (2.0 - wl) * std::abs(nx.dot(x - gk));
          const double local = std::exp(-2.0 * omega * omega * (sk * t * t + s * s) - delta);
          const double mag = lambda / 3.0 * (1.0 - wl) * local / vmax;
          if (mag == 0.0) continue;
          const Eigen::Vector2d src = x - mag * Eigen::Vector2d(vx(jy, jx), vy(jy, jx));
          const double u = std::clamp(src.x() / g.h - 0.5, 0.0, g.nx - 1.0);
          const double v = std::clamp((g.lengthY() - src.y()) / g.h - 0.5, 0.0, g.ny - 1.0);
          const int u0 = static_cast<int>(u), v0 = static_cast<int>(v);
          const double tu = u - u0, tv = v - v0;
          cur(iy, ix) = (1 - tv) * ((1 - tu) * value(v0, u0) + tu * value(v0, u0 + 1)) +
                        tv * ((1 - tu) * value(v0 + 1, u0) + tu * value(v0 + 1, u0 + 1));
        }
    }
  }
  return cur;
}

Field closeBranches(const ComplexField& Gi, const Mask& region, const Grid& gi, const ComplexField& Gf,
                    const Field& wf, const Orientation& nf, const Grid& gf, double lambda,
                    std::vector<BranchPoint>* found) {
  const Field saw = sawtooth(Gf);
  const Field sine = saw.sin();
  std::vector<BranchPoint> branches;
  const Field magF = Gf.abs();
  for (const Eigen::Vector2d& p : locateBranchPoints(Gi, region, gi, lambda)) {
    // Refine to the weakest fine cell within one coarse sample spacing.
    Eigen::Vector2d best = p;
    double bm = std::numeric_limits<double>::infinity();
    const auto w = detail::window(gf, p.x(), p.y(), gi.h);
    for (int ix = w.ix0; ix <= w.ix1; ++ix)
      for (int iy = w.iy0; iy <= w.iy1; ++iy) {
        const Eigen::Vector2d q = centreOf(gf, iy, ix);
        if ((q - p).squaredNorm() <= gi.h * gi.h && magF(iy, ix) < bm) {
          bm = magF(iy, ix);
          best = q;
        }
      }
    int iy, ix;
    nearestCell(gf, best, iy, ix);
    branches.push_back(disconnection(best, Eigen::Vector2d(nf.nx(iy, ix), nf.ny(iy, ix)), sine, gf, lambda));
  }
  Field tau = triangular(solidifyBranches(saw, sine, branches, gf, lambda));
  tau = pinchBranches(tau, wf, nf, branches, gf, lambda);
  if (found) *found = std::move(branches);
  return tau;
}

}  // namespace dht
