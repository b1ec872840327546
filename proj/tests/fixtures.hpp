#pragma once

#include <algorithm>
#include <cmath>
#include <random>

#include "dht/optimize.hpp"

namespace fixtures {

/// Small bridge-like problem without passive elements: vertical penalty
/// supports under both bottom corners, one fixed x dof, top-centre load.
inline dht::ModelDefinition smallModel(int nelX, int nelY) {
  dht::ModelDefinition m;
  m.fe = dht::makeGridModel(nelX, nelY);
  m.solid = dht::Mask::Constant(nelY, nelX, false);
  dht::PenaltyBlock left, right;
  for (int ix : {0, 1}) left.dofs.push_back(2 * m.fe.node(ix, nelY) + 1);
  for (int ix : {nelX - 1, nelX}) right.dofs.push_back(2 * m.fe.node(ix, nelY) + 1);
  m.fe.penalty = {left, right};
  m.fe.fixedDofs = {2 * m.fe.node(0, nelY)};
  m.fe.F(2 * m.fe.node(nelX / 2, 0) + 1) = -1.0;
  return m;
}

inline dht::Design randomDesign(const dht::Problem& prob, std::mt19937& rng) {
  std::uniform_real_distribution<double> U(0.15, 0.95), A(-3.0, 3.0);
  dht::Design x = prob.initialDesign();
  for (int e = 0; e < prob.numElements(); ++e) {
    x.w(e, 0) = U(rng);
    x.w(e, 1) = U(rng);
    x.s(e) = U(rng);
    x.a(e) = A(rng);
  }
  return x;
}

struct FdResult {
  int checked = 0, failed = 0;
  double worst = 0;  ///< largest |an - fd| / max(|fd| * rel, abs)
};

/// Central differences of phi over (w, s, a) and of the dilated volume over (w, s).
inline FdResult checkGradients(const dht::Problem& prob, dht::Design x, double beta, double step = 1e-6,
                               double rel = 1e-4, double abs = 1e-8) {
  const dht::Evaluation ev = dht::evaluateDesign(prob, x, beta, true);
  FdResult r;
  auto compare = [&](double an, double fd) {
    const double ratio = std::abs(an - fd) / std::max(rel * std::abs(fd), abs);
    r.worst = std::max(r.worst, ratio);
    ++r.checked;
    r.failed += ratio > 1.0;
  };
  auto probe = [&](double& v, double anPhi, double anF, bool withF) {
    const double o = v;
    v = o + step;
    const auto p = dht::evaluateDesign(prob, x, beta, false);
    v = o - step;
    const auto m = dht::evaluateDesign(prob, x, beta, false);
    v = o;
    compare(anPhi, (p.phi - m.phi) / (2 * step));
    if (withF) compare(anF, (p.fDilated - m.fDilated) / (2 * step));
  };
  for (int e = 0; e < prob.numElements(); ++e) {
    for (int i = 0; i < 2; ++i) probe(x.w(e, i), ev.dPhi.w(e, i), ev.dF.w(e, i), true);
    probe(x.s(e), ev.dPhi.s(e), ev.dF.s(e), true);
    probe(x.a(e), ev.dPhi.a(e), 0.0, false);
  }
  return r;
}

}  // namespace fixtures
