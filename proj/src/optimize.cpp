#include "dht/optimize.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

namespace dht {

Problem::Problem(ModelDefinition model, OptimizationParams params, MaterialConstants mat)
    : model_(std::move(model)), params_(params), mat_(mat) {
  if (!(params_.wMin > 0 && params_.wMin <= params_.wMax && params_.wMax <= 1))
    throw std::invalid_argument("widths must satisfy 0 < wMin <= wMax <= 1");
  if (!(params_.volFrac > 0 && params_.volFrac <= 1)) throw std::invalid_argument("volFrac must lie in (0, 1]");
  if (!(params_.rMin > 0)) throw std::invalid_argument("rMin must be positive");
  validatePassive(model_);
  mat_.nu = model_.nu;
  const int nx = model_.fe.nelX, ny = model_.fe.nelY;
  Hw_ = coneFilter(nx, ny, params_.rMin);
  Hs_ = coneFilter(nx, ny, params_.alphaRsc * params_.rMin);
  system_ = std::make_unique<StiffnessSystem>(model_.fe);
  solidU_ = system_->solveIsotropic(Eigen::VectorXd::Ones(numElements()), mat_.nu);
  jSolid_ = compliance(model_.fe.F, solidU_);
  gamma0_ = 1.0 / (jSolid_ * params_.volFrac);
}

void Problem::imposePassive(Design& x) const {
  for (int i = 0; i < x.w.cols() && i < 2; ++i) model_.passive.w[i].impose(x.w.col(i));
  model_.passive.s.impose(x.s);
  model_.passive.a.impose(x.a);
}

Design Problem::initialDesign() const {
  const int ne = numElements();
  Design x;
  const double w0 = std::clamp(1.0 - std::sqrt(1.0 - params_.volFrac), params_.wMin, params_.wMax);
  x.w = Eigen::MatrixXd::Constant(ne, 2, w0);
  x.s = Eigen::VectorXd::Ones(ne);
  x.a = principalDirections(model_.fe, isotropicConstitutive(1.0, mat_.nu), solidU_);
  imposePassive(x);
  return x;
}

double betaAt(int loop, const OptimizationParams& p) {
  const int k = std::max(loop - 1, 0) / p.betaInterval;
  return std::min(std::pow(2.0, k), p.betaMax);
}

std::vector<Eigen::MatrixXd> layerNormals(const Eigen::VectorXd& a) {
  Eigen::MatrixXd n1(a.size(), 2), n2(a.size(), 2);
  n1.col(0) = -a.array().sin();
  n1.col(1) = a.array().cos();
  n2.col(0) = a.array().cos();
  n2.col(1) = a.array().sin();
  return {n1, n2};
}

namespace {

double meanDensity(const Eigen::MatrixXd& w) {
  return 1.0 - (1.0 - w.array()).rowwise().prod().mean();
}

}  // namespace

Analysis analyseWidths(const Problem& prob, const Eigen::MatrixXd& wBar, const Eigen::VectorXd& a) {
  const int ne = prob.numElements();
  Analysis r;
  r.C.resize(6, ne);
  for (int e = 0; e < ne; ++e) {
    const auto m = muFromW(wBar(e, 0), wBar(e, 1));
    r.C.col(e) = constitutiveRank2(m.mu1, m.mu2, a(e), prob.material()).C;
  }
  r.U = prob.system().solve(r.C);
  r.J = compliance(prob.model().fe.F, r.U);
  return r;
}

Evaluation evaluateDesign(const Problem& prob, const Design& raw, double beta, bool gradients) {
  const auto& P = prob.params();
  const auto& pas = prob.model().passive;
  const auto& fe = prob.model().fe;
  const int ne = prob.numElements();
  if (raw.w.rows() != ne || raw.w.cols() != 2 || raw.s.size() != ne || raw.a.size() != ne)
    throw std::invalid_argument("design does not match the model");
  Design x = raw;
  prob.imposePassive(x);

  Evaluation ev;
  ev.wTilde.resize(ne, 2);
  for (int i = 0; i < 2; ++i) ev.wTilde.col(i) = applyFilter(prob.Hw(), x.w.col(i), pas.w[i]);
  ev.sTilde = applyFilter(prob.Hs(), x.s, pas.s);
  ev.a = x.a;
  for (int m = 0; m < 3; ++m) {
    ev.sBar[m] = project(ev.sTilde, beta, P.eta[m]);
    ev.dsBar[m] = projectDerivative(ev.sTilde, beta, P.eta[m]);
    ev.wBar[m] = physicalWidths(ev.wTilde, ev.sBar[m]);
  }
  ev.fEroded = meanDensity(ev.wBar[Eroded]);
  ev.fIntermediate = meanDensity(ev.wBar[Intermediate]);
  ev.fDilated = meanDensity(ev.wBar[Dilated]);

  ev.mu.resize(ne, 2);
  ev.C.resize(6, ne);
  TriField dC1(6, ne), dC2(6, ne), dCa(6, ne);
  std::vector<Eigen::Matrix2d> dmu(ne);
  for (int e = 0; e < ne; ++e) {
    const auto m = muFromW(ev.wBar[Eroded](e, 0), ev.wBar[Eroded](e, 1));
    ev.mu(e, 0) = m.mu1;
    ev.mu(e, 1) = m.mu2;
    dmu[e] = m.dmu;
    const auto c = constitutiveRank2(m.mu1, m.mu2, ev.a(e), prob.material());
    ev.C.col(e) = c.C;
    dC1.col(e) = c.dmu1;
    dC2.col(e) = c.dmu2;
    dCa.col(e) = c.da;
  }
  ev.U = prob.system().solve(ev.C);
  ev.J = compliance(fe.F, ev.U);
  ev.S = ev.sBar[Dilated].mean();
  ev.phi = prob.gamma0() * ev.J + P.gammaS * ev.S;
  if (!gradients) return ev;

  const ElementBasis& KE0 = prob.system().basis();
  const TriField q = elementQuadraticForms(fe, KE0, ev.U);
  Eigen::VectorXd dJ1(ne), dJ2(ne), dJa(ne);
  for (int e = 0; e < ne; ++e) {
    dJ1(e) = -dC1.col(e).dot(q.col(e));
    dJ2(e) = -dC2.col(e).dot(q.col(e));
    dJa(e) = -dCa.col(e).dot(q.col(e));
  }
  // The penalty is scaled by the largest diagonal of K, which depends on the design.
  const double pq = penaltyQuadratic(fe, ev.U);
  const int jd = prob.system().penaltyScaleDof();
  if (pq != 0.0 && jd >= 0) {
    const int n = jd / 2, ix = n / (fe.nelY + 1), iy = n % (fe.nelY + 1);
    for (int elx = ix - 1; elx <= ix; ++elx)
      for (int ely = iy - 1; ely <= iy; ++ely) {
        if (elx < 0 || elx >= fe.nelX || ely < 0 || ely >= fe.nelY) continue;
        const int e = fe.element(elx, ely);
        const auto d = fe.edof(e);
        const int l = static_cast<int>(std::find(d.begin(), d.end(), jd) - d.begin());
        Tri<double> kll;
        for (int k = 0; k < 6; ++k) kll(k) = KE0[k](l, l);
        dJ1(e) -= pq * dC1.col(e).dot(kll);
        dJ2(e) -= pq * dC2.col(e).dot(kll);
        dJa(e) -= pq * dCa.col(e).dot(kll);
      }
  }

  const double g0 = prob.gamma0();
  Eigen::MatrixXd dPhidWbar(ne, 2);
  for (int e = 0; e < ne; ++e)
    for (int i = 0; i < 2; ++i) dPhidWbar(e, i) = g0 * (dJ1(e) * dmu[e](0, i) + dJ2(e) * dmu[e](1, i));
  TildeGradient tPhi = widthProductRule(dPhidWbar, ev.wTilde, ev.sBar[Eroded], ev.dsBar[Eroded]);
  tPhi.s += P.gammaS / ne * ev.dsBar[Dilated];
  RawGradient rPhi = chainRuleBack(tPhi, prob.Hw(), prob.Hs(), pas.w, pas.s);
  ev.dPhi.w = rPhi.w;
  ev.dPhi.s = rPhi.s;
  ev.dPhi.a = g0 * dJa;
  pas.a.zero(ev.dPhi.a);

  const Eigen::MatrixXd& wd = ev.wBar[Dilated];
  Eigen::MatrixXd dfdWbar(ne, 2);
  dfdWbar.col(0) = (1.0 - wd.col(1).array()) / ne;
  dfdWbar.col(1) = (1.0 - wd.col(0).array()) / ne;
  const TildeGradient tF = widthProductRule(dfdWbar, ev.wTilde, ev.sBar[Dilated], ev.dsBar[Dilated]);
  const RawGradient rF = chainRuleBack(tF, prob.Hw(), prob.Hs(), pas.w, pas.s);
  ev.dF.w = rF.w;
  ev.dF.s = rF.s;
  ev.dF.a = Eigen::VectorXd::Zero(ne);
  ev.hasGradient = true;
  return ev;
}

OcUpdater::OcUpdater(Bounds b) : b_(std::move(b)) {}

double OcUpdater::update(Eigen::VectorXd& x, const Eigen::VectorXd& g0, const Eigen::VectorXd& g1, double c) {
  const Eigen::Index n = x.size();
  const Eigen::VectorXd range = b_.scale.size() == n ? b_.scale : (b_.upper - b_.lower).cwiseMax(1e-12);
  if (iter_ < 2) {
    lowAsy_ = x - 0.5 * range;
    uppAsy_ = x + 0.5 * range;
  } else {
    for (Eigen::Index j = 0; j < n; ++j) {
      const double t = (x(j) - x1_(j)) * (x1_(j) - x2_(j));
      const double gamma = t < 0 ? 0.7 : (t > 0 ? 1.2 : 1.0);
      lowAsy_(j) = x(j) - gamma * (x1_(j) - lowAsy_(j));
      uppAsy_(j) = x(j) + gamma * (uppAsy_(j) - x1_(j));
      lowAsy_(j) = std::clamp(lowAsy_(j), x(j) - 10.0 * range(j), x(j) - 0.01 * range(j));
      uppAsy_(j) = std::clamp(uppAsy_(j), x(j) + 0.01 * range(j), x(j) + 10.0 * range(j));
    }
  }

  Eigen::VectorXd lo(n), hi(n), p0(n), q0(n), p1(n), q1(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    lo(j) = std::max({b_.lower(j), x(j) - b_.move(j), lowAsy_(j) + 0.1 * (x(j) - lowAsy_(j))});
    hi(j) = std::min({b_.upper(j), x(j) + b_.move(j), uppAsy_(j) - 0.1 * (uppAsy_(j) - x(j))});
    const double du = (uppAsy_(j) - x(j)) * (uppAsy_(j) - x(j));
    const double dl = (x(j) - lowAsy_(j)) * (x(j) - lowAsy_(j));
    const double gp = std::max(g0(j), 0.0), gm = std::max(-g0(j), 0.0);
    p0(j) = du * (1.001 * gp + 0.001 * gm);
    q0(j) = dl * (0.001 * gp + 1.001 * gm);
    p1(j) = du * std::max(g1(j), 0.0);
    q1(j) = dl * std::max(-g1(j), 0.0);
  }

  auto solve = [&](double lam, Eigen::VectorXd& xn) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const double P = p0(j) + lam * p1(j), Q = q0(j) + lam * q1(j);
      if (P + Q <= 0.0) {
        xn(j) = std::clamp(x(j), lo(j), hi(j));
        continue;
      }
      const double sp = std::sqrt(P), sq = std::sqrt(Q);
      xn(j) = std::clamp((sp * lowAsy_(j) + sq * uppAsy_(j)) / (sp + sq), lo(j), hi(j));
    }
    return c + g1.dot(xn - x);
  };

  Eigen::VectorXd xn(n);
  double cl = solve(0.0, xn);
  if (cl > 0.0) {
    double l1 = 0.0, l2 = 1.0;
    Eigen::VectorXd tmp(n);
    while (solve(l2, tmp) > 0.0 && l2 < 1e12) l2 *= 2.0;
    for (int it = 0; it < 200 && (l2 - l1) > 1e-12 * (1.0 + l2); ++it) {
      const double lm = 0.5 * (l1 + l2);
      if (solve(lm, tmp) > 0.0)
        l1 = lm;
      else
        l2 = lm;
    }
    cl = solve(l2, xn);
  }
  x2_ = iter_ >= 1 ? x1_ : x;
  x1_ = x;
  x = xn;
  ++iter_;
  return cl;
}

MultiScaleResult packResult(const Problem& prob, const Design& x, double beta) {
  const Evaluation ev = evaluateDesign(prob, x, beta, false);
  const Analysis an = analyseWidths(prob, ev.wBar[Intermediate], ev.a);
  MultiScaleResult r;
  r.nelX = prob.model().fe.nelX;
  r.nelY = prob.model().fe.nelY;
  r.w = ev.wBar[Intermediate];
  r.N = layerNormals(ev.a);
  r.f = ev.fIntermediate;
  r.J = an.J;
  return r;
}

OptimizationResult runOptimization(const Problem& prob, const DehomHook& hook, int dehomFrq,
                                   const IterationCallback& onIteration) {
  using Clock = std::chrono::steady_clock;
  const auto& P = prob.params();
  const int ne = prob.numElements();
  const auto& pas = prob.model().passive;

  OptimizationResult out;
  Design x = prob.initialDesign();

  // Active variables in the order w1, w2, s, a.
  struct Var {
    int kind, e;
  };
  std::vector<Var> vars;
  for (int e = 0; e < ne; ++e)
    if (!pas.w[0].isPassive(e)) vars.push_back({0, e});
  for (int e = 0; e < ne; ++e)
    if (!pas.w[1].isPassive(e)) vars.push_back({1, e});
  for (int e = 0; e < ne; ++e)
    if (!pas.s.isPassive(e)) vars.push_back({2, e});
  for (int e = 0; e < ne; ++e)
    if (!pas.a.isPassive(e)) vars.push_back({3, e});
  const Eigen::Index nv = static_cast<Eigen::Index>(vars.size());

  auto ref = [&](Design& d, const Var& v) -> double& {
    if (v.kind < 2) return d.w(v.e, v.kind);
    return v.kind == 2 ? d.s(v.e) : d.a(v.e);
  };
  auto gather = [&](const Design& d) {
    Eigen::VectorXd g(nv);
    for (Eigen::Index j = 0; j < nv; ++j) g(j) = ref(const_cast<Design&>(d), vars[j]);
    return g;
  };

  OcUpdater::Bounds b{Eigen::VectorXd(nv), Eigen::VectorXd(nv), Eigen::VectorXd(nv), Eigen::VectorXd(nv)};
  for (Eigen::Index j = 0; j < nv; ++j) {
    switch (vars[j].kind) {
      case 0:
      case 1:
        b.lower(j) = P.wMin;
        b.upper(j) = P.wMax;
        b.move(j) = P.moveW;
        break;
      case 2:
        b.lower(j) = 0.0;
        b.upper(j) = 1.0;
        b.move(j) = P.moveW;
        break;
      default:
        b.lower(j) = P.aMin;
        b.upper(j) = P.aMax;
        b.move(j) = P.moveA;
        b.scale(j) = P.angleScale;
        continue;
    }
    b.scale(j) = b.upper(j) - b.lower(j);
  }
  const Eigen::VectorXd range = (b.upper - b.lower).cwiseMax(1e-12);
  OcUpdater oc(b);

  double beta = betaAt(1, P);
  for (int loop = 1; loop <= P.maxIter; ++loop) {
    const auto t0 = Clock::now();
    const double nb = betaAt(loop, P);
    if (nb != beta) oc.restart();
    beta = nb;

    const Evaluation ev = evaluateDesign(prob, x, beta, true);
    const double fdStar = P.volFrac * ev.fDilated / ev.fIntermediate;

    Eigen::VectorXd xv = gather(x);
    const Eigen::VectorXd g0 = gather(ev.dPhi), g1 = gather(ev.dF);
    const Eigen::VectorXd xOld = xv;
    oc.update(xv, g0, g1, ev.fDilated - fdStar);
    for (Eigen::Index j = 0; j < nv; ++j) ref(x, vars[j]) = xv(j);
    const double change = nv ? ((xv - xOld).cwiseAbs().cwiseQuotient(range)).maxCoeff() : 0.0;


    IterationRecord rec;
    rec.itr = loop;
    rec.obj = ev.phi;
    rec.J = ev.J;
    rec.S = ev.S;
    rec.vol = ev.fIntermediate;
    rec.change = change;
    rec.beta = beta;
    rec.time = std::chrono::duration<double>(Clock::now() - t0).count();
    if (hook && dehomFrq > 0 && loop % dehomFrq == 0) {
      const auto t1 = Clock::now();
      rec.dehomVol = hook(packResult(prob, x, beta));
      rec.dehomTime = std::chrono::duration<double>(Clock::now() - t1).count();
    }
    out.history.push_back(rec);
    if (onIteration) onIteration(rec);
    if (change < P.stopCrit && beta >= P.betaMax) break;
  }

  out.design = x;
  out.result = packResult(prob, x, beta);
  const Evaluation fin = evaluateDesign(prob, x, beta, false);
  out.mnd = (4.0 * fin.sBar[Intermediate].array() * (1.0 - fin.sBar[Intermediate].array())).mean();
  return out;
}

}  // namespace dht
