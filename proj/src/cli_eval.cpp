#include "dht/cli_eval.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace dht {

namespace {

using Clock = std::chrono::steady_clock;

double seconds(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::ofstream openOut(const std::string& path, std::ios::openmode mode = std::ios::out) {
  std::ofstream o(path, mode);
  if (!o) throw std::runtime_error("cannot write '" + path + "'");
  return o;
}

constexpr const char* kMagic = "DHTCKPT";
constexpr int kVersion = 1;

}  // namespace

void RunConfig::validate() const {
  if (nelX < 2 || nelY < 2) throw std::invalid_argument("nelX and nelY must be at least 2");
  if (!(volFrac > 0 && volFrac <= 1)) throw std::invalid_argument("volFrac must lie in (0, 1]");
  if (!(rMin > 0)) throw std::invalid_argument("rMin must be positive");
  if (!(wMin > 0 && wMin <= 1) || !(wMax > 0 && wMax <= 1)) throw std::invalid_argument("wMin and wMax must lie in (0, 1]");
  if (wMin > wMax) throw std::invalid_argument("wMin must not exceed wMax");
  if (!(dMin > 0)) throw std::invalid_argument("dMin must be positive");
  if (deHomFrq < 0) throw std::invalid_argument("deHomFrq must be non-negative");
  if (maxIter < 0) throw std::invalid_argument("maxIter must be non-negative");
}

ModelDefinition buildModel(const RunConfig& cfg, int scale) {
  ModelDefinition m = makeModel(cfg.model, cfg.nelX * scale, cfg.nelY * scale, scale);
  if (cfg.nu >= 0) m.nu = cfg.nu;
  if (scale == 1 && !cfg.passive.empty()) applyPassiveExtension(m, cfg.passive);
  return m;
}

double evaluateFine(const Field& rho, const ModelDefinition& fine, const MaterialConstants& mat,
                    Eigen::VectorXd* energy) {
  const FEModel& fe = fine.fe;
  if (rho.rows() != fe.nelY || rho.cols() != fe.nelX) throw std::invalid_argument("density does not match the fine model");
  const Eigen::VectorXd solid = Eigen::Map<const Eigen::VectorXd>(rho.data(), rho.size()).cwiseMin(1.0).cwiseMax(0.0);
  const Eigen::VectorXd modulus = (mat.E * solid.array() + mat.Emin * (1.0 - solid.array())).matrix();

  std::vector<char> touched(fe.numNodes(), 0);
  for (int e = 0; e < fe.numElements(); ++e) {
    if (solid(e) <= 0) continue;
    const auto d = fe.edof(e);
    for (int k = 0; k < 4; ++k) touched[d[2 * k] / 2] = 1;
  }
  for (const auto& b : fe.penalty)
    for (int d : b.dofs) touched[d / 2] = 1;
  for (Eigen::Index d = 0; d < fe.F.size(); ++d)
    if (fe.F(d) != 0.0) touched[d / 2] = 1;
  std::vector<int> clamp;
  for (int n = 0; n < fe.numNodes(); ++n)
    if (!touched[n]) {
      clamp.push_back(2 * n);
      clamp.push_back(2 * n + 1);
    }

  StiffnessSystem sys(fe, clamp);
  const Eigen::VectorXd U = sys.solveIsotropic(modulus, fine.nu);
  if (!U.allFinite()) throw std::runtime_error("fine-scale solve failed");
  if (energy) *energy = strainEnergyDensityIsotropic(fe, modulus, fine.nu, U);
  return compliance(fe.F, U);
}

void writeDensityPgm(const Field& rho, const std::string& path) {
  auto o = openOut(path, std::ios::binary);
  o << "P5\n" << rho.cols() << " " << rho.rows() << "\n255\n";
  for (Eigen::Index iy = 0; iy < rho.rows(); ++iy)
    for (Eigen::Index ix = 0; ix < rho.cols(); ++ix) o.put(static_cast<char>(rho(iy, ix) > 0.5 ? 255 : 0));
  if (!o) throw std::runtime_error("write failed for '" + path + "'");
}

void writeEnergyPgm(const Eigen::VectorXd& energy, int nx, int ny, const std::string& path) {
  if (energy.size() != static_cast<Eigen::Index>(nx) * ny) throw std::invalid_argument("energy does not match the image size");
  const double top = std::log10(std::max(energy.maxCoeff(), 1e-300));
  const double span = 6.0;
  auto o = openOut(path, std::ios::binary);
  o << "P5\n" << nx << " " << ny << "\n255\n";
  for (int iy = 0; iy < ny; ++iy)
    for (int ix = 0; ix < nx; ++ix) {
      const double v = std::log10(std::max(energy(iy + static_cast<Eigen::Index>(ix) * ny), 1e-300));
      const double t = std::clamp((v - (top - span)) / span, 0.0, 1.0);
      o.put(static_cast<char>(std::lround(255 * t)));
    }
  if (!o) throw std::runtime_error("write failed for '" + path + "'");
}

void writeHistoryCsv(const std::vector<IterationRecord>& history, const std::string& path) {
  auto o = openOut(path);
  o << "itr,obj,J,S,vol,ch,time,dehom_vol,dehom_time\n";
  o.precision(10);
  for (const auto& r : history)
    o << r.itr << ',' << r.obj << ',' << r.J << ',' << r.S << ',' << r.vol << ',' << r.change << ',' << r.time << ','
      << r.dehomVol << ',' << r.dehomTime << '\n';
  if (!o) throw std::runtime_error("write failed for '" + path + "'");
}

void saveCheckpoint(const MultiScaleResult& r, const std::string& path) {
  const Eigen::Index ne = static_cast<Eigen::Index>(r.nelX) * r.nelY;
  const int L = r.layers();
  if (r.w.rows() != ne || static_cast<int>(r.N.size()) != L) throw std::invalid_argument("inconsistent multi-scale result");
  auto o = openOut(path);
  char buf[40];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  o << kMagic << ' ' << kVersion << ' ' << r.nelX << ' ' << r.nelY << ' ' << L << ' ' << num(r.f) << ' ' << num(r.J)
    << '\n';
  for (int l = 0; l < L; ++l)
    for (Eigen::Index e = 0; e < ne; ++e) o << num(r.w(e, l)) << '\n';
  for (int l = 0; l < L; ++l)
    for (int c = 0; c < 2; ++c)
      for (Eigen::Index e = 0; e < ne; ++e) o << num(r.N[l](e, c)) << '\n';
  if (!o) throw std::runtime_error("write failed for '" + path + "'");
}

MultiScaleResult loadCheckpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open checkpoint '" + path + "'");
  std::string magic;
  int version = 0, L = 0;
  MultiScaleResult r;
  auto readNum = [&](double& v) {
    std::string tok;
    if (!(in >> tok)) return false;
    char* end = nullptr;
    v = std::strtod(tok.c_str(), &end);
    return end && *end == '\0';
  };
  if (!(in >> magic >> version >> r.nelX >> r.nelY >> L) || magic != kMagic)
    throw std::runtime_error(path + ": not a checkpoint file");
  if (version != kVersion) throw std::runtime_error(path + ": unsupported checkpoint version " + std::to_string(version));
  if (r.nelX < 1 || r.nelY < 1 || L < 1) throw std::runtime_error(path + ": bad dimensions");
  if (!readNum(r.f) || !readNum(r.J)) throw std::runtime_error(path + ": bad header");
  const Eigen::Index ne = static_cast<Eigen::Index>(r.nelX) * r.nelY;
  r.w.resize(ne, L);
  for (int l = 0; l < L; ++l)
    for (Eigen::Index e = 0; e < ne; ++e)
      if (!readNum(r.w(e, l))) throw std::runtime_error(path + ": truncated width data");
  r.N.assign(L, Eigen::MatrixXd(ne, 2));
  for (int l = 0; l < L; ++l)
    for (int c = 0; c < 2; ++c)
      for (Eigen::Index e = 0; e < ne; ++e)
        if (!readNum(r.N[l](e, c))) throw std::runtime_error(path + ": truncated normal data");
  return r;
}

std::string formatIteration(const IterationRecord& r) {
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "Itr: %4d Obj: %7.4f J: %8.4f S: %6.4f Vol: %6.4f (ph: %6.3f) ch: %6.4f Time: %6.3f (ph: %6.3f)", r.itr,
                r.obj, r.J, r.S, r.vol, r.dehomVol, r.change, r.time, r.dehomTime);
  return buf;
}

RunOutput run(const RunConfig& cfg, std::ostream& log) {
  cfg.validate();
  const auto tStart = Clock::now();
  RunOutput out;
  const GridHierarchy grids = buildGridHierarchy(cfg.nelX, cfg.nelY, cfg.dMin, cfg.wMin);
  const ModelDefinition model = buildModel(cfg, 1);
  MaterialConstants mat;
  mat.nu = model.nu;

  DehomOptions dopt;
  dopt.alignItr = cfg.alignItr;
  dopt.passiveSolid = model.solid;

  if (!cfg.checkpoint.empty()) {
    out.result = loadCheckpoint(cfg.checkpoint);
    if (out.result.nelX != cfg.nelX || out.result.nelY != cfg.nelY)
      throw std::invalid_argument("checkpoint grid " + std::to_string(out.result.nelX) + "x" +
                                  std::to_string(out.result.nelY) + " does not match the configuration");
  } else {
    OptimizationParams P;
    P.volFrac = cfg.volFrac;
    P.rMin = cfg.rMin;
    P.wMin = cfg.wMin;
    P.wMax = cfg.wMax;
    P.maxIter = cfg.maxIter;
    Problem prob(model, P, mat);
    DehomHook hook;
    if (cfg.deHomFrq > 0)
      hook = [&](const MultiScaleResult& r) { return dehomogenise(r.w, r.N, cfg.wMin, grids, dopt).volume; };
    const OptimizationResult opt =
        runOptimization(prob, hook, cfg.deHomFrq, [&](const IterationRecord& r) { log << formatIteration(r) << '\n'; });
    out.result = opt.result;
    out.history = opt.history;
  }
  auto& rep = out.report;
  rep.iterations = static_cast<int>(out.history.size());
  rep.f0 = out.result.f;
  rep.J0 = out.result.J;
  rep.tOptimise = seconds(tStart);
  log << "Multi-scale structure, intermediate design: J: " << fmt("%.3f", rep.J0) << " Vol: " << fmt("%.3f", rep.f0)
      << " Total time: " << fmt("%.3f", rep.tOptimise) << "\n\n";

  log << "Dehomogenisation to single-scale structure, with minimum length-scale: " << fmt("%.3f", cfg.dMin) << "...\n";
  const auto tD = Clock::now();
  out.dehom = dehomogenise(out.result.w, out.result.N, cfg.wMin, grids, dopt);
  rep.tDehom = seconds(tD);
  rep.fs = out.dehom.volume;
  rep.epsF = (rep.fs - rep.f0) / rep.f0;
  rep.fineX = grids.fine.nx;
  rep.fineY = grids.fine.ny;
  rep.scale = grids.fineScale;
  log << "    Vol: " << fmt("%.3f", rep.fs) << " err: " << fmt("%.2f", 100 * rep.epsF) << " Time: "
      << fmt("%.3f", rep.tDehom) << "\n";

  if (cfg.eval) {
    log << "\nAnalysing dehomogenisation result...\n";
    const auto tE = Clock::now();
    const ModelDefinition fine = buildModel(cfg, grids.fineScale);
    MaterialConstants fm = mat;
    fm.nu = fine.nu;
    rep.Js = evaluateFine(out.dehom.rho, fine, fm, &out.energy);
    rep.tEval = seconds(tE);
    rep.epsS = (rep.Js * rep.fs - rep.J0 * rep.f0) / (rep.J0 * rep.f0);
    log << "    J: " << fmt("%.3f", rep.Js) << " err: " << fmt("%.2f", 100 * (rep.Js - rep.J0) / rep.J0)
        << " wt err: " << fmt("%.2f", 100 * rep.epsS) << "\n";
    log << "    Evaluated on " << rep.fineX << "x" << rep.fineY << " grid (x" << rep.scale
        << " scaled), results subjected to h-conv. effects\n";
  }

  if (!cfg.outDir.empty()) {
    std::filesystem::create_directories(cfg.outDir);
    const std::filesystem::path dir(cfg.outDir);
    writeDensityPgm(out.dehom.rho, (dir / "density.pgm").string());
    if (out.energy.size()) writeEnergyPgm(out.energy, rep.fineX, rep.fineY, (dir / "energy.pgm").string());
    writeHistoryCsv(out.history, (dir / "history.csv").string());
    saveCheckpoint(out.result, (dir / "checkpoint.txt").string());
  }
  return out;
}

}  // namespace dht
