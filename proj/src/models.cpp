#include "dht/models.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace dht {

ModelKind parseModelKind(const std::string& name) {
  if (name == "bridge") return ModelKind::Bridge;
  if (name == "cantilever") return ModelKind::Cantilever;
  if (name == "mbb") return ModelKind::Mbb;
  if (name == "db") return ModelKind::DoubleClamped;
  throw std::invalid_argument("unknown model '" + name + "'");
}

std::string modelName(ModelKind kind) {
  switch (kind) {
    case ModelKind::Bridge: return "bridge";
    case ModelKind::Cantilever: return "cantilever";
    case ModelKind::Mbb: return "mbb";
    case ModelKind::DoubleClamped: return "db";
  }
  return "bridge";
}

std::pair<int, int> passiveBlockSize(int nelX, int nelY, int sc) {
  const int px = static_cast<int>(std::ceil(nelX / (15.0 * sc))) * sc;
  const int py = static_cast<int>(std::ceil(nelY / (30.0 * sc))) * sc;
  return {px, py};
}

namespace {

class Builder {
 public:
  Builder(ModelKind kind, int nelX, int nelY, int sc) {
    if (sc < 1) throw std::invalid_argument("scale must be positive");
    m_.kind = kind;
    m_.fe = makeGridModel(nelX, nelY, 1.0 / sc);
    m_.solid = Mask::Constant(nelY, nelX, false);
    m_.nu = kind == ModelKind::Cantilever ? 0.3 : 1.0 / 3.0;
  }

  int nelX() const { return m_.fe.nelX; }
  int nelY() const { return m_.fe.nelY; }

  void solidBlock(int x0, int x1, int y0, int y1) {
    if (x0 < 0 || y0 < 0 || x1 >= nelX() || y1 >= nelY() || x0 > x1 || y0 > y1)
      throw std::invalid_argument("domain too small for the passive blocks");
    const Eigen::Index n = m_.fe.numElements();
    for (int ix = x0; ix <= x1; ++ix)
      for (int iy = y0; iy <= y1; ++iy) {
        const int e = m_.fe.element(ix, iy);
        m_.solid(iy, ix) = true;
        m_.passive.w[0].set(e, 1.0, n);
        m_.passive.w[1].set(e, 1.0, n);
        m_.passive.s.set(e, 1.0, n);
      }
  }

  /// Unit traction -1 in y on two local dofs of element e.
  void loadElement(int e, int local1, int local2) {
    if (e < 0 || e >= m_.fe.numElements()) throw std::invalid_argument("load element outside the mesh");
    const auto d = m_.fe.edof(e);
    m_.fe.F(d[2 * local1 + 1]) -= 1.0;
    m_.fe.F(d[2 * local2 + 1]) -= 1.0;
  }

  void penaltyYBottom(int ix0, int ix1) {
    PenaltyBlock b;
    for (int ix = ix0; ix <= ix1; ++ix) b.dofs.push_back(2 * m_.fe.node(ix, nelY()) + 1);
    m_.fe.penalty.push_back(b);
  }

  void clampEdge(int ix) {
    for (int iy = 0; iy <= nelY(); ++iy) {
      m_.fe.fixedDofs.push_back(2 * m_.fe.node(ix, iy));
      m_.fe.fixedDofs.push_back(2 * m_.fe.node(ix, iy) + 1);
    }
  }

  void fix(int dof) { m_.fe.fixedDofs.push_back(dof); }

  ModelDefinition finish() {
    const double total = m_.fe.F.cwiseAbs().sum();
    if (total <= 0) throw std::logic_error("model without load");
    m_.fe.F /= total;
    return m_;
  }

  ModelDefinition m_;
};

// Local node indices: 0 SW, 1 SE, 2 NE, 3 NW.
constexpr int SW = 0, SE = 1, NE = 2, NW = 3;

ModelDefinition bridge(int nelX, int nelY, int sc) {
  Builder b(ModelKind::Bridge, nelX, nelY, sc);
  const auto [px, py] = passiveBlockSize(nelX, nelY, sc);
  const int half = static_cast<int>(std::ceil(0.5 * px));
  for (int k = 0; k < half; ++k) {
    const long b1 = static_cast<long>(std::floor(nelY * static_cast<double>(nelX) * 0.5)) - static_cast<long>(k) * nelY;
    const long b2 = static_cast<long>(nelX) * nelY - b1 + nelY;
    for (long one : {b1, b2}) {
      const int e = static_cast<int>(one - 1);
      const int elx = e / nelY, ely = e % nelY;
      b.loadElement(e, SW, SE);
      b.solidBlock(elx, elx, ely - py + 1, ely);
    }
  }
  b.solidBlock(0, px - 1, nelY - py, nelY - 1);
  b.solidBlock(nelX - px, nelX - 1, nelY - py, nelY - 1);
  b.penaltyYBottom(0, px);
  b.penaltyYBottom(nelX - px, nelX);
  b.fix(2 * b.m_.fe.node(0, nelY));
  return b.finish();
}

ModelDefinition cantilever(int nelX, int nelY, int sc) {
  Builder b(ModelKind::Cantilever, nelX, nelY, sc);
  const auto [px, py] = passiveBlockSize(nelX, nelY, sc);
  const int mid = nelY / 2;
  b.solidBlock(nelX - px, nelX - 1, mid - py, mid + py - 1);
  for (int ely = mid - py; ely < mid + py; ++ely) b.loadElement(b.m_.fe.element(nelX - 1, ely), SE, NE);
  b.clampEdge(0);
  return b.finish();
}

ModelDefinition mbb(int nelX, int nelY, int sc) {
  Builder b(ModelKind::Mbb, nelX, nelY, sc);
  const auto [px, py] = passiveBlockSize(nelX, nelY, sc);
  const int half = static_cast<int>(std::ceil(0.5 * px));
  for (int k = 0; k < half; ++k)
    for (int elx : {nelX / 2 - 1 - k, nelX - nelX / 2 + k}) {
      b.loadElement(b.m_.fe.element(elx, 0), NE, NW);
      b.solidBlock(elx, elx, 0, py - 1);
    }
  b.solidBlock(px, 2 * px - 1, nelY - py, nelY - 1);
  b.solidBlock(nelX - 2 * px, nelX - px - 1, nelY - py, nelY - 1);
  b.penaltyYBottom(px, 2 * px);
  b.penaltyYBottom(nelX - 2 * px, nelX - px);
  b.fix(2 * b.m_.fe.node(px, nelY));
  return b.finish();
}

ModelDefinition doubleClamped(int nelX, int nelY, int sc) {
  Builder b(ModelKind::DoubleClamped, nelX, nelY, sc);
  const auto [px, py] = passiveBlockSize(nelX, nelY, sc);
  const int half = static_cast<int>(std::ceil(0.5 * px));
  for (int k = 0; k < half; ++k)
    for (int elx : {nelX / 2 - 1 - k, nelX - nelX / 2 + k}) {
      b.loadElement(b.m_.fe.element(elx, nelY - 1), SW, SE);
      b.solidBlock(elx, elx, nelY - py, nelY - 1);
    }
  b.clampEdge(0);
  b.clampEdge(nelX);
  return b.finish();
}

}  // namespace

ModelDefinition makeModel(ModelKind kind, int nelX, int nelY, int sc) {
  switch (kind) {
    case ModelKind::Bridge: return bridge(nelX, nelY, sc);
    case ModelKind::Cantilever: return cantilever(nelX, nelY, sc);
    case ModelKind::Mbb: return mbb(nelX, nelY, sc);
    case ModelKind::DoubleClamped: return doubleClamped(nelX, nelY, sc);
  }
  throw std::invalid_argument("unknown model");
}

void addPassive(ModelDefinition& model, int element, const std::string& variable, double value) {
  const Eigen::Index n = model.fe.numElements();
  if (element < 0 || element >= n) throw std::invalid_argument("passive element index out of range");
  if (variable == "w1" || variable == "w2") {
    if (value < 0 || value > 1) throw std::invalid_argument("passive width must lie in [0, 1]");
    model.passive.w[variable == "w1" ? 0 : 1].set(element, value, n);
    if (value > 0) model.passive.s.set(element, 1.0, n);
  } else if (variable == "s") {
    if (value < 0 || value > 1) throw std::invalid_argument("passive indicator must lie in [0, 1]");
    model.passive.s.set(element, value, n);
  } else if (variable == "a") {
    model.passive.a.set(element, value, n);
  } else {
    throw std::invalid_argument("unknown passive variable '" + variable + "'");
  }
  const int elx = element / model.fe.nelY, ely = element % model.fe.nelY;
  const auto& w = model.passive.w;
  model.solid(ely, elx) = w[0].isPassive(element) && w[1].isPassive(element) && w[0].value(element) >= 1.0 &&
                          w[1].value(element) >= 1.0;
}

void validatePassive(const ModelDefinition& model) {
  const auto& w = model.passive.w;
  for (Eigen::Index e = 0; e < model.fe.numElements(); ++e) {
    if (!w[0].isPassive(e) || !w[1].isPassive(e)) continue;
    const double a = w[0].value(e), b = w[1].value(e);
    if ((a >= 1.0 && b <= 0.0) || (b >= 1.0 && a <= 0.0))
      throw std::invalid_argument("element " + std::to_string(e) +
                                  " prescribes one layer solid and the other void");
  }
}

void applyPassiveExtension(ModelDefinition& model, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open passive file '" + path + "'");
  std::string line;
  int lineNo = 0;
  while (std::getline(in, line)) {
    ++lineNo;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    int e;
    std::string var;
    double v;
    if (!(ss >> e >> var >> v))
      throw std::runtime_error(path + ":" + std::to_string(lineNo) + ": expected 'element variable value'");
    addPassive(model, e, var, v);
  }
  validatePassive(model);
}

}  // namespace dht
