#pragma once

#include <string>

#include "dht/fem.hpp"
#include "dht/grids.hpp"
#include "dht/regularize.hpp"

namespace dht {

enum class ModelKind { Bridge, Cantilever, Mbb, DoubleClamped };

ModelKind parseModelKind(const std::string& name);
std::string modelName(ModelKind kind);

/// Passive prescriptions per design variable.
struct DesignPassive {
  PassiveSet w[2];
  PassiveSet s, a;
};

struct ModelDefinition {
  ModelKind kind = ModelKind::Bridge;
  FEModel fe;
  DesignPassive passive;
  Mask solid;  ///< passive solid elements, (nelY, nelX)
  double nu = 1.0 / 3.0;
};

/// Builds a model on a nelX x nelY mesh whose elements have size 1/sc; sc > 1
/// gives the fine-scale version of the (nelX/sc) x (nelY/sc) coarse problem
/// with the same physical loads, supports and passive blocks.
ModelDefinition makeModel(ModelKind kind, int nelX, int nelY, int sc = 1);

/// Passive blocks (px, py) in elements for a mesh at block scale sc.
std::pair<int, int> passiveBlockSize(int nelX, int nelY, int sc);

/// Reads "element variable value" lines (variable in w1, w2, s, a; 0-based
/// element index) and merges them into the model's passive sets. Elements
/// with a prescribed positive width get a solid indicator.
void applyPassiveExtension(ModelDefinition& model, const std::string& path);
void addPassive(ModelDefinition& model, int element, const std::string& variable, double value);
/// Throws when an element has w1 prescribed solid while w2 is prescribed void, or vice versa.
void validatePassive(const ModelDefinition& model);

}  // namespace dht
