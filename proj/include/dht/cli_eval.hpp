#pragma once

#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

#include "dht/dehom.hpp"
#include "dht/models.hpp"
#include "dht/optimize.hpp"

namespace dht {

struct RunConfig {
  ModelKind model = ModelKind::Bridge;
  int nelX = 60, nelY = 30;
  double volFrac = 0.3, rMin = 2.0, wMin = 0.1, wMax = 1.0, dMin = 0.2;
  int deHomFrq = 0;
  bool eval = false;
  int maxIter = 300;
  int alignItr = 20;
  std::string checkpoint;  ///< load instead of optimising when set
  std::string passive;     ///< passive extension file
  std::string outDir;      ///< no files written when empty
  double nu = -1;          ///< overrides the model's Poisson ratio when >= 0

  /// Throws std::invalid_argument on an inconsistent configuration.
  void validate() const;
};

struct EvalReport {
  double f0 = 0, J0 = 0;
  double fs = 0, epsF = 0;
  double Js = std::numeric_limits<double>::quiet_NaN();
  double epsS = std::numeric_limits<double>::quiet_NaN();
  int fineX = 0, fineY = 0, scale = 0;
  int iterations = 0;
  double tOptimise = 0, tDehom = 0, tEval = 0;
};

struct RunOutput {
  MultiScaleResult result;
  DehomResult dehom;
  EvalReport report;
  std::vector<IterationRecord> history;
  Eigen::VectorXd energy;  ///< fine strain energy density, when evaluated
};

/// Initialise, optimise (or load the checkpoint), dehomogenise and evaluate.
/// Progress lines go to `log`.
RunOutput run(const RunConfig& cfg, std::ostream& log);

ModelDefinition buildModel(const RunConfig& cfg, int scale = 1);

/// Compliance of a solid-void field on the fine version of the model. Dofs
/// surrounded by void only are clamped; their stiffness is E_min.
double evaluateFine(const Field& rho, const ModelDefinition& fine, const MaterialConstants& mat,
                    Eigen::VectorXd* energy = nullptr);

/// Binary PGM, 255 where the field exceeds 0.5.
void writeDensityPgm(const Field& rho, const std::string& path);
/// Log10 energy normalised to [0, 255]; values are element-ordered (y-major).
void writeEnergyPgm(const Eigen::VectorXd& energy, int nx, int ny, const std::string& path);
void writeHistoryCsv(const std::vector<IterationRecord>& history, const std::string& path);

void saveCheckpoint(const MultiScaleResult& r, const std::string& path);
MultiScaleResult loadCheckpoint(const std::string& path);

std::string formatIteration(const IterationRecord& r);

}  // namespace dht
