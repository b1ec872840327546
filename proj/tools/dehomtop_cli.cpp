#include <CLI11.hpp>
#include <Eigen/Core>
#include <algorithm>
#include <cstdlib>
#include <exception>
#include <iostream>

#include "dht/cli_eval.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Rank-2 homogenisation topology optimisation with phasor dehomogenisation"};
  dht::RunConfig cfg;
  std::string model = "bridge";
  app.add_option("--model", model, "bridge | cantilever | mbb | db")
      ->check(CLI::IsMember({"bridge", "cantilever", "mbb", "db"}));
  app.add_option("--nelx", cfg.nelX, "coarse elements in x");
  app.add_option("--nely", cfg.nelY, "coarse elements in y");
  app.add_option("--volfrac", cfg.volFrac, "volume fraction");
  app.add_option("--rmin", cfg.rMin, "filter radius in elements");
  app.add_option("--wmin", cfg.wMin, "minimum relative layer width");
  app.add_option("--wmax", cfg.wMax, "maximum relative layer width");
  app.add_option("--dmin", cfg.dMin, "minimum length scale, in coarse elements");
  app.add_option("--dehom-frq", cfg.deHomFrq, "dehomogenise every n-th iteration (0 = never)");
  app.add_flag("--eval", cfg.eval, "analyse the single-scale result on the fine grid");
  app.add_option("--checkpoint", cfg.checkpoint, "load a multi-scale result and skip optimisation")
      ->check(CLI::ExistingFile);
  app.add_option("--out", cfg.outDir, "output directory");
  app.add_option("--passive", cfg.passive, "passive extension file")->check(CLI::ExistingFile);
  app.add_option("--maxiter", cfg.maxIter, "optimisation iterations");
  app.add_option("--align-itr", cfg.alignItr, "phase alignment sweeps");
  app.add_option("--nu", cfg.nu, "Poisson ratio override");
  CLI11_PARSE(app, argc, argv);

  if (const char* t = std::getenv("DEHOMTOP_THREADS")) Eigen::setNbThreads(std::max(1, std::atoi(t)));
  try {
    cfg.model = dht::parseModelKind(model);
    dht::run(cfg, std::cout);
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n" << app.help();
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
