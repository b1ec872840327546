#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>

#include "dht/cli_eval.hpp"

using namespace dht;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

std::filesystem::path scratchDir(const std::string& name) {
  const auto d = std::filesystem::temp_directory_path() / ("dht_test_" + name);
  std::filesystem::remove_all(d);
  std::filesystem::create_directories(d);
  return d;
}

RunConfig smallBridge() {
  RunConfig c;
  c.nelX = 30;
  c.nelY = 15;
  c.maxIter = 12;
  return c;
}

}  // namespace

TEST_CASE("configuration validation") {
  RunConfig c;
  CHECK_NOTHROW(c.validate());
  auto bad = [&](auto edit) {
    RunConfig d;
    edit(d);
    CHECK_THROWS_AS(d.validate(), std::invalid_argument);
  };
  bad([](RunConfig& d) { d.volFrac = 1.5; });
  bad([](RunConfig& d) { d.rMin = 0; });
  bad([](RunConfig& d) { d.wMin = 0.5, d.wMax = 0.4; });
  bad([](RunConfig& d) { d.dMin = -1; });
  bad([](RunConfig& d) { d.deHomFrq = -1; });
  bad([](RunConfig& d) { d.nelX = 1; });
}

TEST_CASE("density PGM layout") {
  const auto dir = scratchDir("pgm");
  const std::string p = (dir / "a.pgm").string();
  writeDensityPgm(Field::Ones(2, 2), p);
  CHECK(slurp(p) == std::string("P5\n2 2\n255\n") + std::string(4, '\xff'));
  Field f = Field::Zero(2, 3);
  f(0, 2) = 1;
  writeDensityPgm(f, p);
  const std::string s = slurp(p);
  CHECK(s.substr(s.size() - 6) == std::string("\0\0\xff\0\0\0", 6));
}

TEST_CASE("checkpoint round-trip is exact") {
  const auto dir = scratchDir("ckpt");
  MultiScaleResult r;
  r.nelX = 3;
  r.nelY = 2;
  r.w = Eigen::MatrixXd::Random(6, 2);
  r.N = {Eigen::MatrixXd::Random(6, 2), Eigen::MatrixXd::Random(6, 2)};
  r.w(0, 0) = 0.1 + 0.2;
  r.f = 1.0 / 3.0;
  r.J = 10.244999999999999;
  const std::string a = (dir / "a.txt").string(), b = (dir / "b.txt").string();
  saveCheckpoint(r, a);
  const MultiScaleResult q = loadCheckpoint(a);
  CHECK(q.nelX == 3);
  CHECK(q.nelY == 2);
  CHECK((q.w.array() == r.w.array()).all());
  CHECK((q.N[0].array() == r.N[0].array()).all());
  CHECK((q.N[1].array() == r.N[1].array()).all());
  CHECK(q.f == r.f);
  CHECK(q.J == r.J);
  saveCheckpoint(q, b);
  CHECK(slurp(a) == slurp(b));

  CHECK_THROWS(loadCheckpoint((dir / "missing.txt").string()));
  std::ofstream((dir / "junk.txt").string()) << "hello 1 2 3\n";
  CHECK_THROWS(loadCheckpoint((dir / "junk.txt").string()));
}

TEST_CASE("history CSV") {
  const auto dir = scratchDir("csv");
  std::vector<IterationRecord> h(5);
  for (int i = 0; i < 5; ++i) h[i].itr = i + 1;
  const std::string p = (dir / "h.csv").string();
  writeHistoryCsv(h, p);
  std::ifstream in(p);
  std::string line;
  std::getline(in, line);
  CHECK(line == "itr,obj,J,S,vol,ch,time,dehom_vol,dehom_time");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 5);
}

TEST_CASE("iteration line") {
  IterationRecord r;
  r.itr = 7;
  r.J = 12.5;
  const std::string s = formatIteration(r);
  for (const char* key : {"Itr:", "Obj:", "J:", "S:", "Vol:", "(ph:", "ch:", "Time:"}) CHECK(s.find(key) != std::string::npos);
}

TEST_CASE("fine evaluation") {
  RunConfig c = smallBridge();
  const ModelDefinition fine = buildModel(c, 2);
  CHECK(fine.fe.nelX == 60);
  MaterialConstants mat;
  mat.nu = fine.nu;
  const Field solid = Field::Ones(fine.fe.nelY, fine.fe.nelX);
  Eigen::VectorXd energy;
  const double J = evaluateFine(solid, fine, mat, &energy);
  StiffnessSystem sys(fine.fe);
  const double direct = compliance(fine.fe.F, sys.solveIsotropic(Eigen::VectorXd::Ones(fine.fe.numElements()), fine.nu));
  CHECK(J == doctest::Approx(direct).epsilon(1e-10));
  CHECK(energy.size() == fine.fe.numElements());

  Field passiveOnly = fine.solid.cast<double>();
  const double Jp = evaluateFine(passiveOnly, fine, mat);
  CHECK(std::isfinite(Jp));
  CHECK(Jp > 1e3 * J);
}

TEST_CASE("run, checkpoint reuse and outputs") {
  const auto dir = scratchDir("run");
  RunConfig c = smallBridge();
  c.deHomFrq = 5;
  c.eval = true;
  c.outDir = (dir / "first").string();
  std::ostringstream log;
  const RunOutput a = run(c, log);
  CHECK(a.report.iterations == 12);
  CHECK(a.history.size() == 12);
  int logged = 0;
  for (const auto& r : a.history) logged += r.dehomVol >= 0;
  CHECK(logged == 2);
  CHECK(a.report.fineX == 600);
  CHECK(a.report.fineY == 300);
  CHECK(a.report.epsF == doctest::Approx((a.dehom.rho.mean() - a.result.f) / a.result.f));
  CHECK(a.report.epsS ==
        doctest::Approx((a.report.Js * a.report.fs - a.result.J * a.result.f) / (a.result.J * a.result.f)));
  const std::string text = log.str();
  CHECK(text.find("Multi-scale structure, intermediate design") != std::string::npos);
  CHECK(text.find("Evaluated on 600x300 grid (x20 scaled)") != std::string::npos);
  for (const char* f : {"density.pgm", "energy.pgm", "history.csv", "checkpoint.txt"})
    CHECK(std::filesystem::exists(dir / "first" / f));

  RunConfig again = c;
  again.checkpoint = (dir / "first" / "checkpoint.txt").string();
  again.outDir = (dir / "second").string();
  again.deHomFrq = 0;
  std::ostringstream log2;
  const RunOutput b = run(again, log2);
  CHECK(b.report.iterations == 0);
  CHECK(b.history.empty());
  CHECK((b.dehom.rho == a.dehom.rho).all());
  CHECK(b.report.Js == a.report.Js);
  CHECK(text.substr(text.find("Multi-scale")).substr(0, 60) == log2.str().substr(0, 60));

  again.dMin = 0.1;
  again.eval = false;
  again.outDir.clear();
  std::ostringstream log3;
  const RunOutput d = run(again, log3);
  CHECK(d.report.fineX == 2 * a.report.fineX);
  CHECK(d.report.fineY == 2 * a.report.fineY);

  again.nelX = 40;
  std::ostringstream log4;
  CHECK_THROWS_AS(run(again, log4), std::invalid_argument);
}
