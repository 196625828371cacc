#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "homog/csv.hpp"
#include "homog/runner.hpp"

using namespace homog;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  return std::string(std::istreambuf_iterator<char>(in), {});
}

fs::path fresh_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("homoglab_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST_CASE("parse_config: minimal valid text and canonical echo") {
  const ExperimentConfig cfg = parse_config(
      "# comment\n"
      "command = correctors\n"
      "dim = 2\n"
      "size = 16\n"
      "ensemble = checkerboard\n"
      "lambda = 0.25\n"
      "seed = 7\n");
  CHECK(cfg.command == Command::Correctors);
  CHECK(cfg.size == 16);
  CHECK(cfg.ensemble.kind == EnsembleKind::Checkerboard);
  CHECK(cfg.seed == 7);
  // echo is canonical: re-parsing reproduces the same echo byte for byte
  const std::string echo = echo_config(cfg);
  CHECK(echo_config(parse_config(echo)) == echo);
}

TEST_CASE("parse_config: out-of-range lambda names the field") {
  try {
    parse_config("command = correctors\nlambda = 1.5\n");
    FAIL("expected ValidationError");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ValidationError);
    CHECK(std::string(e.what()).find("lambda") != std::string::npos);
  }
}

TEST_CASE("parse_config: duplicate key reports the later line") {
  try {
    parse_config("command = correctors\nsize = 8\nsize = 16\n");
    FAIL("expected ParseError");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ParseError);
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
}

TEST_CASE("parse_config: malformed line and unknown key") {
  CHECK_THROWS_AS(parse_config("command = correctors\nnonsense\n"), Error);
  try {
    parse_config("command = correctors\nwidget = 3\n");
    FAIL("expected ParseError");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ParseError);
    CHECK(std::string(e.what()).find("widget") != std::string::npos);
  }
}

TEST_CASE("runner: constant ensemble correctors write the diagonal ah") {
  const fs::path out = fresh_dir("const_ah");
  ExperimentConfig cfg = parse_config(
      "command = correctors\n"
      "dim = 2\n"
      "size = 16\n"
      "ensemble = constant\n"
      "diag = 0.5, 0.75\n"
      "lambda = 0.25\n");
  cfg.out = out.string();
  const RunManifest man = run(cfg);
  CHECK(man.all_passed);
  const std::string ah = slurp(out / "ah.csv");
  CHECK(ah.find("1,1,0.5\n") != std::string::npos);
  CHECK(ah.find("2,2,0.75\n") != std::string::npos);
  CHECK(ah.find("1,2,0\n") != std::string::npos);
  CHECK(fs::exists(out / "manifest.txt"));
  for (const CertEntry& c : man.certifications) CHECK(c.passed);
}

TEST_CASE("runner: identical config reproduces identical bytes") {
  ExperimentConfig cfg = parse_config(
      "command = growth\n"
      "dim = 2\n"
      "size = 64\n"
      "ensemble = checkerboard\n"
      "lambda = 0.25\n"
      "seed = 3\n"
      "tol = 1e-11\n");
  const fs::path o1 = fresh_dir("rep1"), o2 = fresh_dir("rep2");
  cfg.out = o1.string();
  const RunManifest m1 = run(cfg);
  cfg.out = o2.string();
  const RunManifest m2 = run(cfg);
  CHECK(m1.all_passed);
  REQUIRE(m1.artifacts.size() == m2.artifacts.size());
  for (std::size_t i = 0; i < m1.artifacts.size(); ++i) {
    CHECK(m1.artifacts[i].name == m2.artifacts[i].name);
    CHECK(m1.artifacts[i].checksum == m2.artifacts[i].checksum);
    CHECK(slurp(o1 / m1.artifacts[i].name) == slurp(o2 / m2.artifacts[i].name));
  }
}

TEST_CASE("runner: byte reproducibility across thread counts") {
  ExperimentConfig cfg = parse_config(
      "command = thmT\n"
      "dim = 2\n"
      "size = 64\n"
      "ensemble = checkerboard\n"
      "lambda = 0.25\n"
      "seed = 3\n"
      "x0 = 10, 16\n"
      "tol = 1e-11\n");
  const fs::path o1 = fresh_dir("thr1"), o2 = fresh_dir("thr2");
  cfg.out = o1.string();
  cfg.threads = 1;
  const RunManifest m1 = run(cfg);
  cfg.out = o2.string();
  cfg.threads = 2;
  const RunManifest m2 = run(cfg);
  REQUIRE(m1.artifacts.size() == m2.artifacts.size());
  for (std::size_t i = 0; i < m1.artifacts.size(); ++i)
    CHECK(m1.artifacts[i].checksum == m2.artifacts[i].checksum);
}

TEST_CASE("runner: thmT rejects x0 too close to the origin") {
  ExperimentConfig cfg = parse_config(
      "command = thmT\n"
      "dim = 2\n"
      "size = 64\n"
      "ensemble = checkerboard\n"
      "lambda = 0.25\n"
      "seed = 3\n"
      "x0 = 3\n"
      "tol = 1e-11\n");
  cfg.out = fresh_dir("close").string();
  try {
    run(cfg);
    FAIL("expected PreconditionGeometry");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::PreconditionGeometry);
  }
}

TEST_CASE("csv doubles use shortest round-trip formatting") {
  CHECK(fmt_double(0.5) == "0.5");
  CHECK(fmt_double(1.0) == "1");
  CHECK(fmt_double(0.1) == "0.1");
  CHECK(fmt_double(1e-300) == "1e-300");
}

TEST_CASE("homoglab executable: exit codes and artifacts") {
  const char* exe_env = std::getenv("HOMOGLAB_EXE");
  const std::string exe = exe_env ? exe_env : "./homoglab";
  if (!fs::exists(exe)) return;  // exercised via ctest which sets the path

  const fs::path dir = fresh_dir("exe");
  const fs::path cfgp = dir / "run.cfg";
  {
    std::ofstream out(cfgp);
    out << "command = correctors\ndim = 2\nsize = 16\n"
           "ensemble = layered\nlambda = 0.25\nvalue_lo = 0.25\nperiod = 2\n";
  }
  const std::string base =
      exe + " correctors --config " + cfgp.string() + " --out " + dir.string();
  CHECK(std::system((base + " > /dev/null 2>&1").c_str()) == 0);
  CHECK(fs::exists(dir / "ah.csv"));
  CHECK(fs::exists(dir / "manifest.txt"));

  // wrong subcommand for the config's command: validation failure -> 2
  const std::string wrong =
      exe + " growth --config " + cfgp.string() + " --out " + dir.string();
  const int rc = std::system((wrong + " > /dev/null 2>&1").c_str());
  CHECK(WEXITSTATUS(rc) == 2);

  // missing config file -> parse/validation class failure
  const int rc2 =
      std::system((exe + " correctors --config /nonexistent.cfg > /dev/null 2>&1").c_str());
  CHECK(WEXITSTATUS(rc2) == 2);
}
