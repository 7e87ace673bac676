// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "platecav/pipeline.hpp"

using namespace platecav;
namespace fs = std::filesystem;

namespace {

const char* cli_path() { return PLATECAV_CLI_PATH; }

int run_cli(const std::string& args) {
  const std::string cmd = std::string(cli_path()) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

std::string write_toy_config(const fs::path& dir) {
  fs::create_directories(dir);
  const fs::path cfg_path = dir / "run.cfg";
  std::ofstream cfg(cfg_path);
  cfg << "paths.workdir = " << (dir / "work").string() << "\n"
      << "seed = 4242\n"
      << "threads = 2\n"
      << "plate.nx = 4\n"
      << "plate.ny = 4\n"
      << "cavity.nz = 4\n"
      << "sweep.f_min = 60\n"
      << "sweep.f_max = 200\n"
      << "sweep.step = 10\n"
      << "sweep.samples = 16\n"
      << "sweep.cov_check = 60,120,200\n"
      << "mor.expansion_hz = 90,180\n"
      << "mor.order = 5\n"
      << "rank.l_fixed = 4\n";
  return cfg_path.string();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("cli pipeline end to end on a toy model") {
  const fs::path dir = fs::temp_directory_path() / "platecav_cli_test";
  fs::remove_all(dir);
  const std::string cfg = write_toy_config(dir);
  const std::string base = "--config " + cfg + " ";

  REQUIRE(run_cli(base + "assemble") == 0);
  CHECK(fs::exists(dir / "work" / "K.mtx"));
  CHECK(fs::exists(dir / "work" / "M.mtx"));
  CHECK(fs::exists(dir / "work" / "Csf.mtx"));
  CHECK(fs::exists(dir / "work" / "model.meta"));

  // idempotence guard: refusal without --force
  CHECK(run_cli(base + "assemble") == 2);
  CHECK(run_cli(base + "--force assemble") == 0);

  REQUIRE(run_cli(base + "excite") == 0);
  CHECK(fs::exists(dir / "work" / "ensembles" / ensemble_file_name(0)));

  // offline requires the ensembles and matrices
  REQUIRE(run_cli(base + "offline") == 0);
  CHECK(fs::exists(dir / "work" / "basis.mtx"));
  CHECK(fs::exists(dir / "work" / "basis.meta"));

  REQUIRE(run_cli(base + "sweep --mode fom") == 0);
  REQUIRE(run_cli(base + "sweep --mode fom-lowrank") == 0);
  REQUIRE(run_cli(base + "sweep --mode rom") == 0);
  CHECK(fs::exists(dir / "work" / "sweep_fom" / "timings.csv"));
  CHECK(fs::exists(dir / "work" / "sweep_rom" / "sweep.meta"));

  // compare fom against itself: all-zero error report, PASS verdict
  REQUIRE(run_cli(base + "compare --a " + (dir / "work" / "sweep_fom").string() +
                  " --b " + (dir / "work" / "sweep_fom").string()) == 0);
  const std::string errcsv = slurp(dir / "work" / "report" / "err_cov.csv");
  CHECK(errcsv.find("f_hz,err_cov") != std::string::npos);
  for (const std::string line : {std::string("60,0\n"), std::string("120,0\n")})
    CHECK(errcsv.find(line) != std::string::npos);

  // fom vs rom with a generous threshold passes, with an absurd one fails
  REQUIRE(run_cli(base + "--set compare.max_err_cov=5.0 compare") == 0);
  CHECK(run_cli(base + "--set compare.max_err_cov=1e-300 compare") == 3);

  fs::remove_all(dir);
}

TEST_CASE("cli usage and error codes") {
  const fs::path dir = fs::temp_directory_path() / "platecav_cli_err";
  fs::remove_all(dir);
  const std::string cfg = write_toy_config(dir);
  const std::string base = "--config " + cfg + " ";

  CHECK(run_cli("") == 2);                          // missing subcommand
  CHECK(run_cli("--config /nonexistent assemble") == 4);
  CHECK(run_cli(base + "sweep --mode bogus") == 2);
  CHECK(run_cli(base + "excite") == 2);             // model.meta missing
  CHECK(run_cli(base + "sweep --mode rom") == 2);   // assemble outputs missing

  REQUIRE(run_cli(base + "assemble") == 0);
  CHECK(run_cli(base + "sweep --mode rom") == 2);   // ensembles + basis missing

  // config digest mismatch after changing the mesh
  CHECK(run_cli(base + "--set plate.nx=5 excite") == 2);

  fs::remove_all(dir);
}

TEST_CASE("print-config dumps the effective configuration") {
  const fs::path dir = fs::temp_directory_path() / "platecav_cli_print";
  fs::remove_all(dir);
  const std::string cfg = write_toy_config(dir);
  const std::string cmd = std::string(cli_path()) + " --config " + cfg +
                          " --set sweep.samples=33 --print-config assemble > " +
                          (dir / "out.txt").string() + " 2>/dev/null";
  REQUIRE(WEXITSTATUS(std::system(cmd.c_str())) == 0);
  const std::string out = slurp(dir / "out.txt");
  CHECK(out.find("sweep.samples = 33") != std::string::npos);
  CHECK(out.find("mor.order = 5") != std::string::npos);
  fs::remove_all(dir);
}
