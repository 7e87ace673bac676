// SPDX-License-Identifier: Apache-2.0
//
// Batch driver for the plate-cavity uncertainty pipeline:
//   platecav assemble|excite|offline|sweep|compare --config run.cfg [options]
//
// Exit codes: 0 success, 2 usage/config error, 3 numerical failure (flagged
// frequency, residual breach, or violated comparison threshold), 4 I/O error.

#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "platecav/pipeline.hpp"

namespace {

platecav::RunConfig make_config(const std::string& config_path,
                                const std::vector<std::string>& overrides,
                                int threads_override, bool print_config) {
  platecav::KeyValueConfig kv = platecav::KeyValueConfig::from_file(config_path);
  for (const auto& line : overrides) kv.apply_line(line);
  if (threads_override > 0)
    kv.set("threads", std::to_string(threads_override));
  if (print_config) {
    std::fputs("# effective configuration\n", stdout);
    std::fputs(kv.dump().c_str(), stdout);
  }
  return platecav::RunConfig::parse(kv);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"plate-cavity vibroacoustic uncertainty pipeline"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> overrides;
  int threads = 0;
  bool print_config = false;
  bool force = false;
  app.add_option("--config", config_path, "key-value configuration file")
      ->required();
  app.add_option("--set", overrides,
                 "override a configuration key, e.g. --set sweep.samples=100");
  app.add_option("--threads", threads, "worker pool width (0 = all cores)");
  app.add_flag("--print-config", print_config, "dump the effective configuration");
  app.add_flag("--force", force, "overwrite existing outputs");

  auto* assemble = app.add_subcommand("assemble", "mesh and assemble K, M, C_sf");
  auto* excite = app.add_subcommand("excite", "generate load ensembles per frequency");
  auto* offline = app.add_subcommand("offline", "build the projection basis");
  auto* sweep = app.add_subcommand("sweep", "run a frequency sweep");
  auto* compare = app.add_subcommand("compare", "compare two sweep result sets");

  std::string mode_name = "fom";
  sweep->add_option("--mode", mode_name, "fom | fom-lowrank | rom");

  std::string dir_a, dir_b;
  compare->add_option("--a", dir_a, "reference sweep directory");
  compare->add_option("--b", dir_b, "approximation sweep directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return 0;  // --help
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return 2;
  }

  try {
    const platecav::RunConfig cfg =
        make_config(config_path, overrides, threads, print_config);
    if (assemble->parsed()) {
      platecav::cmd_assemble(cfg, force);
    } else if (excite->parsed()) {
      platecav::cmd_excite(cfg, force);
    } else if (offline->parsed()) {
      platecav::cmd_offline(cfg, force);
    } else if (sweep->parsed()) {
      const platecav::SweepMode mode = platecav::sweep_mode_from_name(mode_name);
      if (!platecav::cmd_sweep(cfg, mode, force)) return 3;
    } else if (compare->parsed()) {
      if (dir_a.empty()) dir_a = cfg.path("sweep_fom");
      if (dir_b.empty()) dir_b = cfg.path("sweep_rom");
      if (!platecav::cmd_compare(cfg, dir_a, dir_b)) return 3;
    }
  } catch (const platecav::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const platecav::ContractError& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return 2;
  } catch (const platecav::NumericalError& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return 3;
  } catch (const platecav::IoError& e) {
    std::fprintf(stderr, "i/o error: %s\n", e.what());
    return 4;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
