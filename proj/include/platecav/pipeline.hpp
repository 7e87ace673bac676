// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "platecav/config.hpp"
#include "platecav/sweep.hpp"

namespace platecav {

// Effective run configuration derived from the flat key-value file. Every
// stage rebuilds exactly the same objects from the same keys, so stages can
// run in separate processes with only files in between.
struct RunConfig {
  KeyValueConfig raw;

  std::string workdir = ".";
  std::uint64_t seed = 1;
  int threads = 0;

  MaterialProperties material;
  double plate_lx = 1.0, plate_ly = 1.0;
  Index plate_nx = 20, plate_ny = 20;
  double cavity_lz = 1.0;
  Index cavity_nz = 20;

  Index tbl_nx = 32, tbl_ny = 32;
  double kmax_factor = 1.5;
  Index source_nx = 0, source_ny = 0;  // 0 = plate divisions + 7
  bool ensemble_csv = false;
  std::string spectrum_kind = "corcos-goody";
  std::string spectrum_table_path;

  double f_min = 16.0, f_max = 500.0, f_step = 2.0;
  Index samples = 2;
  std::vector<double> cov_check_hz;
  std::vector<double> sweep_only_hz;
  Index probe_struct = -1, probe_fluid = -1;  // -1 = auto near-center picks

  std::vector<double> expansion_hz;  // empty = proportional defaults
  int order = 20;
  double deflation_tol = 1e-10;
  bool include_right_factors = true;

  Index l_max = 64;
  double energy_tol = 0.99;
  Index l_fixed = 0;

  double compare_max_err_cov = 0;       // 0 = no threshold
  double compare_max_rel_transfer = 0;  // 0 = no threshold

  static RunConfig parse(const KeyValueConfig& raw);

  PlateMesh plate() const;
  CavityMesh cavity() const;
  SpectrumModel spectrum() const;
  WavenumberGrid wavenumber_grid() const;
  MatrixXd source_points() const;
  std::vector<double> resolved_expansion_hz() const;
  SweepConfig sweep_config(SweepMode mode) const;
  std::vector<Index> resolved_probes() const;

  std::string path(const std::string& name) const;
};

// Stage entry points; each works purely from (config, files of prior stages).
void cmd_assemble(const RunConfig& cfg, bool force);
void cmd_excite(const RunConfig& cfg, bool force);
void cmd_offline(const RunConfig& cfg, bool force);
// Returns false when any frequency was flagged.
bool cmd_sweep(const RunConfig& cfg, SweepMode mode, bool force);
// Returns false when a configured threshold was violated.
bool cmd_compare(const RunConfig& cfg, const std::string& dir_a,
                 const std::string& dir_b);

// Ensemble provider backed by the files the excite stage wrote.
class FileEnsembleSource final : public EnsembleSource {
 public:
  explicit FileEnsembleSource(std::string directory);
  LoadEnsemble at(double f_hz, Index grid_index) const override;

 private:
  std::string directory_;
};

// Compact binary container for propagated covariance factors.
void write_factors_binary(const std::string& path, const SolutionCovariance& sc);
SolutionCovariance read_factors_binary(const std::string& path);

std::string ensemble_file_name(Index grid_index);
std::string factors_file_name(Index grid_index);

std::uint64_t model_digest(const RunConfig& cfg);

}  // namespace platecav
