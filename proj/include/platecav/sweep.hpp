// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "platecav/krylov.hpp"
#include "platecav/moments.hpp"
#include "platecav/tbl.hpp"
#include "platecav/types.hpp"

namespace platecav {

// FOM: exact reference; mean plus full-sample-rank factor propagation.
// FOM low-rank: truncated-SVD factors propagated through the sparse operator.
// ROM: truncated-SVD factors propagated through the reduced operator; no
// sparse solve is performed after the offline phase.
enum class SweepMode { kFom, kFomLowRank, kRom };

std::string sweep_mode_name(SweepMode mode);
SweepMode sweep_mode_from_name(const std::string& name);

struct SweepConfig {
  double f_min_hz = 16.0;
  double f_max_hz = 500.0;
  double step_hz = 2.0;
  SweepMode mode = SweepMode::kFom;
  std::vector<Index> probe_dofs;
  std::uint64_t seed = 0;
  Index sample_count = 2;
  Index l_max = 64;
  double energy_tol = 0.99;
  Index l_fixed = 0;                 // > 0 pins the retained rank
  bool mean_only = false;            // skip the covariance pipeline entirely
  std::vector<double> cov_check_hz;  // keep solution factors at these grid points
  std::vector<double> only_hz;       // restrict evaluation (empty = whole grid)
  int threads = 0;                   // 0 = hardware concurrency
  double residual_tol = 1e-8;

  std::vector<double> grid() const;
  Index grid_index_of(double f_hz) const;  // throws if f_hz is off-grid
  void validate() const;
};

struct PhaseTimings {
  double assemble = 0;   // operator formation (A(omega) or reduced operator)
  double factorize = 0;  // sparse or dense factorization
  double svd = 0;        // moment estimation + truncated SVD
  double solve = 0;      // mean + factor solves (and lifting in ROM mode)
  double reduce = 0;     // offline projection; zero inside per-frequency steps

  double total() const { return assemble + factorize + svd + solve + reduce; }
  PhaseTimings& operator+=(const PhaseTimings& o);
};

struct FrequencyRecord {
  double f_hz = 0;
  Index grid_index = 0;
  bool flagged = false;
  std::string flag_reason;
  VectorXcd probe_mean;  // one entry per probe DOF
  Index retained_rank = 0;
  PhaseTimings timings;
  SolveStats stats;
  std::optional<SolutionCovariance> covariance;
};

struct SweepResult {
  SweepMode mode = SweepMode::kFom;
  std::vector<double> grid;               // full configured grid
  std::vector<FrequencyRecord> records;   // one per evaluated frequency
  std::vector<Index> probe_dofs;
  double offline_seconds = 0;             // basis + reduction cost (ROM)

  PhaseTimings per_step_mean() const;
  bool any_flagged() const;
  const FrequencyRecord* record_at(double f_hz) const;
  VectorXcd probe_trace(Index probe_position) const;  // over evaluated records
};

// basis/reduced are required in ROM mode and ignored otherwise.
SweepResult run_sweep(const SweepConfig& cfg, const CoupledSystem& sys,
                      const EnsembleSource& source,
                      const ProjectionBasis* basis = nullptr,
                      const ReducedSystem* reduced = nullptr);

// max_f | |a| - |b| | and the same normalized by max_f |a|.
struct TransferError {
  double max_abs = 0;
  double relative = 0;
};
TransferError transfer_error(const std::vector<double>& grid_a,
                             const VectorXcd& trace_a,
                             const std::vector<double>& grid_b,
                             const VectorXcd& trace_b);
TransferError transfer_error(const VectorXcd& trace_a, const VectorXcd& trace_b);

// || Sigma_a - Sigma_b ||_F / || Sigma_a ||_F via factor Gram algebra.
double covariance_error(const SolutionCovariance& reference,
                        const SolutionCovariance& approx);

// Plain-text table with per-mode columns and the offline cost reported
// separately (amortized over the evaluated steps).
std::string timing_report(const std::vector<const SweepResult*>& results);

}  // namespace platecav
