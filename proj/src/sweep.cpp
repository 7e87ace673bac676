// SPDX-License-Identifier: Apache-2.0
#include "platecav/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <thread>

namespace platecav {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

}  // namespace

std::string sweep_mode_name(SweepMode mode) {
  switch (mode) {
    case SweepMode::kFom: return "fom";
    case SweepMode::kFomLowRank: return "fom-lowrank";
    case SweepMode::kRom: return "rom";
  }
  return "unknown";
}

SweepMode sweep_mode_from_name(const std::string& name) {
  if (name == "fom") return SweepMode::kFom;
  if (name == "fom-lowrank" || name == "fom_lowrank") return SweepMode::kFomLowRank;
  if (name == "rom") return SweepMode::kRom;
  throw ConfigError("unknown sweep mode: " + name +
                    " (expected fom | fom-lowrank | rom)");
}

std::vector<double> SweepConfig::grid() const {
  std::vector<double> g;
  const auto steps =
      static_cast<Index>(std::floor((f_max_hz - f_min_hz) / step_hz + 0.5));
  for (Index i = 0; i <= steps; ++i) {
    const double f = f_min_hz + static_cast<double>(i) * step_hz;
    if (f <= f_max_hz + 1e-9 * step_hz) g.push_back(f);
  }
  return g;
}

Index SweepConfig::grid_index_of(double f_hz) const {
  const double pos = (f_hz - f_min_hz) / step_hz;
  const auto idx = static_cast<Index>(std::llround(pos));
  const double back = f_min_hz + static_cast<double>(idx) * step_hz;
  if (idx < 0 || std::abs(back - f_hz) > 1e-6 * step_hz ||
      f_hz > f_max_hz + 1e-9 * step_hz)
    throw ConfigError("frequency " + std::to_string(f_hz) +
                      " Hz does not lie on the sweep grid");
  return idx;
}

void SweepConfig::validate() const {
  if (f_min_hz < 0) throw ConfigError("f_min must be nonnegative");
  if (step_hz <= 0) throw ConfigError("frequency step must be positive");
  if (f_max_hz < f_min_hz) throw ConfigError("f_max must be >= f_min");
  if (sample_count < 2) throw ConfigError("sweep needs at least 2 samples");
  if (probe_dofs.empty()) throw ConfigError("no probe DOFs configured");
  for (const double f : cov_check_hz) grid_index_of(f);
  for (const double f : only_hz) grid_index_of(f);
}

PhaseTimings& PhaseTimings::operator+=(const PhaseTimings& o) {
  assemble += o.assemble;
  factorize += o.factorize;
  svd += o.svd;
  solve += o.solve;
  reduce += o.reduce;
  return *this;
}

PhaseTimings SweepResult::per_step_mean() const {
  PhaseTimings sum;
  Index count = 0;
  for (const auto& rec : records) {
    if (rec.flagged) continue;
    sum += rec.timings;
    ++count;
  }
  if (count > 0) {
    const double inv = 1.0 / static_cast<double>(count);
    sum.assemble *= inv;
    sum.factorize *= inv;
    sum.svd *= inv;
    sum.solve *= inv;
    sum.reduce *= inv;
  }
  return sum;
}

bool SweepResult::any_flagged() const {
  return std::any_of(records.begin(), records.end(),
                     [](const FrequencyRecord& r) { return r.flagged; });
}

const FrequencyRecord* SweepResult::record_at(double f_hz) const {
  for (const auto& rec : records)
    if (std::abs(rec.f_hz - f_hz) <= 1e-9 * std::max(1.0, std::abs(f_hz)))
      return &rec;
  return nullptr;
}

VectorXcd SweepResult::probe_trace(Index probe_position) const {
  VectorXcd trace(static_cast<Index>(records.size()));
  for (std::size_t i = 0; i < records.size(); ++i)
    trace[static_cast<Index>(i)] = records[i].probe_mean[probe_position];
  return trace;
}

namespace {

bool contains_frequency(const std::vector<double>& list, double f_hz) {
  for (const double f : list)
    if (std::abs(f - f_hz) <= 1e-9 * std::max(1.0, std::abs(f))) return true;
  return false;
}

// One FOM-family frequency step: factorize A(omega) once, solve the mean and
// either the full-sample-rank factors (FOM) or the truncated factors
// (FOM low-rank).
FrequencyRecord process_sparse_step(const SweepConfig& cfg,
                                    const CoupledSystem& sys,
                                    const EnsembleSource& source, double f_hz,
                                    Index grid_index, bool keep_covariance) {
  FrequencyRecord rec;
  rec.f_hz = f_hz;
  rec.grid_index = grid_index;
  const double omega = 2.0 * kPi * f_hz;

  const LoadEnsemble ensemble = source.at(f_hz, grid_index);

  auto t0 = Clock::now();
  SparseOperator op = dynamic_stiffness(sys, omega);
  rec.timings.assemble = seconds_since(t0);

  t0 = Clock::now();
  FomSolver solver(std::move(op), omega, cfg.residual_tol);
  rec.timings.factorize = seconds_since(t0);

  t0 = Clock::now();
  const MomentPair moments = estimate_moments(ensemble);
  LowRankFactorization lr;
  if (cfg.mean_only) {
    lr.U.resize(sys.n(), 0);
    lr.V.resize(sys.n(), 0);
    lr.S.resize(0);
  } else if (cfg.mode == SweepMode::kFomLowRank) {
    const Index l_cap = cfg.l_fixed > 0 ? cfg.l_fixed : cfg.l_max;
    const double tol = cfg.l_fixed > 0 ? 1.0 : cfg.energy_tol;
    lr = truncated_svd(moments, l_cap, tol);
  } else {
    // Exact given the ensemble: centered samples at unit weights.
    lr.hermitian = true;
    const auto& fc = std::get<FactoredCovariance>(moments.covariance);
    lr.U = MatrixXcd::Zero(fc.n, fc.factor.cols());
    lr.U.middleRows(fc.row_offset, fc.factor.rows()) = fc.factor;
    lr.V = lr.U;
    lr.S = VectorXd::Ones(fc.factor.cols());
  }
  rec.retained_rank = lr.rank();
  rec.timings.svd = seconds_since(t0);

  t0 = Clock::now();
  const VectorXcd mean_x = solve_mean(solver, moments.mean);
  SolutionCovariance cov = propagate_factors(solver, lr);
  rec.timings.solve = seconds_since(t0);

  rec.probe_mean.resize(static_cast<Index>(cfg.probe_dofs.size()));
  for (std::size_t p = 0; p < cfg.probe_dofs.size(); ++p)
    rec.probe_mean[static_cast<Index>(p)] = mean_x[cfg.probe_dofs[p]];
  if (keep_covariance) rec.covariance = std::move(cov);
  rec.stats = solver.stats();
  return rec;
}

// One reduced step: dense r x r operator, l+1 reduced solves, no sparse
// factorization or solve.
FrequencyRecord process_reduced_step(const SweepConfig& cfg,
                                     const EnsembleSource& source,
                                     const ProjectionBasis& basis,
                                     const ReducedSystem& reduced, double f_hz,
                                     Index grid_index, bool keep_covariance) {
  FrequencyRecord rec;
  rec.f_hz = f_hz;
  rec.grid_index = grid_index;
  const double omega = 2.0 * kPi * f_hz;

  const LoadEnsemble ensemble = source.at(f_hz, grid_index);

  auto t0 = Clock::now();
  const MomentPair moments = estimate_moments(ensemble);
  LowRankFactorization lr;
  if (cfg.mean_only) {
    lr.U.resize(basis.n(), 0);
    lr.V.resize(basis.n(), 0);
    lr.S.resize(0);
  } else {
    const Index l_cap = cfg.l_fixed > 0 ? cfg.l_fixed : cfg.l_max;
    const double tol = cfg.l_fixed > 0 ? 1.0 : cfg.energy_tol;
    lr = truncated_svd(moments, l_cap, tol);
  }
  rec.retained_rank = lr.rank();
  rec.timings.svd = seconds_since(t0);

  t0 = Clock::now();
  RomSolver solver(basis, reduced, omega, cfg.residual_tol);
  rec.timings.assemble = seconds_since(t0);  // dense operator + LU

  t0 = Clock::now();
  const VectorXcd mean_r = solver.solve_reduced_rhs(basis.V.adjoint() * moments.mean);
  SolutionCovariance cov;
  cov.hermitian = lr.hermitian;
  cov.S = lr.S;
  // Propagate in reduced coordinates, lift the factors once.
  MatrixXcd u_r(basis.r(), lr.rank());
  for (Index j = 0; j < lr.rank(); ++j)
    u_r.col(j) = solver.solve_reduced_rhs(basis.V.adjoint() * lr.U.col(j));
  cov.U = basis.V * u_r;
  if (lr.hermitian) {
    cov.V = cov.U;
  } else {
    MatrixXcd v_r(basis.r(), lr.rank());
    for (Index j = 0; j < lr.rank(); ++j)
      v_r.col(j) = solver.solve_reduced_rhs(basis.V.adjoint() * lr.V.col(j));
    cov.V = basis.V * v_r;
  }
  rec.timings.solve = seconds_since(t0);

  rec.probe_mean.resize(static_cast<Index>(cfg.probe_dofs.size()));
  for (std::size_t p = 0; p < cfg.probe_dofs.size(); ++p)
    rec.probe_mean[static_cast<Index>(p)] =
        (basis.V.row(cfg.probe_dofs[p]) * mean_r).value();
  if (keep_covariance) rec.covariance = std::move(cov);
  rec.stats = solver.stats();
  return rec;
}

}  // namespace

SweepResult run_sweep(const SweepConfig& cfg, const CoupledSystem& sys,
                      const EnsembleSource& source, const ProjectionBasis* basis,
                      const ReducedSystem* reduced) {
  cfg.validate();
  if (cfg.mode == SweepMode::kRom && (basis == nullptr || reduced == nullptr))
    throw ConfigError("ROM sweep requires a projection basis");
  for (const Index dof : cfg.probe_dofs)
    if (dof < 0 || dof >= sys.n()) throw ConfigError("probe DOF out of range");

  SweepResult result;
  result.mode = cfg.mode;
  result.grid = cfg.grid();
  result.probe_dofs = cfg.probe_dofs;

  // Evaluation list: the whole grid, or the requested subset.
  std::vector<std::pair<double, Index>> eval;
  for (std::size_t i = 0; i < result.grid.size(); ++i) {
    const double f = result.grid[i];
    if (!cfg.only_hz.empty() && !contains_frequency(cfg.only_hz, f)) continue;
    eval.emplace_back(f, static_cast<Index>(i));
  }
  result.records.resize(eval.size());

  int threads = cfg.threads > 0
                    ? cfg.threads
                    : static_cast<int>(std::thread::hardware_concurrency());
  if (threads < 1) threads = 1;
  threads = std::min<int>(threads, static_cast<int>(eval.size()));

  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr first_error;
  std::mutex error_mutex;

  auto worker = [&]() {
    for (;;) {
      if (failed.load()) return;
      const std::size_t k = next.fetch_add(1);
      if (k >= eval.size()) return;
      const auto [f_hz, grid_index] = eval[k];
      const bool keep = contains_frequency(cfg.cov_check_hz, f_hz);
      FrequencyRecord rec;
      try {
        rec = cfg.mode == SweepMode::kRom
                  ? process_reduced_step(cfg, source, *basis, *reduced, f_hz,
                                         grid_index, keep)
                  : process_sparse_step(cfg, sys, source, f_hz, grid_index, keep);
      } catch (const NumericalError& e) {
        rec.f_hz = f_hz;
        rec.grid_index = grid_index;
        rec.flagged = true;
        rec.flag_reason = e.what();
        std::fprintf(stderr, "warning: frequency %g Hz flagged and skipped: %s\n",
                     f_hz, e.what());
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        failed.store(true);
        return;
      }
      result.records[k] = std::move(rec);
    }
  };

  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (first_error) std::rethrow_exception(first_error);
  return result;
}

TransferError transfer_error(const VectorXcd& trace_a, const VectorXcd& trace_b) {
  if (trace_a.size() != trace_b.size())
    throw ContractError("transfer error traces differ in length");
  if (trace_a.size() == 0) throw ContractError("empty traces");
  double max_abs = 0.0, peak = 0.0;
  for (Index i = 0; i < trace_a.size(); ++i) {
    max_abs = std::max(max_abs, std::abs(std::abs(trace_a[i]) - std::abs(trace_b[i])));
    peak = std::max(peak, std::abs(trace_a[i]));
  }
  TransferError err;
  err.max_abs = max_abs;
  err.relative = peak > 0 ? max_abs / peak : 0.0;
  return err;
}

TransferError transfer_error(const std::vector<double>& grid_a,
                             const VectorXcd& trace_a,
                             const std::vector<double>& grid_b,
                             const VectorXcd& trace_b) {
  if (grid_a.size() != grid_b.size())
    throw ContractError("transfer error grids differ in length");
  for (std::size_t i = 0; i < grid_a.size(); ++i)
    if (std::abs(grid_a[i] - grid_b[i]) > 1e-9 * std::max(1.0, std::abs(grid_a[i])))
      throw ContractError("transfer error grids differ at position " +
                          std::to_string(i));
  return transfer_error(trace_a, trace_b);
}

double covariance_error(const SolutionCovariance& reference,
                        const SolutionCovariance& approx) {
  const double denom = covariance_frobenius(reference);
  if (denom <= 0.0)
    throw ContractError("covariance error reference has zero Frobenius norm");
  return covariance_frobenius_distance(reference, approx) / denom;
}

std::string timing_report(const std::vector<const SweepResult*>& results) {
  std::string out;
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%-22s", "per-step seconds");
  out += buf;
  for (const auto* r : results) {
    std::snprintf(buf, sizeof(buf), "%16s", sweep_mode_name(r->mode).c_str());
    out += buf;
  }
  out += '\n';

  const auto row = [&](const char* name, auto getter) {
    std::snprintf(buf, sizeof(buf), "%-22s", name);
    out += buf;
    for (const auto* r : results) {
      std::snprintf(buf, sizeof(buf), "%16.4f", getter(*r));
      out += buf;
    }
    out += '\n';
  };

  row("compute V (offline)", [](const SweepResult& r) { return r.offline_seconds; });
  row("svd", [](const SweepResult& r) { return r.per_step_mean().svd; });
  row("low-rank factors", [](const SweepResult& r) { return r.per_step_mean().solve; });
  row("assembly", [](const SweepResult& r) {
    const auto t = r.per_step_mean();
    return t.assemble + t.factorize;
  });
  row("total", [](const SweepResult& r) { return r.per_step_mean().total(); });
  row("total (first step)", [](const SweepResult& r) {
    return r.per_step_mean().total() + r.offline_seconds;
  });
  return out;
}

}  // namespace platecav
