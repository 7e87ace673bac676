// SPDX-License-Identifier: Apache-2.0
#include "platecav/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "platecav/matrixmarket.hpp"

namespace platecav {

namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (const unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

void require_absent_or_force(const std::string& path, bool force) {
  if (!force && fs::exists(path))
    throw ConfigError("output already exists (use --force to overwrite): " + path);
}

void require_file(const std::string& path, const std::string& producer) {
  if (!fs::exists(path))
    throw ConfigError("missing input file " + path + "; run '" + producer +
                      "' first");
}

KeyValueConfig read_meta(const std::string& path) {
  return KeyValueConfig::from_file(path);
}

}  // namespace

RunConfig RunConfig::parse(const KeyValueConfig& raw) {
  RunConfig c;
  c.raw = raw;
  c.workdir = raw.get_string("paths.workdir", ".");
  c.seed = raw.get_u64("seed", 1);
  c.threads = static_cast<int>(raw.get_long("threads", 0));

  c.material.youngs_modulus = raw.get_double("mat.E", 70e9);
  c.material.thickness = raw.get_double("mat.t", 0.003);
  c.material.poisson_ratio = raw.get_double("mat.nu", 0.3);
  c.material.density_plate = raw.get_double("mat.rho_s", 2700.0);
  c.material.density_fluid = raw.get_double("mat.rho_f", 1.21);
  c.material.speed_of_sound = raw.get_double("mat.c", 340.0);
  c.material.loss_factor = raw.get_double("mat.eta", 0.0);
  c.material.validate();

  c.plate_lx = raw.get_double("plate.lx", 1.0);
  c.plate_ly = raw.get_double("plate.ly", 1.0);
  c.plate_nx = raw.get_long("plate.nx", 0);
  c.plate_ny = raw.get_long("plate.ny", 0);
  c.cavity_lz = raw.get_double("cavity.lz", 1.0);
  c.cavity_nz = raw.get_long("cavity.nz", 0);

  c.f_min = raw.get_double("sweep.f_min", 16.0);
  c.f_max = raw.get_double("sweep.f_max", 500.0);
  c.f_step = raw.get_double("sweep.step", 2.0);
  c.samples = raw.get_long("sweep.samples", 2);
  c.cov_check_hz = raw.get_double_list("sweep.cov_check", {});
  c.sweep_only_hz = raw.get_double_list("sweep.only", {});
  c.probe_struct = raw.get_long("sweep.probe_struct", -1);
  c.probe_fluid = raw.get_long("sweep.probe_fluid", -1);

  // Auto mesh sizing: ten nodes per shortest wavelength at the band top.
  const double f_top = c.f_max;
  if (c.plate_nx <= 0 || c.plate_ny <= 0) {
    const double lam_b = bending_wavelength(c.material, 2.0 * kPi * f_top);
    if (c.plate_nx <= 0) c.plate_nx = recommended_divisions(c.plate_lx, lam_b);
    if (c.plate_ny <= 0) c.plate_ny = recommended_divisions(c.plate_ly, lam_b);
  }
  if (c.cavity_nz <= 0) {
    const double lam_a = acoustic_wavelength(c.material.speed_of_sound, f_top);
    c.cavity_nz = recommended_divisions(c.cavity_lz, lam_a);
  }

  c.tbl_nx = raw.get_long("tbl.nx", 32);
  c.tbl_ny = raw.get_long("tbl.ny", 32);
  c.kmax_factor = raw.get_double("tbl.kmax_factor", 1.5);
  c.source_nx = raw.get_long("tbl.source_nx", 0);
  c.source_ny = raw.get_long("tbl.source_ny", 0);
  c.ensemble_csv = raw.get_bool("tbl.ensemble_csv", false);
  c.spectrum_kind = raw.get_string("tbl.spectrum", "corcos-goody");
  c.spectrum_table_path = raw.get_string("tbl.table_path", "");

  c.expansion_hz = raw.get_double_list("mor.expansion_hz", {});
  c.order = static_cast<int>(raw.get_long("mor.order", 20));
  c.deflation_tol = raw.get_double("mor.deflation_tol", 1e-10);
  c.include_right_factors = raw.get_bool("mor.include_right_factors", true);

  c.l_max = raw.get_long("rank.l_max", 64);
  c.energy_tol = raw.get_double("rank.energy_tol", 0.99);
  c.l_fixed = raw.get_long("rank.l_fixed", 0);

  c.compare_max_err_cov = raw.get_double("compare.max_err_cov", 0.0);
  c.compare_max_rel_transfer = raw.get_double("compare.max_rel_transfer", 0.0);
  return c;
}

PlateMesh RunConfig::plate() const {
  return build_plate_mesh(plate_lx, plate_ly, plate_nx, plate_ny);
}

CavityMesh RunConfig::cavity() const {
  return build_cavity_mesh(plate_lx, plate_ly, cavity_lz, plate_nx, plate_ny,
                           cavity_nz);
}

SpectrumModel RunConfig::spectrum() const {
  if (spectrum_kind == "table") {
    if (spectrum_table_path.empty())
      throw ConfigError("tbl.spectrum = table requires tbl.table_path");
    return load_tabulated_spectrum(spectrum_table_path);
  }
  if (spectrum_kind != "corcos-goody")
    throw ConfigError("unknown spectrum kind: " + spectrum_kind);
  SpectrumModel m;
  m.u_inf = raw.get_double("tbl.u_inf", 230.0);
  m.u_c = raw.get_double("tbl.u_c", 0.7 * m.u_inf);
  m.alpha_x = raw.get_double("tbl.alpha_x", 0.116);
  m.alpha_y = raw.get_double("tbl.alpha_y", 0.7);
  m.delta = raw.get_double("tbl.delta", 0.1);
  m.tau_w = raw.get_double("tbl.tau_w", 0.01);
  m.nu_air = raw.get_double("tbl.nu_air", 1.5e-5);
  m.rho_air = raw.get_double("tbl.rho_air", material.density_fluid);
  m.validate();
  return m;
}

WavenumberGrid RunConfig::wavenumber_grid() const {
  const double omega_max = 2.0 * kPi * f_max;
  const double u_c = raw.get_double("tbl.u_c", 0.7 * raw.get_double("tbl.u_inf", 230.0));
  const double kmax = kmax_factor * omega_max / u_c;
  return WavenumberGrid::symmetric(kmax, kmax, tbl_nx, tbl_ny);
}

MatrixXd RunConfig::source_points() const {
  const Index snx = source_nx > 0 ? source_nx : plate_nx + 7;
  const Index sny = source_ny > 0 ? source_ny : plate_ny + 7;
  return source_grid_points(plate_lx, plate_ly, snx, sny);
}

std::vector<double> RunConfig::resolved_expansion_hz() const {
  std::vector<double> pts = expansion_hz;
  if (pts.empty()) {
    // Reference points 114 and 414 Hz on the 16-500 band, carried over
    // proportionally and snapped to the grid when the band differs.
    for (const double ref : {114.0, 414.0}) {
      const double rel = (ref - 16.0) / (500.0 - 16.0);
      double f = f_min + rel * (f_max - f_min);
      f = f_min + std::round((f - f_min) / f_step) * f_step;
      pts.push_back(std::min(f, f_max));
    }
  }
  return pts;
}

std::vector<Index> RunConfig::resolved_probes() const {
  const PlateMesh pm = plate();
  const CavityMesh cm = cavity();
  std::vector<Index> probes;

  if (probe_struct >= 0) {
    probes.push_back(probe_struct);
  } else {
    // w DOF of the node nearest an off-symmetry interior point.
    const double tx = 0.31 * plate_lx, ty = 0.62 * plate_ly;
    Index best_node = 0;
    double best = 1e300;
    for (Index node = 0; node < pm.node_count(); ++node) {
      const auto xy = pm.node_coord(node);
      const double d = (xy[0] - tx) * (xy[0] - tx) + (xy[1] - ty) * (xy[1] - ty);
      if (d < best) {
        best = d;
        best_node = node;
      }
    }
    probes.push_back(pm.dof(best_node, PlateMesh::kW));
  }

  if (probe_fluid >= 0) {
    probes.push_back(probe_fluid);
  } else {
    const double tx = 0.41 * plate_lx, ty = 0.57 * plate_ly, tz = 0.44 * cavity_lz;
    Index best_node = 0;
    double best = 1e300;
    for (Index node = 0; node < cm.node_count(); ++node) {
      const auto xyz = cm.node_coord(node);
      const double d = (xyz[0] - tx) * (xyz[0] - tx) + (xyz[1] - ty) * (xyz[1] - ty) +
                       (xyz[2] - tz) * (xyz[2] - tz);
      if (d < best) {
        best = d;
        best_node = node;
      }
    }
    probes.push_back(pm.dof_count() + best_node);
  }
  return probes;
}

SweepConfig RunConfig::sweep_config(SweepMode mode) const {
  SweepConfig sc;
  sc.f_min_hz = f_min;
  sc.f_max_hz = f_max;
  sc.step_hz = f_step;
  sc.mode = mode;
  sc.probe_dofs = resolved_probes();
  sc.seed = seed;
  sc.sample_count = samples;
  sc.l_max = l_max;
  sc.energy_tol = energy_tol;
  sc.l_fixed = l_fixed;
  sc.cov_check_hz = cov_check_hz;
  sc.only_hz = sweep_only_hz;
  sc.threads = threads;
  return sc;
}

std::string RunConfig::path(const std::string& name) const {
  return (fs::path(workdir) / name).string();
}

std::uint64_t model_digest(const RunConfig& cfg) {
  std::ostringstream ss;
  ss << cfg.plate_nx << ' ' << cfg.plate_ny << ' ' << format_g17(cfg.plate_lx)
     << ' ' << format_g17(cfg.plate_ly) << " | " << cfg.cavity_nz << ' '
     << format_g17(cfg.cavity_lz) << " | " << format_g17(cfg.material.youngs_modulus)
     << ' ' << format_g17(cfg.material.thickness) << ' '
     << format_g17(cfg.material.poisson_ratio) << ' '
     << format_g17(cfg.material.density_plate) << ' '
     << format_g17(cfg.material.density_fluid) << ' '
     << format_g17(cfg.material.speed_of_sound) << ' '
     << format_g17(cfg.material.loss_factor)
     << " | dofs: w wx wy wxy per plate node, p per cavity node, structure first";
  return fnv1a(ss.str());
}

std::string ensemble_file_name(Index grid_index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "ens_%05lld.ens", static_cast<long long>(grid_index));
  return buf;
}

std::string factors_file_name(Index grid_index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "cov_%05lld.lrf", static_cast<long long>(grid_index));
  return buf;
}

// ---------------------------------------------------------------------------
// assemble

void cmd_assemble(const RunConfig& cfg, bool force) {
  fs::create_directories(cfg.workdir);
  const std::string k_path = cfg.path("K.mtx");
  const std::string m_path = cfg.path("M.mtx");
  const std::string c_path = cfg.path("Csf.mtx");
  const std::string meta_path = cfg.path("model.meta");
  for (const auto& p : {k_path, m_path, c_path, meta_path})
    require_absent_or_force(p, force);

  const PlateMesh pm = cfg.plate();
  const CavityMesh cm = cfg.cavity();
  const CoupledSystem sys = assemble_coupled(pm, cm, cfg.material);
  const SpMat csf = assemble_coupling(pm, cm);

  std::vector<std::string> comments = {
      "n_s = " + std::to_string(sys.n_s),
      "n_f = " + std::to_string(sys.n_f),
      "plate nx ny lx ly = " + std::to_string(pm.nx) + " " + std::to_string(pm.ny) +
          " " + format_g17(pm.lx) + " " + format_g17(pm.ly),
      "cavity nz lz = " + std::to_string(cm.nz) + " " + format_g17(cm.lz)};
  write_market_sparse(k_path, sys.K, comments);
  write_market_sparse(m_path, sys.M, comments);
  write_market_sparse(c_path, csf, comments);

  const auto probes = cfg.resolved_probes();
  std::ofstream meta(meta_path);
  if (!meta) throw IoError("cannot write " + meta_path);
  meta << "n_s = " << sys.n_s << '\n';
  meta << "n_f = " << sys.n_f << '\n';
  meta << "n = " << sys.n() << '\n';
  meta << "digest = " << model_digest(cfg) << '\n';
  meta << "probe_struct_dof = " << probes[0] << '\n';
  meta << "probe_fluid_dof = " << probes[1] << '\n';
  if (!meta) throw IoError("write failed: " + meta_path);

  std::printf("assembled coupled system: n = %lld (n_s = %lld, n_f = %lld)\n",
              static_cast<long long>(sys.n()), static_cast<long long>(sys.n_s),
              static_cast<long long>(sys.n_f));
  if (std::abs(static_cast<double>(sys.n()) - 40800.0) < 0.02 * 40800.0)
    std::printf("note: model size matches the 40800-DOF large-scale reference "
                "configuration\n");
}

namespace {

CoupledSystem load_system(const RunConfig& cfg) {
  const std::string k_path = cfg.path("K.mtx");
  const std::string m_path = cfg.path("M.mtx");
  const std::string meta_path = cfg.path("model.meta");
  require_file(k_path, "assemble");
  require_file(m_path, "assemble");
  require_file(meta_path, "assemble");

  const KeyValueConfig meta = read_meta(meta_path);
  if (meta.get_u64("digest", 0) != model_digest(cfg))
    throw ConfigError("model.meta digest does not match the configuration; "
                      "re-run assemble");

  CoupledSystem sys;
  sys.K = read_market_sparse(k_path);
  sys.M = read_market_sparse(m_path);
  sys.n_s = meta.get_long("n_s", 0);
  sys.n_f = meta.get_long("n_f", 0);
  sys.loss_factor = cfg.material.loss_factor;
  sys.rho_f = cfg.material.density_fluid;
  if (sys.K.rows() != sys.n() || sys.M.rows() != sys.n())
    throw IoError("matrix files are inconsistent with model.meta");
  return sys;
}

}  // namespace

// ---------------------------------------------------------------------------
// excite

void cmd_excite(const RunConfig& cfg, bool force) {
  const std::string meta_path = cfg.path("model.meta");
  require_file(meta_path, "assemble");
  const KeyValueConfig meta = read_meta(meta_path);
  if (meta.get_u64("digest", 0) != model_digest(cfg))
    throw ConfigError("model.meta digest does not match the configuration");
  const Index n_total = meta.get_long("n", 0);

  const std::string ens_dir = cfg.path("ensembles");
  fs::create_directories(ens_dir);

  const PlateMesh pm = cfg.plate();
  const SpectrumModel model = cfg.spectrum();
  const WavenumberGrid grid = cfg.wavenumber_grid();
  const MatrixXd src = cfg.source_points();
  const SweepConfig sc = cfg.sweep_config(SweepMode::kFom);
  const std::vector<double> freqs = sc.grid();

  GeneratedEnsembleSource source(model, grid, pm, src, n_total, cfg.samples,
                                 cfg.seed);

  int threads = cfg.threads > 0
                    ? cfg.threads
                    : static_cast<int>(std::thread::hardware_concurrency());
  if (threads < 1) threads = 1;

  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto worker = [&]() {
    for (;;) {
      if (failed.load()) return;
      const std::size_t k = next.fetch_add(1);
      if (k >= freqs.size()) return;
      try {
        const auto idx = static_cast<Index>(k);
        const std::string out =
            (fs::path(ens_dir) / ensemble_file_name(idx)).string();
        if (!force && fs::exists(out))
          throw ConfigError("output already exists (use --force): " + out);
        const LoadEnsemble e = source.at(freqs[k], idx);
        write_ensemble_binary(out, e);
        if (cfg.ensemble_csv) {
          std::string csv = out;
          csv.replace(csv.size() - 4, 4, ".csv");
          write_ensemble_csv(csv, e);
        }
        std::fprintf(stderr, "excite: %7.2f Hz (%zu/%zu)\n", freqs[k], k + 1,
                     freqs.size());
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        failed.store(true);
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);

  std::printf("excite: wrote %zu ensembles (I = %lld) to %s\n", freqs.size(),
              static_cast<long long>(cfg.samples), ens_dir.c_str());
}

FileEnsembleSource::FileEnsembleSource(std::string directory)
    : directory_(std::move(directory)) {}

LoadEnsemble FileEnsembleSource::at(double f_hz, Index grid_index) const {
  const std::string path =
      (fs::path(directory_) / ensemble_file_name(grid_index)).string();
  require_file(path, "excite");
  LoadEnsemble e = read_ensemble_binary(path);
  if (std::abs(e.f_hz - f_hz) > 1e-6 * std::max(1.0, f_hz))
    throw IoError(path + ": ensemble frequency " + std::to_string(e.f_hz) +
                  " does not match requested " + std::to_string(f_hz));
  return e;
}

// ---------------------------------------------------------------------------
// offline

void cmd_offline(const RunConfig& cfg, bool force) {
  const std::string basis_path = cfg.path("basis.mtx");
  const std::string basis_meta = cfg.path("basis.meta");
  require_absent_or_force(basis_path, force);
  require_absent_or_force(basis_meta, force);

  const CoupledSystem sys = load_system(cfg);
  const SweepConfig sc = cfg.sweep_config(SweepMode::kFom);
  FileEnsembleSource source(cfg.path("ensembles"));

  const auto t0 = Clock::now();

  ExpansionConfig ec;
  ec.frequencies_hz = cfg.resolved_expansion_hz();
  ec.order = cfg.order;
  ec.deflation_tol = cfg.deflation_tol;
  for (const double f : ec.frequencies_hz) {
    const Index gi = sc.grid_index_of(f);
    const LoadEnsemble ensemble = source.at(f, gi);
    const MomentPair moments = estimate_moments(ensemble);
    const Index l_cap = cfg.l_fixed > 0 ? cfg.l_fixed : cfg.l_max;
    const double tol = cfg.l_fixed > 0 ? 1.0 : cfg.energy_tol;
    const LowRankFactorization lr = truncated_svd(moments, l_cap, tol);

    MatrixXcd inputs(sys.n(), 1 + lr.rank() +
                                  (cfg.include_right_factors ? lr.rank() : 0));
    inputs.col(0) = moments.mean;
    inputs.middleCols(1, lr.rank()) = lr.U;
    if (cfg.include_right_factors)
      inputs.middleCols(1 + lr.rank(), lr.rank()) = lr.V;
    ec.inputs.push_back(std::move(inputs));
    std::printf("offline: %g Hz, retained rank %lld, %lld inputs\n", f,
                static_cast<long long>(lr.rank()),
                static_cast<long long>(ec.inputs.back().cols()));
  }

  SolveStats stats;
  ProjectionBasis basis;
  try {
    basis = build_basis(sys, ec, &stats);
  } catch (const NumericalError& e) {
    throw NumericalError(std::string(e.what()) +
                         "; shift the expansion point off the resonance "
                         "(mor.expansion_hz)");
  }
  const double offline_seconds = seconds_since(t0);

  save_basis(basis, basis_path, basis_meta);
  std::ofstream meta(basis_meta, std::ios::app);
  meta << "offline_seconds = " << format_g17(offline_seconds) << '\n';
  meta << "sparse_solves = " << stats.sparse_solves << '\n';

  std::printf("offline: candidates = %lld, r = %lld, deflated = %zu, %.1f s\n",
              static_cast<long long>(basis.candidate_count),
              static_cast<long long>(basis.r()), basis.deflations.size(),
              offline_seconds);
}

// ---------------------------------------------------------------------------
// sweep

namespace {

void write_trace_csv(const std::string& path, const SweepResult& result,
                     std::size_t probe_position, Index probe_dof) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << "# probe_dof=" << probe_dof << " mode=" << sweep_mode_name(result.mode)
      << '\n';
  out << "f_hz,re,im,abs\n";
  for (const auto& rec : result.records) {
    if (rec.flagged) continue;
    const Complex v = rec.probe_mean[static_cast<Index>(probe_position)];
    out << format_g17(rec.f_hz) << ',' << format_g17(v.real()) << ','
        << format_g17(v.imag()) << ',' << format_g17(std::abs(v)) << '\n';
  }
  if (!out) throw IoError("write failed: " + path);
}

void write_timings_csv(const std::string& path, const SweepResult& result) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << "f_hz,assemble,factorize,svd,solve,reduce,total,sparse_solves,"
         "reduced_solves,rank,flagged\n";
  for (const auto& rec : result.records) {
    const auto& t = rec.timings;
    out << format_g17(rec.f_hz) << ',' << t.assemble << ',' << t.factorize << ','
        << t.svd << ',' << t.solve << ',' << t.reduce << ',' << t.total() << ','
        << rec.stats.sparse_solves << ',' << rec.stats.reduced_solves << ','
        << rec.retained_rank << ',' << (rec.flagged ? 1 : 0) << '\n';
  }
}

}  // namespace

bool cmd_sweep(const RunConfig& cfg, SweepMode mode, bool force) {
  const CoupledSystem sys = load_system(cfg);
  FileEnsembleSource source(cfg.path("ensembles"));
  SweepConfig sc = cfg.sweep_config(mode);

  const std::string out_dir = cfg.path("sweep_" + sweep_mode_name(mode));
  if (!force && fs::exists(out_dir))
    throw ConfigError("output already exists (use --force): " + out_dir);
  fs::create_directories(out_dir);

  ProjectionBasis basis;
  ReducedSystem reduced;
  double offline_seconds = 0;
  if (mode == SweepMode::kRom) {
    const std::string basis_path = cfg.path("basis.mtx");
    const std::string basis_meta = cfg.path("basis.meta");
    require_file(basis_path, "offline");
    require_file(basis_meta, "offline");
    basis = load_basis(basis_path, basis_meta);
    if (basis.n() != sys.n())
      throw ConfigError("basis dimension does not match the assembled system");
    offline_seconds = read_meta(basis_meta).get_double("offline_seconds", 0.0);
    const auto t0 = Clock::now();
    reduced = reduce(sys, basis);
    offline_seconds += seconds_since(t0);
  }

  SweepResult result =
      run_sweep(sc, sys, source, mode == SweepMode::kRom ? &basis : nullptr,
                mode == SweepMode::kRom ? &reduced : nullptr);
  result.offline_seconds = offline_seconds;

  // Traces per probe, factors at the checked frequencies, timings, meta.
  const auto probes = sc.probe_dofs;
  for (std::size_t p = 0; p < probes.size(); ++p) {
    char name[48];
    std::snprintf(name, sizeof(name), "trace_dof%lld.csv",
                  static_cast<long long>(probes[p]));
    write_trace_csv((fs::path(out_dir) / name).string(), result, p, probes[p]);
  }
  for (const auto& rec : result.records)
    if (rec.covariance)
      write_factors_binary(
          (fs::path(out_dir) / factors_file_name(rec.grid_index)).string(),
          *rec.covariance);
  write_timings_csv((fs::path(out_dir) / "timings.csv").string(), result);

  std::ofstream meta((fs::path(out_dir) / "sweep.meta").string());
  meta << "mode = " << sweep_mode_name(mode) << '\n';
  meta << "f_min = " << format_g17(sc.f_min_hz) << '\n';
  meta << "f_max = " << format_g17(sc.f_max_hz) << '\n';
  meta << "step = " << format_g17(sc.step_hz) << '\n';
  meta << "samples = " << sc.sample_count << '\n';
  meta << "offline_seconds = " << format_g17(offline_seconds) << '\n';
  meta << "probe_dofs = ";
  for (std::size_t p = 0; p < probes.size(); ++p)
    meta << (p ? "," : "") << probes[p];
  meta << '\n';
  meta << "evaluated = " << result.records.size() << '\n';

  Index flagged = 0;
  for (const auto& rec : result.records)
    if (rec.flagged) ++flagged;
  meta << "flagged = " << flagged << '\n';

  std::printf("sweep %s: %zu evaluations, %lld flagged, mean step %.3f s\n",
              sweep_mode_name(mode).c_str(), result.records.size(),
              static_cast<long long>(flagged), result.per_step_mean().total());
  return flagged == 0;
}

// ---------------------------------------------------------------------------
// factors container

void write_factors_binary(const std::string& path, const SolutionCovariance& sc) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << "PCLRF1\n";
  out << sc.dim() << ' ' << sc.rank() << ' ' << (sc.hermitian ? 1 : 0) << '\n';
  out.write(reinterpret_cast<const char*>(sc.S.data()),
            static_cast<std::streamsize>(sizeof(double) * sc.S.size()));
  out.write(reinterpret_cast<const char*>(sc.U.data()),
            static_cast<std::streamsize>(sizeof(Complex) * sc.U.size()));
  if (!sc.hermitian)
    out.write(reinterpret_cast<const char*>(sc.V.data()),
              static_cast<std::streamsize>(sizeof(Complex) * sc.V.size()));
  if (!out) throw IoError("write failed: " + path);
}

SolutionCovariance read_factors_binary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::string magic;
  std::getline(in, magic);
  if (magic != "PCLRF1") throw IoError(path + ": not a factors file");
  std::string header;
  std::getline(in, header);
  std::istringstream hs(header);
  Index n = 0, l = 0;
  int herm = 0;
  if (!(hs >> n >> l >> herm)) throw IoError(path + ": malformed header");
  SolutionCovariance sc;
  sc.hermitian = herm != 0;
  sc.S.resize(l);
  sc.U.resize(n, l);
  in.read(reinterpret_cast<char*>(sc.S.data()),
          static_cast<std::streamsize>(sizeof(double) * sc.S.size()));
  in.read(reinterpret_cast<char*>(sc.U.data()),
          static_cast<std::streamsize>(sizeof(Complex) * sc.U.size()));
  if (sc.hermitian) {
    sc.V = sc.U;
  } else {
    sc.V.resize(n, l);
    in.read(reinterpret_cast<char*>(sc.V.data()),
            static_cast<std::streamsize>(sizeof(Complex) * sc.V.size()));
  }
  if (!in) throw IoError(path + ": truncated payload");
  return sc;
}

// ---------------------------------------------------------------------------
// compare

namespace {

struct Trace {
  std::vector<double> f_hz;
  VectorXcd values;
};

Trace read_trace_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open trace: " + path);
  Trace t;
  std::vector<Complex> vals;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line.front() == '#' || line.rfind("f_hz", 0) == 0) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ss(line);
    double f = 0, re = 0, im = 0;
    if (!(ss >> f >> re >> im)) throw IoError(path + ": malformed row: " + line);
    t.f_hz.push_back(f);
    vals.emplace_back(re, im);
  }
  t.values.resize(static_cast<Index>(vals.size()));
  for (std::size_t i = 0; i < vals.size(); ++i)
    t.values[static_cast<Index>(i)] = vals[i];
  return t;
}

std::string describe_grid(const Trace& t) {
  if (t.f_hz.empty()) return "(empty)";
  std::ostringstream ss;
  ss << t.f_hz.front() << ".." << t.f_hz.back() << " Hz, " << t.f_hz.size()
     << " points";
  return ss.str();
}

}  // namespace

bool cmd_compare(const RunConfig& cfg, const std::string& dir_a,
                 const std::string& dir_b) {
  const std::string meta_a_path = (fs::path(dir_a) / "sweep.meta").string();
  const std::string meta_b_path = (fs::path(dir_b) / "sweep.meta").string();
  require_file(meta_a_path, "sweep");
  require_file(meta_b_path, "sweep");
  const KeyValueConfig meta_a = read_meta(meta_a_path);
  const KeyValueConfig meta_b = read_meta(meta_b_path);

  const std::string report_dir = cfg.path("report");
  fs::create_directories(report_dir);

  bool ok = true;

  // Transfer errors per probe trace.
  std::ofstream terr((fs::path(report_dir) / "transfer_error.csv").string());
  terr << "probe_dof,max_abs,relative\n";
  const auto probes = cfg.resolved_probes();
  for (const Index dof : probes) {
    char name[48];
    std::snprintf(name, sizeof(name), "trace_dof%lld.csv",
                  static_cast<long long>(dof));
    const Trace ta = read_trace_csv((fs::path(dir_a) / name).string());
    const Trace tb = read_trace_csv((fs::path(dir_b) / name).string());
    if (ta.f_hz.size() != tb.f_hz.size())
      throw ContractError("trace grids differ: " + dir_a + " has " +
                          describe_grid(ta) + ", " + dir_b + " has " +
                          describe_grid(tb));
    for (std::size_t i = 0; i < ta.f_hz.size(); ++i)
      if (std::abs(ta.f_hz[i] - tb.f_hz[i]) > 1e-9)
        throw ContractError("trace grids differ: " + dir_a + " has " +
                            describe_grid(ta) + ", " + dir_b + " has " +
                            describe_grid(tb));
    const TransferError err = transfer_error(ta.values, tb.values);
    terr << dof << ',' << format_g17(err.max_abs) << ','
         << format_g17(err.relative) << '\n';
    std::printf("transfer error dof %lld: max-abs %.3e, relative %.3e\n",
                static_cast<long long>(dof), err.max_abs, err.relative);
    if (cfg.compare_max_rel_transfer > 0 &&
        err.relative > cfg.compare_max_rel_transfer)
      ok = false;
  }

  // Covariance errors at every frequency both sides kept factors for.
  std::ofstream cerr_csv((fs::path(report_dir) / "err_cov.csv").string());
  cerr_csv << "f_hz,err_cov\n";
  const SweepConfig sc = cfg.sweep_config(SweepMode::kFom);
  for (const double f : cfg.cov_check_hz) {
    const Index gi = sc.grid_index_of(f);
    const std::string fa = (fs::path(dir_a) / factors_file_name(gi)).string();
    const std::string fb = (fs::path(dir_b) / factors_file_name(gi)).string();
    if (!fs::exists(fa) || !fs::exists(fb)) continue;
    const SolutionCovariance a = read_factors_binary(fa);
    const SolutionCovariance b = read_factors_binary(fb);
    const double err = covariance_error(a, b);
    cerr_csv << format_g17(f) << ',' << format_g17(err) << '\n';
    std::printf("covariance error at %g Hz: %.3e\n", f, err);
    if (cfg.compare_max_err_cov > 0 && err > cfg.compare_max_err_cov) ok = false;
  }

  // Timing table from the recorded per-step timings.
  std::ofstream ttable((fs::path(report_dir) / "timing_table.txt").string());
  for (const auto* meta : {&meta_a, &meta_b}) {
    const std::string dir = meta == &meta_a ? dir_a : dir_b;
    ttable << "mode " << meta->get_string("mode", "?") << " (" << dir
           << "): offline " << meta->get_string("offline_seconds", "0")
           << " s, evaluated " << meta->get_string("evaluated", "0") << '\n';
  }

  std::printf("verdict: %s\n", ok ? "PASS" : "FAIL");
  return ok;
}

}  // namespace platecav
