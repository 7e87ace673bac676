// SPDX-License-Identifier: Apache-2.0
#include "platecav/tbl.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "platecav/assembly.hpp"
#include "platecav/matrixmarket.hpp"
#include "platecav/rng.hpp"

namespace platecav {

void SpectrumModel::validate() const {
  if (kind == Kind::kTabulated) {
    if (table.empty()) throw ConfigError("tabulated spectrum has no rows");
    return;
  }
  if (u_c <= 0) throw ConfigError("convective velocity must be positive");
  if (u_inf <= 0 || delta <= 0 || tau_w <= 0 || nu_air <= 0 || rho_air <= 0)
    throw ConfigError("spectrum parameters must be positive");
  if (alpha_x <= 0 || alpha_y <= 0)
    throw ConfigError("Corcos decay coefficients must be positive");
}

SpectrumModel load_tabulated_spectrum(const std::string& csv_path) {
  std::ifstream in(csv_path);
  if (!in) throw IoError("cannot open spectrum table: " + csv_path);
  SpectrumModel model;
  model.kind = SpectrumModel::Kind::kTabulated;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty() || line.front() == '#') continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ss(line);
    SpectrumModel::TableRow row{};
    if (!(ss >> row.f_hz >> row.kx >> row.ky >> row.phi)) {
      if (first) {  // header row
        first = false;
        continue;
      }
      throw IoError(csv_path + ": malformed row: " + line);
    }
    if (row.phi < 0) throw IoError(csv_path + ": negative spectral density");
    first = false;
    model.table.push_back(row);
  }
  if (model.table.empty()) throw IoError(csv_path + ": no data rows");
  return model;
}

double point_spectrum(const SpectrumModel& model, double omega) {
  if (omega <= 0) throw ContractError("point spectrum needs omega > 0");
  // Goody (2004) with C1 = 0.5, C2 = 3.0, C3 = 1.1 R_T^-0.57.
  const double x = omega * model.delta / model.u_inf;
  const double u_tau2 = model.tau_w / model.rho_air;
  const double r_t = u_tau2 * model.delta / (model.u_inf * model.nu_air);
  const double c3 = 1.1 * std::pow(r_t, -0.57);
  const double den =
      std::pow(std::pow(x, 0.75) + 0.5, 3.7) + std::pow(c3 * x, 7.0);
  const double scale = model.tau_w * model.tau_w * model.delta / model.u_inf;
  return scale * 3.0 * x * x / den;
}

namespace {

double nearest_table_value(const SpectrumModel& model, double kx, double ky,
                           double omega) {
  const double f = omega / (2.0 * kPi);
  double best = std::numeric_limits<double>::max();
  double phi = 0.0;
  // Frequency mismatch dominates the metric so the nearest frequency slice
  // wins before the in-plane distance is compared.
  for (const auto& row : model.table) {
    const double df = (row.f_hz - f);
    const double d = df * df * 1e6 + (row.kx - kx) * (row.kx - kx) +
                     (row.ky - ky) * (row.ky - ky);
    if (d < best) {
      best = d;
      phi = row.phi;
    }
  }
  return phi;
}

}  // namespace

double wall_pressure_spectrum(const SpectrumModel& model, double kx, double ky,
                              double omega) {
  model.validate();
  if (omega <= 0) throw ContractError("wall pressure spectrum needs omega > 0");
  if (model.kind == SpectrumModel::Kind::kTabulated)
    return nearest_table_value(model, kx, ky, omega);

  const double kc = omega / model.u_c;
  const double wx = model.alpha_x * kc;
  const double wy = model.alpha_y * kc;
  // Normalized Lorentzians: integral over each direction is 1, so the
  // 4 pi^2 factor makes (1/4pi^2) int Phi dk recover the point spectrum.
  const double lx = (wx / kPi) / ((kx - kc) * (kx - kc) + wx * wx);
  const double ly = (wy / kPi) / (ky * ky + wy * wy);
  return 4.0 * kPi * kPi * point_spectrum(model, omega) * lx * ly;
}

WavenumberGrid WavenumberGrid::symmetric(double kmax_x, double kmax_y, Index n_x,
                                         Index n_y) {
  if (n_x < 1 || n_y < 1) throw ConfigError("wavenumber grid needs n >= 1");
  if (kmax_x <= 0 || kmax_y <= 0) throw ConfigError("wavenumber extent must be positive");
  WavenumberGrid g;
  g.kx = VectorXd::LinSpaced(n_x, -kmax_x, kmax_x);
  g.ky = VectorXd::LinSpaced(n_y, -kmax_y, kmax_y);
  g.dkx = n_x > 1 ? 2.0 * kmax_x / static_cast<double>(n_x - 1) : 2.0 * kmax_x;
  g.dky = n_y > 1 ? 2.0 * kmax_y / static_cast<double>(n_y - 1) : 2.0 * kmax_y;
  return g;
}

MatrixXd draw_phases(std::uint64_t seed, Index n_x, Index n_y) {
  if (n_x < 1 || n_y < 1) throw ContractError("phase matrix needs n >= 1");
  RandomStream rs(seed);
  MatrixXd phases(n_x, n_y);
  for (Index h = 0; h < n_x; ++h)
    for (Index j = 0; j < n_y; ++j)
      phases(h, j) = 2.0 * kPi * rs.next_uniform01();
  return phases;
}

MatrixXd amplitude_matrix(const SpectrumModel& model, const WavenumberGrid& grid,
                          double omega) {
  MatrixXd amp(grid.n_x(), grid.n_y());
  const double cell = grid.dkx * grid.dky;
  for (Index h = 0; h < grid.n_x(); ++h)
    for (Index j = 0; j < grid.n_y(); ++j) {
      const double phi = wall_pressure_spectrum(model, grid.kx[h], grid.ky[j], omega);
      amp(h, j) = std::sqrt(phi * cell) / (2.0 * kPi);
    }
  return amp;
}

PlaneWaveSynthesizer::PlaneWaveSynthesizer(const WavenumberGrid& grid,
                                           const MatrixXd& points)
    : n_x_(grid.n_x()), n_y_(grid.n_y()) {
  if (points.cols() != 2) throw ContractError("points must be N x 2");
  const Index np = points.rows();
  ex_.resize(np, n_x_);
  ey_.resize(np, n_y_);
  for (Index i = 0; i < np; ++i) {
    for (Index h = 0; h < n_x_; ++h)
      ex_(i, h) = std::polar(1.0, grid.kx[h] * points(i, 0));
    for (Index j = 0; j < n_y_; ++j)
      ey_(i, j) = std::polar(1.0, grid.ky[j] * points(i, 1));
  }
}

VectorXcd PlaneWaveSynthesizer::evaluate(const MatrixXd& amplitudes,
                                         const MatrixXd& phases) const {
  if (amplitudes.rows() != n_x_ || amplitudes.cols() != n_y_)
    throw ContractError("amplitude matrix shape mismatch");
  if (phases.rows() != n_x_ || phases.cols() != n_y_)
    throw ContractError("phase matrix shape mismatch");

  MatrixXcd c(n_x_, n_y_);
  for (Index h = 0; h < n_x_; ++h)
    for (Index j = 0; j < n_y_; ++j)
      c(h, j) = std::polar(amplitudes(h, j), phases(h, j));

  // p_i = sum_h ex(i,h) * [sum_j c(h,j) ey(i,j)]
  const MatrixXcd d = ey_ * c.transpose();  // points x n_x
  return (ex_.array() * d.array()).rowwise().sum();
}

VectorXcd synthesize_pressure_field(const SpectrumModel& model,
                                    const WavenumberGrid& grid, double omega,
                                    const MatrixXd& points,
                                    const MatrixXd& phases) {
  const PlaneWaveSynthesizer synth(grid, points);
  return synth.evaluate(amplitude_matrix(model, grid, omega), phases);
}

std::vector<Index> nearest_source_map(const MatrixXd& source_points,
                                      const PlateMesh& plate) {
  if (source_points.rows() == 0) throw ConfigError("empty source point set");
  if (source_points.cols() != 2) throw ContractError("source points must be N x 2");
  std::vector<Index> map(static_cast<std::size_t>(plate.node_count()));
  for (Index node = 0; node < plate.node_count(); ++node) {
    const auto xy = plate.node_coord(node);
    double best = std::numeric_limits<double>::max();
    Index arg = 0;
    for (Index s = 0; s < source_points.rows(); ++s) {
      const double dx = source_points(s, 0) - xy[0];
      const double dy = source_points(s, 1) - xy[1];
      const double d = dx * dx + dy * dy;
      if (d < best) {  // strict: ties keep the lowest source index
        best = d;
        arg = s;
      }
    }
    map[static_cast<std::size_t>(node)] = arg;
  }
  return map;
}

VectorXcd transfer_to_mesh(const MatrixXd& source_points,
                           const VectorXcd& source_pressures,
                           const PlateMesh& plate) {
  if (source_pressures.size() != source_points.rows())
    throw ContractError("source pressure count does not match point count");
  const auto map = nearest_source_map(source_points, plate);
  VectorXcd nodal(plate.node_count());
  for (Index node = 0; node < plate.node_count(); ++node)
    nodal[node] = source_pressures[map[static_cast<std::size_t>(node)]];
  return nodal;
}

namespace {

// 16x4 load block mapping element corner pressures to consistent loads;
// identical to the coupling block restricted to the plate grid.
Eigen::Matrix<double, 16, 4> element_load_block(double a, double b) {
  Eigen::Matrix<double, 16, 4> L;
  L.setZero();
  constexpr int cxi[4] = {0, 1, 1, 0};
  constexpr int ceta[4] = {0, 0, 1, 1};
  // 3x3 Gauss on [0,1]^2
  const double gp[3] = {0.5 * (1.0 - 0.77459666924148338), 0.5,
                        0.5 * (1.0 + 0.77459666924148338)};
  const double gw[3] = {0.5 * 0.55555555555555556, 0.5 * 0.88888888888888889,
                        0.5 * 0.55555555555555556};
  auto lin = [](int end, double t) { return end == 0 ? 1.0 - t : t; };
  for (int gx = 0; gx < 3; ++gx)
    for (int gy = 0; gy < 3; ++gy) {
      const double w = gw[gx] * gw[gy] * a * b;
      const PlateShape s = plate_shape_values(gp[gx], gp[gy], a, b);
      for (int j = 0; j < 4; ++j) {
        const double q = lin(cxi[j], gp[gx]) * lin(ceta[j], gp[gy]);
        for (int i = 0; i < 16; ++i) L(i, j) += w * s.value[i] * q;
      }
    }
  return L;
}

}  // namespace

VectorXcd assemble_force_vector(const VectorXcd& nodal_pressures,
                                const PlateMesh& plate) {
  if (nodal_pressures.size() != plate.node_count())
    throw ContractError("nodal pressure vector has wrong length");
  const Eigen::Matrix<double, 16, 4> L = element_load_block(plate.dx(), plate.dy());
  VectorXcd f = VectorXcd::Zero(plate.dof_count());
  for (Index e = 0; e < plate.element_count(); ++e) {
    const auto nodes = plate.element_nodes(e);
    Eigen::Vector4cd pc;
    for (int c = 0; c < 4; ++c) pc[c] = nodal_pressures[nodes[c]];
    const Eigen::Matrix<Complex, 16, 1> fe = L.cast<Complex>() * pc;
    for (int c = 0; c < 4; ++c)
      for (int fam = 0; fam < 4; ++fam)
        f[plate.dof(nodes[c], fam)] += fe[4 * c + fam];
  }
  return f;
}

MatrixXd source_grid_points(double lx, double ly, Index nx, Index ny) {
  if (nx < 1 || ny < 1) throw ConfigError("source grid needs nx, ny >= 1");
  MatrixXd pts(nx * ny, 2);
  Index r = 0;
  for (Index j = 0; j < ny; ++j)
    for (Index i = 0; i < nx; ++i, ++r) {
      pts(r, 0) = (static_cast<double>(i) + 0.5) * lx / static_cast<double>(nx);
      pts(r, 1) = (static_cast<double>(j) + 0.5) * ly / static_cast<double>(ny);
    }
  return pts;
}

VectorXcd LoadEnsemble::full_sample(Index i) const {
  VectorXcd f = VectorXcd::Zero(n);
  f.head(n_s) = samples.col(i);
  return f;
}

VectorXcd LoadEnsemble::full_mean() const {
  VectorXcd f = VectorXcd::Zero(n);
  f.head(n_s) = samples.rowwise().mean();
  return f;
}

LoadEnsemble generate_ensemble_at(const SpectrumModel& model,
                                  const WavenumberGrid& grid,
                                  const PlateMesh& plate,
                                  const MatrixXd& source_points, double f_hz,
                                  Index freq_index, Index n_total,
                                  Index sample_count, std::uint64_t seed) {
  if (sample_count < 2)
    throw ContractError("ensemble needs at least 2 samples");
  if (n_total < plate.dof_count())
    throw ContractError("total dimension smaller than plate DOF count");
  const double omega = 2.0 * kPi * f_hz;

  const PlaneWaveSynthesizer synth(grid, source_points);
  const MatrixXd amp = amplitude_matrix(model, grid, omega);
  const auto nn = nearest_source_map(source_points, plate);

  LoadEnsemble e;
  e.f_hz = f_hz;
  e.freq_index = freq_index;
  e.n = n_total;
  e.n_s = plate.dof_count();
  e.seed = seed;
  e.samples.resize(e.n_s, sample_count);

  VectorXcd nodal(plate.node_count());
  for (Index i = 0; i < sample_count; ++i) {
    RandomStream rs = RandomStream::for_sample(
        seed, static_cast<std::uint64_t>(freq_index), static_cast<std::uint64_t>(i));
    MatrixXd phases(grid.n_x(), grid.n_y());
    for (Index h = 0; h < grid.n_x(); ++h)
      for (Index j = 0; j < grid.n_y(); ++j)
        phases(h, j) = 2.0 * kPi * rs.next_uniform01();
    const VectorXcd p_src = synth.evaluate(amp, phases);
    for (Index node = 0; node < plate.node_count(); ++node)
      nodal[node] = p_src[nn[static_cast<std::size_t>(node)]];
    e.samples.col(i) = assemble_force_vector(nodal, plate);
  }
  return e;
}

std::vector<LoadEnsemble> generate_ensemble(
    const SpectrumModel& model, const WavenumberGrid& grid, const PlateMesh& plate,
    const MatrixXd& source_points, const std::vector<double>& freqs_hz,
    const std::vector<Index>& freq_indices, Index n_total, Index sample_count,
    std::uint64_t seed) {
  if (freqs_hz.size() != freq_indices.size())
    throw ContractError("frequency list and index list differ in length");
  std::vector<LoadEnsemble> out;
  out.reserve(freqs_hz.size());
  for (std::size_t k = 0; k < freqs_hz.size(); ++k)
    out.push_back(generate_ensemble_at(model, grid, plate, source_points,
                                       freqs_hz[k], freq_indices[k], n_total,
                                       sample_count, seed));
  return out;
}

GeneratedEnsembleSource::GeneratedEnsembleSource(SpectrumModel model,
                                                 WavenumberGrid grid,
                                                 PlateMesh plate,
                                                 MatrixXd source_points,
                                                 Index n_total, Index sample_count,
                                                 std::uint64_t seed)
    : model_(std::move(model)),
      grid_(std::move(grid)),
      plate_(plate),
      source_points_(std::move(source_points)),
      n_total_(n_total),
      sample_count_(sample_count),
      seed_(seed) {}

LoadEnsemble GeneratedEnsembleSource::at(double f_hz, Index grid_index) const {
  return generate_ensemble_at(model_, grid_, plate_, source_points_, f_hz,
                              grid_index, n_total_, sample_count_, seed_);
}

void write_ensemble_binary(const std::string& path, const LoadEnsemble& e) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write ensemble file: " + path);
  out << "PCENS1\n";
  out << format_g17(e.f_hz) << ' ' << e.freq_index << ' ' << e.n << ' ' << e.n_s
      << ' ' << e.sample_count() << ' ' << e.seed << '\n';
  out.write(reinterpret_cast<const char*>(e.samples.data()),
            static_cast<std::streamsize>(sizeof(Complex) * e.samples.size()));
  if (!out) throw IoError("write failed: " + path);
}

LoadEnsemble read_ensemble_binary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open ensemble file: " + path);
  std::string magic;
  std::getline(in, magic);
  if (magic != "PCENS1") throw IoError(path + ": not an ensemble file");
  LoadEnsemble e;
  Index samples = 0;
  std::string header;
  std::getline(in, header);
  std::istringstream hs(header);
  if (!(hs >> e.f_hz >> e.freq_index >> e.n >> e.n_s >> samples >> e.seed))
    throw IoError(path + ": malformed ensemble header");
  e.samples.resize(e.n_s, samples);
  in.read(reinterpret_cast<char*>(e.samples.data()),
          static_cast<std::streamsize>(sizeof(Complex) * e.samples.size()));
  if (!in) throw IoError(path + ": truncated ensemble payload");
  return e;
}

void write_ensemble_csv(const std::string& path, const LoadEnsemble& e) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write ensemble file: " + path);
  out << "# f_hz=" << format_g17(e.f_hz) << " freq_index=" << e.freq_index
      << " n=" << e.n << " n_s=" << e.n_s << " samples=" << e.sample_count()
      << " seed=" << e.seed << '\n';
  out << "# rows are structural DOFs 0..n_s-1 (fluid rows are zero);"
         " columns re_0,im_0,re_1,im_1,...\n";
  out << "dof";
  for (Index i = 0; i < e.sample_count(); ++i) out << ",re_" << i << ",im_" << i;
  out << '\n';
  for (Index r = 0; r < e.n_s; ++r) {
    out << r;
    for (Index i = 0; i < e.sample_count(); ++i)
      out << ',' << format_g17(e.samples(r, i).real()) << ','
          << format_g17(e.samples(r, i).imag());
    out << '\n';
  }
  if (!out) throw IoError("write failed: " + path);
}

}  // namespace platecav
