// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "platecav/mesh.hpp"
#include "platecav/types.hpp"

namespace platecav {

// Wall-pressure spectrum under a turbulent boundary layer. The analytic
// model is a separable Corcos wavenumber shape (Lorentzian ridge at
// k_x = omega/U_c) scaled by a Goody single-point frequency spectrum; a
// tabulated variant reads (f_Hz, kx, ky, phi_pp) rows with nearest-sample
// lookup.
struct SpectrumModel {
  enum class Kind { kCorcosGoody, kTabulated };
  Kind kind = Kind::kCorcosGoody;

  double u_inf = 230.0;    // free-stream velocity [m/s]
  double u_c = 161.0;      // convective velocity [m/s]
  double alpha_x = 0.116;  // streamwise Corcos decay
  double alpha_y = 0.7;    // spanwise Corcos decay
  double delta = 0.1;      // boundary layer thickness [m]
  double tau_w = 0.01;     // wall shear stress [Pa]
  double nu_air = 1.5e-5;  // kinematic viscosity [m^2/s]
  double rho_air = 1.21;   // fluid density for the friction velocity [kg/m^3]

  // Tabulated spectrum rows, used when kind == kTabulated.
  struct TableRow {
    double f_hz, kx, ky, phi;
  };
  std::vector<TableRow> table;

  void validate() const;
};

SpectrumModel load_tabulated_spectrum(const std::string& csv_path);

// Goody point spectrum Phi_pp(omega) [Pa^2 s].
double point_spectrum(const SpectrumModel& model, double omega);

// Wavenumber-frequency spectral density [Pa^2 m^2 s], normalized so that
// (1/4pi^2) * integral over (kx, ky) recovers the point spectrum.
double wall_pressure_spectrum(const SpectrumModel& model, double kx, double ky,
                              double omega);

// Symmetric uniform wavenumber grid, endpoints at +-kmax.
struct WavenumberGrid {
  VectorXd kx, ky;
  double dkx = 0, dky = 0;

  Index n_x() const { return kx.size(); }
  Index n_y() const { return ky.size(); }

  static WavenumberGrid symmetric(double kmax_x, double kmax_y, Index n_x,
                                  Index n_y);
};

// I.i.d. uniform phases on [0, 2*pi), reproducible per seed; entry (h, j)
// pairs with (kx_h, ky_j).
MatrixXd draw_phases(std::uint64_t seed, Index n_x, Index n_y);

// Plane-wave amplitude factors sqrt(Phi_pp dkx dky) / (2 pi) per component.
MatrixXd amplitude_matrix(const SpectrumModel& model, const WavenumberGrid& grid,
                          double omega);

// Superposition p(x) = sum_hj amp_hj exp(i (kx_h x + ky_j y + phi_hj)) at a
// fixed point set; the exponential tables depend only on (grid, points) and
// are reused for every sample.
class PlaneWaveSynthesizer {
 public:
  PlaneWaveSynthesizer(const WavenumberGrid& grid, const MatrixXd& points);
  VectorXcd evaluate(const MatrixXd& amplitudes, const MatrixXd& phases) const;
  Index point_count() const { return ex_.rows(); }

 private:
  MatrixXcd ex_;  // points x n_x
  MatrixXcd ey_;  // points x n_y
  Index n_x_, n_y_;
};

VectorXcd synthesize_pressure_field(const SpectrumModel& model,
                                    const WavenumberGrid& grid, double omega,
                                    const MatrixXd& points, const MatrixXd& phases);

// Nearest source point per plate node (Euclidean; ties broken by lowest
// source index).
std::vector<Index> nearest_source_map(const MatrixXd& source_points,
                                      const PlateMesh& plate);
VectorXcd transfer_to_mesh(const MatrixXd& source_points,
                           const VectorXcd& source_pressures,
                           const PlateMesh& plate);

// Consistent load vector from nodal pressures: bilinear interpolation inside
// each element, integrated against the deflection shape functions.
VectorXcd assemble_force_vector(const VectorXcd& nodal_pressures,
                                const PlateMesh& plate);

// Cell-center sampling grid standing in for an external wall-pressure mesh.
MatrixXd source_grid_points(double lx, double ly, Index nx, Index ny);

// Stochastic load samples at one frequency; fluid rows of every sample are
// identically zero, so only the n_s structural rows are stored.
struct LoadEnsemble {
  double f_hz = 0;
  Index freq_index = 0;  // position in the global sweep grid (seeds derive from it)
  Index n = 0;
  Index n_s = 0;
  std::uint64_t seed = 0;
  MatrixXcd samples;  // n_s x I

  Index sample_count() const { return samples.cols(); }
  VectorXcd full_sample(Index i) const;
  VectorXcd full_mean() const;
};

LoadEnsemble generate_ensemble_at(const SpectrumModel& model,
                                  const WavenumberGrid& grid,
                                  const PlateMesh& plate,
                                  const MatrixXd& source_points, double f_hz,
                                  Index freq_index, Index n_total,
                                  Index sample_count, std::uint64_t seed);

std::vector<LoadEnsemble> generate_ensemble(
    const SpectrumModel& model, const WavenumberGrid& grid, const PlateMesh& plate,
    const MatrixXd& source_points, const std::vector<double>& freqs_hz,
    const std::vector<Index>& freq_indices, Index n_total, Index sample_count,
    std::uint64_t seed);

// Per-frequency ensemble provider for sweeps: generated on the fly or loaded
// from files written by the excite stage. Implementations must be safe to
// call from concurrent workers.
class EnsembleSource {
 public:
  virtual ~EnsembleSource() = default;
  virtual LoadEnsemble at(double f_hz, Index grid_index) const = 0;
};

class GeneratedEnsembleSource final : public EnsembleSource {
 public:
  GeneratedEnsembleSource(SpectrumModel model, WavenumberGrid grid, PlateMesh plate,
                          MatrixXd source_points, Index n_total, Index sample_count,
                          std::uint64_t seed);
  LoadEnsemble at(double f_hz, Index grid_index) const override;

 private:
  SpectrumModel model_;
  WavenumberGrid grid_;
  PlateMesh plate_;
  MatrixXd source_points_;
  Index n_total_, sample_count_;
  std::uint64_t seed_;
};

void write_ensemble_binary(const std::string& path, const LoadEnsemble& e);
LoadEnsemble read_ensemble_binary(const std::string& path);
void write_ensemble_csv(const std::string& path, const LoadEnsemble& e);

}  // namespace platecav
