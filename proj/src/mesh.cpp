// SPDX-License-Identifier: Apache-2.0
#include "platecav/mesh.hpp"

#include <cmath>

namespace platecav {

void MaterialProperties::validate() const {
  if (youngs_modulus <= 0 || thickness <= 0 || density_plate <= 0 ||
      density_fluid <= 0 || speed_of_sound <= 0)
    throw ConfigError("material properties must be strictly positive");
  if (poisson_ratio <= 0.0 || poisson_ratio >= 0.5)
    throw ConfigError("poisson ratio must lie in (0, 0.5)");
  if (loss_factor < 0)
    throw ConfigError("loss factor must be nonnegative");
}

PlateMesh build_plate_mesh(double lx, double ly, Index nx, Index ny) {
  if (lx <= 0 || ly <= 0) throw ConfigError("plate dimensions must be positive");
  if (nx < 2 || ny < 2) throw ConfigError("plate needs at least 2x2 elements");
  return PlateMesh{nx, ny, lx, ly};
}

CavityMesh build_cavity_mesh(double lx, double ly, double lz, Index nx, Index ny,
                             Index nz) {
  if (lx <= 0 || ly <= 0 || lz <= 0)
    throw ConfigError("cavity dimensions must be positive");
  if (nx < 2 || ny < 2 || nz < 2)
    throw ConfigError("cavity needs at least 2x2x2 elements");
  return CavityMesh{nx, ny, nz, lx, ly, lz};
}

double bending_wavelength(const MaterialProperties& mat, double omega) {
  if (omega <= 0) throw ContractError("bending wavelength needs omega > 0");
  const double mu = mat.density_plate * mat.thickness;  // mass per area
  return 2.0 * kPi * std::pow(mat.bending_stiffness() / (mu * omega * omega), 0.25);
}

double acoustic_wavelength(double speed_of_sound, double frequency_hz) {
  if (frequency_hz <= 0) throw ContractError("acoustic wavelength needs f > 0");
  return speed_of_sound / frequency_hz;
}

Index recommended_divisions(double length, double wavelength,
                            int nodes_per_wavelength) {
  // n nodes per wavelength <=> element size <= lambda / (n - 1); we use the
  // conservative lambda / n.
  const double h_max = wavelength / static_cast<double>(nodes_per_wavelength);
  const auto n = static_cast<Index>(std::ceil(length / h_max));
  return n < 2 ? 2 : n;
}

}  // namespace platecav
