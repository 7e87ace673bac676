// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>

#include "platecav/types.hpp"

namespace platecav {

struct MaterialProperties {
  double youngs_modulus = 70e9;   // [Pa]
  double thickness = 0.003;       // [m]
  double poisson_ratio = 0.3;
  double density_plate = 2700.0;  // [kg/m^3]
  double density_fluid = 1.21;    // [kg/m^3]
  double speed_of_sound = 340.0;  // [m/s]
  double loss_factor = 0.0;       // structural loss factor eta, applied as (1+i*eta)*K_s

  // B = E t^3 / (12 (1 - nu^2))
  double bending_stiffness() const {
    return youngs_modulus * thickness * thickness * thickness /
           (12.0 * (1.0 - poisson_ratio * poisson_ratio));
  }

  void validate() const;
};

// Structured rectangular plate mesh with C1 rectangle elements.
// Nodes are row-major over the (nx+1) x (ny+1) grid; each node carries the
// four deflection DOFs (w, w_x, w_y, w_xy) in that order.
struct PlateMesh {
  Index nx = 0, ny = 0;
  double lx = 0, ly = 0;

  static constexpr int kDofsPerNode = 4;
  enum Family { kW = 0, kWx = 1, kWy = 2, kWxy = 3 };

  Index node_count() const { return (nx + 1) * (ny + 1); }
  Index element_count() const { return nx * ny; }
  Index dof_count() const { return kDofsPerNode * node_count(); }
  double dx() const { return lx / static_cast<double>(nx); }
  double dy() const { return ly / static_cast<double>(ny); }

  Index node_index(Index ix, Index iy) const { return iy * (nx + 1) + ix; }
  std::array<double, 2> node_coord(Index node) const {
    const Index ix = node % (nx + 1), iy = node / (nx + 1);
    return {static_cast<double>(ix) * dx(), static_cast<double>(iy) * dy()};
  }
  Index dof(Index node, int family) const { return kDofsPerNode * node + family; }

  // Corner nodes of element e, counterclockwise from the low corner.
  std::array<Index, 4> element_nodes(Index e) const {
    const Index ex = e % nx, ey = e / nx;
    const Index n0 = node_index(ex, ey);
    return {n0, n0 + 1, n0 + nx + 2, n0 + nx + 1};
  }
};

// Structured box mesh of 8-node hexahedra, one pressure DOF per node.
// The z=0 face node grid coincides with the plate node grid.
struct CavityMesh {
  Index nx = 0, ny = 0, nz = 0;
  double lx = 0, ly = 0, lz = 0;

  Index node_count() const { return (nx + 1) * (ny + 1) * (nz + 1); }
  Index element_count() const { return nx * ny * nz; }
  Index dof_count() const { return node_count(); }
  double dx() const { return lx / static_cast<double>(nx); }
  double dy() const { return ly / static_cast<double>(ny); }
  double dz() const { return lz / static_cast<double>(nz); }

  Index node_index(Index ix, Index iy, Index iz) const {
    return (iz * (ny + 1) + iy) * (nx + 1) + ix;
  }
  std::array<double, 3> node_coord(Index node) const {
    const Index per_layer = (nx + 1) * (ny + 1);
    const Index iz = node / per_layer;
    const Index rem = node % per_layer;
    const Index iy = rem / (nx + 1), ix = rem % (nx + 1);
    return {static_cast<double>(ix) * dx(), static_cast<double>(iy) * dy(),
            static_cast<double>(iz) * dz()};
  }

  // Nodes of element e: bottom face counterclockwise, then top face.
  std::array<Index, 8> element_nodes(Index e) const {
    const Index per_layer_e = nx * ny;
    const Index ez = e / per_layer_e;
    const Index rem = e % per_layer_e;
    const Index ey = rem / nx, ex = rem % nx;
    const Index n0 = node_index(ex, ey, ez);
    const Index up = (nx + 1) * (ny + 1);
    return {n0,      n0 + 1,      n0 + nx + 2,      n0 + nx + 1,
            n0 + up, n0 + 1 + up, n0 + nx + 2 + up, n0 + nx + 1 + up};
  }
};

PlateMesh build_plate_mesh(double lx, double ly, Index nx, Index ny);
CavityMesh build_cavity_mesh(double lx, double ly, double lz, Index nx, Index ny,
                             Index nz);

// Free bending wavelength lambda_B = 2*pi * (B / (rho_s t omega^2))^(1/4).
double bending_wavelength(const MaterialProperties& mat, double omega);
double acoustic_wavelength(double speed_of_sound, double frequency_hz);

// Smallest division count such that `nodes_per_wavelength` nodes span one
// wavelength, with a floor of 2 divisions.
Index recommended_divisions(double length, double wavelength,
                            int nodes_per_wavelength = 10);

}  // namespace platecav
