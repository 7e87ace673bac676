// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <utility>
#include <vector>

#include "platecav/mesh.hpp"
#include "platecav/types.hpp"

namespace platecav {

// Coupled second-order system
//   K = [[K_s, -C_sf], [0, K_f]],   M = [[M_s, 0], [rho_f C_sf^T, M_f]]
// with structure DOFs first (0..n_s-1) and fluid DOFs after.
struct CoupledSystem {
  SpMat K;  // n x n, real
  SpMat M;  // n x n, real
  Index n_s = 0;
  Index n_f = 0;
  double loss_factor = 0.0;  // eta; dynamic_stiffness applies (1+i*eta) to K_s
  double rho_f = 0.0;

  Index n() const { return n_s + n_f; }
};

// Frequency-dependent operator A(omega) = K - omega^2 M (complex typed).
struct SparseOperator {
  SpMatC mat;
  Index n_s = 0;
  Index n_f = 0;
};

// Values and derivatives of the 16 element deflection shape functions at a
// local point (xi, eta) in [0,1]^2 of an a x b rectangle. Local ordering:
// corner-major (counterclockwise), families (w, w_x, w_y, w_xy) within each
// corner. Derivatives are with respect to physical coordinates.
struct PlateShape {
  std::array<double, 16> value{}, dx{}, dy{}, dxx{}, dyy{}, dxy{};
};
PlateShape plate_shape_values(double xi, double eta, double a, double b);

// Kirchhoff plate bending with C1 rectangles (w, w_x, w_y, w_xy per node),
// consistent mass, free edges. Returns (K_s, M_s).
std::pair<SpMat, SpMat> assemble_plate(const PlateMesh& mesh,
                                       const MaterialProperties& mat);

// Interior Helmholtz: K_f = int grad N . grad N, M_f = (1/c^2) int N N, so
// that K_f - omega^2 M_f discretizes -(Delta p + (omega/c)^2 p). Returns
// (K_f, M_f).
std::pair<SpMat, SpMat> assemble_cavity(const CavityMesh& mesh,
                                        const MaterialProperties& mat);

// Consistent interface mass: C_sf(i, j) = int_Gamma psi_i N_p,j dGamma over
// the shared z=0 face; rows are plate deflection DOFs, columns fluid DOFs.
SpMat assemble_coupling(const PlateMesh& plate, const CavityMesh& cavity);

// Restriction to an explicit list of interface (plate) elements; an empty
// list yields the zero matrix.
SpMat assemble_coupling_elements(const PlateMesh& plate, const CavityMesh& cavity,
                                 const std::vector<Index>& plate_elements);

CoupledSystem assemble_coupled(const PlateMesh& plate, const CavityMesh& cavity,
                               const MaterialProperties& mat);

SparseOperator dynamic_stiffness(const CoupledSystem& sys, double omega);

// Throws ContractError unless the cavity z=0 node grid coincides with the
// plate node grid.
void check_interface_match(const PlateMesh& plate, const CavityMesh& cavity);

}  // namespace platecav
