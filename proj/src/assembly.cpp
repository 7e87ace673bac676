// SPDX-License-Identifier: Apache-2.0
#include "platecav/assembly.hpp"

#include <array>
#include <cmath>

namespace platecav {

namespace {

// Gauss-Legendre rules mapped to [0, 1].
struct GaussRule {
  std::vector<double> pts;
  std::vector<double> wts;
};

GaussRule gauss_rule01(int npts) {
  GaussRule r;
  switch (npts) {
    case 2:
      r.pts = {-0.57735026918962576, 0.57735026918962576};
      r.wts = {1.0, 1.0};
      break;
    case 3:
      r.pts = {-0.77459666924148338, 0.0, 0.77459666924148338};
      r.wts = {0.55555555555555556, 0.88888888888888889, 0.55555555555555556};
      break;
    case 4:
      r.pts = {-0.86113631159405258, -0.33998104358485626, 0.33998104358485626,
               0.86113631159405258};
      r.wts = {0.34785484513745386, 0.65214515486254614, 0.65214515486254614,
               0.34785484513745386};
      break;
    default:
      throw ContractError("unsupported Gauss rule");
  }
  for (auto& p : r.pts) p = 0.5 * (p + 1.0);
  for (auto& w : r.wts) w *= 0.5;
  return r;
}

// Cubic Hermite basis on [0, 1]; index 0/1 = value/slope at t=0, 2/3 at t=1.
double hermite(int k, double t) {
  const double t2 = t * t, t3 = t2 * t;
  switch (k) {
    case 0: return 1.0 - 3.0 * t2 + 2.0 * t3;
    case 1: return t - 2.0 * t2 + t3;
    case 2: return 3.0 * t2 - 2.0 * t3;
    case 3: return -t2 + t3;
  }
  return 0.0;
}
double hermite_d1(int k, double t) {
  const double t2 = t * t;
  switch (k) {
    case 0: return -6.0 * t + 6.0 * t2;
    case 1: return 1.0 - 4.0 * t + 3.0 * t2;
    case 2: return 6.0 * t - 6.0 * t2;
    case 3: return -2.0 * t + 3.0 * t2;
  }
  return 0.0;
}
double hermite_d2(int k, double t) {
  switch (k) {
    case 0: return -6.0 + 12.0 * t;
    case 1: return -4.0 + 6.0 * t;
    case 2: return 6.0 - 12.0 * t;
    case 3: return -2.0 + 6.0 * t;
  }
  return 0.0;
}

// Corner (xi-end, eta-end) for local corners 0..3, counterclockwise.
constexpr int kCornerXi[4] = {0, 1, 1, 0};
constexpr int kCornerEta[4] = {0, 0, 1, 1};

}  // namespace

PlateShape plate_shape_values(double xi, double eta, double a, double b) {
  PlateShape s;
  for (int c = 0; c < 4; ++c) {
    const int i = kCornerXi[c], j = kCornerEta[c];
    // Hermite index: value function 2*i, slope function 2*i+1 at the matching end.
    const int vx = 2 * i, sx = 2 * i + 1, vy = 2 * j, sy = 2 * j + 1;
    const double Hvx = hermite(vx, xi), Hsx = hermite(sx, xi);
    const double Hvy = hermite(vy, eta), Hsy = hermite(sy, eta);
    const double dHvx = hermite_d1(vx, xi), dHsx = hermite_d1(sx, xi);
    const double dHvy = hermite_d1(vy, eta), dHsy = hermite_d1(sy, eta);
    const double ddHvx = hermite_d2(vx, xi), ddHsx = hermite_d2(sx, xi);
    const double ddHvy = hermite_d2(vy, eta), ddHsy = hermite_d2(sy, eta);

    const std::array<double, 4> fx = {Hvx, a * Hsx, Hvx, a * Hsx};
    const std::array<double, 4> fy = {Hvy, Hvy, b * Hsy, b * Hsy};
    const std::array<double, 4> dfx = {dHvx, a * dHsx, dHvx, a * dHsx};
    const std::array<double, 4> dfy = {dHvy, dHvy, b * dHsy, b * dHsy};
    const std::array<double, 4> ddfx = {ddHvx, a * ddHsx, ddHvx, a * ddHsx};
    const std::array<double, 4> ddfy = {ddHvy, ddHvy, b * ddHsy, b * ddHsy};

    for (int f = 0; f < 4; ++f) {
      const int l = 4 * c + f;
      s.value[l] = fx[f] * fy[f];
      s.dx[l] = dfx[f] * fy[f] / a;
      s.dy[l] = fx[f] * dfy[f] / b;
      s.dxx[l] = ddfx[f] * fy[f] / (a * a);
      s.dyy[l] = fx[f] * ddfy[f] / (b * b);
      s.dxy[l] = dfx[f] * dfy[f] / (a * b);
    }
  }
  return s;
}

std::pair<SpMat, SpMat> assemble_plate(const PlateMesh& mesh,
                                       const MaterialProperties& mat) {
  mat.validate();
  const double a = mesh.dx(), b = mesh.dy();
  const double B = mat.bending_stiffness();
  const double nu = mat.poisson_ratio;
  const double mu = mat.density_plate * mat.thickness;

  // All elements are congruent: one 16x16 pair, scattered everywhere.
  Eigen::Matrix<double, 16, 16> Ke, Me;
  Ke.setZero();
  Me.setZero();
  const GaussRule g = gauss_rule01(4);
  for (std::size_t gx = 0; gx < g.pts.size(); ++gx)
    for (std::size_t gy = 0; gy < g.pts.size(); ++gy) {
      const double w = g.wts[gx] * g.wts[gy] * a * b;
      const PlateShape s = plate_shape_values(g.pts[gx], g.pts[gy], a, b);
      for (int i = 0; i < 16; ++i)
        for (int j = 0; j < 16; ++j) {
          Ke(i, j) += w * B *
                      (s.dxx[i] * s.dxx[j] + s.dyy[i] * s.dyy[j] +
                       nu * (s.dxx[i] * s.dyy[j] + s.dyy[i] * s.dxx[j]) +
                       2.0 * (1.0 - nu) * s.dxy[i] * s.dxy[j]);
          Me(i, j) += w * mu * s.value[i] * s.value[j];
        }
    }

  std::vector<Triplet> tk, tm;
  tk.reserve(static_cast<std::size_t>(mesh.element_count()) * 256);
  tm.reserve(static_cast<std::size_t>(mesh.element_count()) * 256);
  for (Index e = 0; e < mesh.element_count(); ++e) {
    const auto nodes = mesh.element_nodes(e);
    std::array<Index, 16> gdof{};
    for (int c = 0; c < 4; ++c)
      for (int f = 0; f < 4; ++f) gdof[4 * c + f] = mesh.dof(nodes[c], f);
    for (int i = 0; i < 16; ++i)
      for (int j = 0; j < 16; ++j) {
        tk.emplace_back(gdof[i], gdof[j], Ke(i, j));
        tm.emplace_back(gdof[i], gdof[j], Me(i, j));
      }
  }
  SpMat K(mesh.dof_count(), mesh.dof_count()), M(mesh.dof_count(), mesh.dof_count());
  K.setFromTriplets(tk.begin(), tk.end());
  M.setFromTriplets(tm.begin(), tm.end());
  return {std::move(K), std::move(M)};
}

std::pair<SpMat, SpMat> assemble_cavity(const CavityMesh& mesh,
                                        const MaterialProperties& mat) {
  mat.validate();
  const double a = mesh.dx(), b = mesh.dy(), c = mesh.dz();
  const double inv_c2 = 1.0 / (mat.speed_of_sound * mat.speed_of_sound);

  Eigen::Matrix<double, 8, 8> Ke, Me;
  Ke.setZero();
  Me.setZero();
  const GaussRule g = gauss_rule01(2);
  // Trilinear shape functions; node order matches CavityMesh::element_nodes.
  constexpr int ix[8] = {0, 1, 1, 0, 0, 1, 1, 0};
  constexpr int iy[8] = {0, 0, 1, 1, 0, 0, 1, 1};
  constexpr int iz[8] = {0, 0, 0, 0, 1, 1, 1, 1};
  auto lin = [](int end, double t) { return end == 0 ? 1.0 - t : t; };
  auto dlin = [](int end) { return end == 0 ? -1.0 : 1.0; };

  for (std::size_t gx = 0; gx < g.pts.size(); ++gx)
    for (std::size_t gy = 0; gy < g.pts.size(); ++gy)
      for (std::size_t gz = 0; gz < g.pts.size(); ++gz) {
        const double w = g.wts[gx] * g.wts[gy] * g.wts[gz] * a * b * c;
        std::array<double, 8> N{}, Nx{}, Ny{}, Nz{};
        for (int k = 0; k < 8; ++k) {
          const double lx = lin(ix[k], g.pts[gx]);
          const double ly = lin(iy[k], g.pts[gy]);
          const double lz = lin(iz[k], g.pts[gz]);
          N[k] = lx * ly * lz;
          Nx[k] = dlin(ix[k]) * ly * lz / a;
          Ny[k] = lx * dlin(iy[k]) * lz / b;
          Nz[k] = lx * ly * dlin(iz[k]) / c;
        }
        for (int i = 0; i < 8; ++i)
          for (int j = 0; j < 8; ++j) {
            Ke(i, j) += w * (Nx[i] * Nx[j] + Ny[i] * Ny[j] + Nz[i] * Nz[j]);
            Me(i, j) += w * inv_c2 * N[i] * N[j];
          }
      }

  std::vector<Triplet> tk, tm;
  tk.reserve(static_cast<std::size_t>(mesh.element_count()) * 64);
  tm.reserve(static_cast<std::size_t>(mesh.element_count()) * 64);
  for (Index e = 0; e < mesh.element_count(); ++e) {
    const auto nodes = mesh.element_nodes(e);
    for (int i = 0; i < 8; ++i)
      for (int j = 0; j < 8; ++j) {
        tk.emplace_back(nodes[i], nodes[j], Ke(i, j));
        tm.emplace_back(nodes[i], nodes[j], Me(i, j));
      }
  }
  SpMat K(mesh.dof_count(), mesh.dof_count()), M(mesh.dof_count(), mesh.dof_count());
  K.setFromTriplets(tk.begin(), tk.end());
  M.setFromTriplets(tm.begin(), tm.end());
  return {std::move(K), std::move(M)};
}

void check_interface_match(const PlateMesh& plate, const CavityMesh& cavity) {
  const bool grids_match = plate.nx == cavity.nx && plate.ny == cavity.ny;
  const bool dims_match = std::abs(plate.lx - cavity.lx) <= 1e-12 * plate.lx &&
                          std::abs(plate.ly - cavity.ly) <= 1e-12 * plate.ly;
  if (!grids_match || !dims_match)
    throw ContractError("cavity z=0 face grid does not coincide with the plate grid");
}

SpMat assemble_coupling_elements(const PlateMesh& plate, const CavityMesh& cavity,
                                 const std::vector<Index>& plate_elements) {
  check_interface_match(plate, cavity);
  const double a = plate.dx(), b = plate.dy();

  // 16x4 element block: plate deflection shapes against the bilinear trace
  // of the bottom-face pressure shapes (same corner order on both sides).
  Eigen::Matrix<double, 16, 4> Ce;
  Ce.setZero();
  const GaussRule g = gauss_rule01(3);
  auto lin = [](int end, double t) { return end == 0 ? 1.0 - t : t; };
  for (std::size_t gx = 0; gx < g.pts.size(); ++gx)
    for (std::size_t gy = 0; gy < g.pts.size(); ++gy) {
      const double w = g.wts[gx] * g.wts[gy] * a * b;
      const PlateShape s = plate_shape_values(g.pts[gx], g.pts[gy], a, b);
      for (int j = 0; j < 4; ++j) {
        const double q =
            lin(kCornerXi[j], g.pts[gx]) * lin(kCornerEta[j], g.pts[gy]);
        for (int i = 0; i < 16; ++i) Ce(i, j) += w * s.value[i] * q;
      }
    }

  std::vector<Triplet> tc;
  tc.reserve(plate_elements.size() * 64);
  for (const Index e : plate_elements) {
    if (e < 0 || e >= plate.element_count())
      throw ContractError("coupling element index out of range");
    const auto pnodes = plate.element_nodes(e);
    // Bottom-face cavity nodes of the hex above plate element e share the
    // (ix, iy) grid indices, so the plate node ids are also the fluid ids.
    for (int c = 0; c < 4; ++c)
      for (int f = 0; f < 4; ++f)
        for (int j = 0; j < 4; ++j)
          tc.emplace_back(plate.dof(pnodes[c], f), pnodes[j], Ce(4 * c + f, j));
  }
  SpMat C(plate.dof_count(), cavity.dof_count());
  C.setFromTriplets(tc.begin(), tc.end());
  return C;
}

SpMat assemble_coupling(const PlateMesh& plate, const CavityMesh& cavity) {
  std::vector<Index> all(static_cast<std::size_t>(plate.element_count()));
  for (Index e = 0; e < plate.element_count(); ++e) all[static_cast<std::size_t>(e)] = e;
  return assemble_coupling_elements(plate, cavity, all);
}

CoupledSystem assemble_coupled(const PlateMesh& plate, const CavityMesh& cavity,
                               const MaterialProperties& mat) {
  check_interface_match(plate, cavity);
  const auto [Ks, Ms] = assemble_plate(plate, mat);
  const auto [Kf, Mf] = assemble_cavity(cavity, mat);
  const SpMat Csf = assemble_coupling(plate, cavity);

  const Index n_s = plate.dof_count();
  const Index n_f = cavity.dof_count();
  const Index n = n_s + n_f;

  std::vector<Triplet> tk, tm;
  tk.reserve(static_cast<std::size_t>(Ks.nonZeros() + Kf.nonZeros() + Csf.nonZeros()));
  tm.reserve(static_cast<std::size_t>(Ms.nonZeros() + Mf.nonZeros() + Csf.nonZeros()));

  for (Index k = 0; k < Ks.outerSize(); ++k)
    for (SpMat::InnerIterator it(Ks, k); it; ++it)
      tk.emplace_back(it.row(), it.col(), it.value());
  for (Index k = 0; k < Kf.outerSize(); ++k)
    for (SpMat::InnerIterator it(Kf, k); it; ++it)
      tk.emplace_back(n_s + it.row(), n_s + it.col(), it.value());
  for (Index k = 0; k < Csf.outerSize(); ++k)
    for (SpMat::InnerIterator it(Csf, k); it; ++it)
      tk.emplace_back(it.row(), n_s + it.col(), -it.value());

  for (Index k = 0; k < Ms.outerSize(); ++k)
    for (SpMat::InnerIterator it(Ms, k); it; ++it)
      tm.emplace_back(it.row(), it.col(), it.value());
  for (Index k = 0; k < Mf.outerSize(); ++k)
    for (SpMat::InnerIterator it(Mf, k); it; ++it)
      tm.emplace_back(n_s + it.row(), n_s + it.col(), it.value());
  for (Index k = 0; k < Csf.outerSize(); ++k)
    for (SpMat::InnerIterator it(Csf, k); it; ++it)
      tm.emplace_back(n_s + it.col(), it.row(), mat.density_fluid * it.value());

  CoupledSystem sys;
  sys.K.resize(n, n);
  sys.M.resize(n, n);
  sys.K.setFromTriplets(tk.begin(), tk.end());
  sys.M.setFromTriplets(tm.begin(), tm.end());
  sys.n_s = n_s;
  sys.n_f = n_f;
  sys.loss_factor = mat.loss_factor;
  sys.rho_f = mat.density_fluid;
  return sys;
}

SparseOperator dynamic_stiffness(const CoupledSystem& sys, double omega) {
  if (omega < 0) throw ContractError("dynamic stiffness needs omega >= 0");
  const double w2 = omega * omega;
  const Complex ks_scale(1.0, sys.loss_factor);

  std::vector<TripletC> t;
  t.reserve(static_cast<std::size_t>(sys.K.nonZeros() + sys.M.nonZeros()));
  for (Index k = 0; k < sys.K.outerSize(); ++k)
    for (SpMat::InnerIterator it(sys.K, k); it; ++it) {
      const bool structural = it.row() < sys.n_s && it.col() < sys.n_s;
      t.emplace_back(it.row(), it.col(),
                     structural ? ks_scale * it.value() : Complex(it.value(), 0.0));
    }
  for (Index k = 0; k < sys.M.outerSize(); ++k)
    for (SpMat::InnerIterator it(sys.M, k); it; ++it)
      t.emplace_back(it.row(), it.col(), Complex(-w2 * it.value(), 0.0));

  SparseOperator op;
  op.mat.resize(sys.n(), sys.n());
  op.mat.setFromTriplets(t.begin(), t.end());
  op.n_s = sys.n_s;
  op.n_f = sys.n_f;
  return op;
}

}  // namespace platecav
