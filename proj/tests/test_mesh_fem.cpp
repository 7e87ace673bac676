// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <complex>
#include <set>

#include "platecav/assembly.hpp"
#include "platecav/mesh.hpp"
#include "platecav/solver.hpp"

using namespace platecav;

namespace {

MaterialProperties reference_material() { return MaterialProperties{}; }

double max_asymmetry(const SpMat& m) {
  const SpMat diff = SpMat(m.transpose()) - m;
  double worst = 0;
  for (Index k = 0; k < diff.outerSize(); ++k)
    for (SpMat::InnerIterator it(diff, k); it; ++it)
      worst = std::max(worst, std::abs(it.value()));
  return worst;
}

double max_abs(const SpMat& m) {
  double worst = 0;
  for (Index k = 0; k < m.outerSize(); ++k)
    for (SpMat::InnerIterator it(m, k); it; ++it)
      worst = std::max(worst, std::abs(it.value()));
  return worst;
}

// Lowest coupled eigenfrequencies via shift-inverted Arnoldi on the real
// pencil (K, M); the zero modes are filtered out afterwards.
std::vector<double> coupled_eigenfrequencies(const CoupledSystem& sys,
                                             double sigma_hz, int count,
                                             int krylov_dim) {
  const double sigma = 2.0 * kPi * sigma_hz;
  FomSolver solver(sys, sigma);
  const Index n = sys.n();

  MatrixXcd v(n, krylov_dim + 1);
  MatrixXcd h = MatrixXcd::Zero(krylov_dim + 1, krylov_dim);
  VectorXcd q = VectorXcd::Ones(n).cwiseQuotient(
      VectorXcd::Constant(n, std::sqrt(static_cast<double>(n))));
  // deterministic pseudo-random start to avoid symmetry-orthogonal starts
  for (Index i = 0; i < n; ++i)
    q[i] += 0.3 * std::sin(0.7 * static_cast<double>(i) + 0.2);
  q /= q.norm();
  v.col(0) = q;

  for (int j = 0; j < krylov_dim; ++j) {
    VectorXcd w = solver.solve(sparse_mul_complex(sys.M, v.col(j)));
    for (int pass = 0; pass < 2; ++pass)
      for (int i = 0; i <= j; ++i) {
        const Complex c = v.col(i).dot(w);
        if (pass == 0) h(i, j) += c;
        w -= v.col(i) * c;
      }
    h(j + 1, j) = w.norm();
    if (std::abs(h(j + 1, j)) < 1e-14) break;
    v.col(j + 1) = w / h(j + 1, j);
  }

  const Eigen::ComplexEigenSolver<MatrixXcd> es(h.topLeftCorner(krylov_dim, krylov_dim));
  std::vector<double> freqs;
  for (Index i = 0; i < es.eigenvalues().size(); ++i) {
    const Complex mu = es.eigenvalues()[i];
    if (std::abs(mu) < 1e-12) continue;
    const Complex lambda = sigma * sigma + 1.0 / mu;
    if (std::abs(lambda.imag()) > 1e-4 * std::abs(lambda)) continue;
    if (lambda.real() <= 0) continue;
    const double f = std::sqrt(lambda.real()) / (2.0 * kPi);
    if (f < 1.0) continue;  // zero/rigid cluster
    freqs.push_back(f);
  }
  std::sort(freqs.begin(), freqs.end());
  // collapse near-duplicates from the complex-pair Ritz values
  std::vector<double> unique;
  for (const double f : freqs)
    if (unique.empty() || f - unique.back() > 1e-6 * f) unique.push_back(f);
  if (static_cast<int>(unique.size()) > count) unique.resize(count);
  return unique;
}

}  // namespace

TEST_CASE("plate mesh basics") {
  const PlateMesh m = build_plate_mesh(1.0, 1.0, 2, 2);
  CHECK(m.element_count() == 4);
  CHECK(m.node_count() == 9);
  CHECK(m.dof_count() == 36);
  const auto c = m.node_coord(m.node_index(1, 2));
  CHECK(c[0] == doctest::Approx(0.5));
  CHECK(c[1] == doctest::Approx(1.0));

  CHECK(build_plate_mesh(1.0, 1.0, 10, 10).element_count() == 100);
  CHECK_THROWS_AS(build_plate_mesh(-1.0, 1.0, 4, 4), ConfigError);
  CHECK_THROWS_AS(build_plate_mesh(1.0, 1.0, 1, 4), ConfigError);
}

TEST_CASE("bending wavelength rule at 500 Hz") {
  const MaterialProperties mat = reference_material();
  // Hand evaluation: B = 70e9 * 0.003^3 / (12 * (1 - 0.09)) = 173.0769...
  CHECK(mat.bending_stiffness() == doctest::Approx(173.076923076923).epsilon(1e-12));

  const double omega = 2.0 * kPi * 500.0;
  const double lam_hand =
      2.0 * kPi * std::pow(173.076923076923 / (2700.0 * 0.003 * omega * omega), 0.25);
  CHECK(bending_wavelength(mat, omega) == doctest::Approx(lam_hand).epsilon(1e-12));

  const Index nx = recommended_divisions(1.0, lam_hand, 10);
  CHECK(1.0 / static_cast<double>(nx) <= lam_hand / 10.0);
}

TEST_CASE("cavity mesh basics and wavelength rule") {
  const CavityMesh m = build_cavity_mesh(1.0, 1.0, 1.0, 2, 2, 2);
  CHECK(m.element_count() == 8);
  CHECK(m.node_count() == 27);

  // lambda = 340/500 = 0.68 m -> element size <= 0.068 m
  const double lam = acoustic_wavelength(340.0, 500.0);
  CHECK(lam == doctest::Approx(0.68));
  const Index nz = recommended_divisions(1.0, lam, 10);
  CHECK(1.0 / static_cast<double>(nz) <= 0.068 + 1e-12);

  // k at 500 Hz = 2*pi*500/340 = 9.2400 1/m
  CHECK(2.0 * kPi * 500.0 / 340.0 == doctest::Approx(9.2400).epsilon(1e-5));

  const PlateMesh plate = build_plate_mesh(1.0, 1.0, 4, 4);
  const CavityMesh mismatch = build_cavity_mesh(1.0, 1.0, 1.0, 5, 4, 3);
  CHECK_THROWS_AS(check_interface_match(plate, mismatch), ContractError);
}

TEST_CASE("plate assembly: symmetry, null space, mass") {
  const MaterialProperties mat = reference_material();
  const PlateMesh mesh = build_plate_mesh(0.8, 1.1, 5, 4);
  const auto [ks, ms] = assemble_plate(mesh, mat);

  CHECK(max_asymmetry(ks) <= 1e-12 * max_abs(ks));
  CHECK(max_asymmetry(ms) <= 1e-12 * max_abs(ms));

  // Constant deflection and both tilt fields carry no bending energy.
  VectorXd constant = VectorXd::Zero(mesh.dof_count());
  VectorXd tilt_x = VectorXd::Zero(mesh.dof_count());
  for (Index node = 0; node < mesh.node_count(); ++node) {
    constant[mesh.dof(node, PlateMesh::kW)] = 1.0;
    tilt_x[mesh.dof(node, PlateMesh::kW)] = mesh.node_coord(node)[0];
    tilt_x[mesh.dof(node, PlateMesh::kWx)] = 1.0;
  }
  const double kscale = max_abs(ks);
  CHECK((ks * constant).cwiseAbs().maxCoeff() <= 1e-12 * kscale);
  CHECK((ks * tilt_x).cwiseAbs().maxCoeff() <= 1e-12 * kscale);

  // Total mass: 1^T M_s 1 over the w family equals rho_s * t * area.
  const double total_mass = constant.dot(ms * constant);
  CHECK(total_mass ==
        doctest::Approx(2700.0 * 0.003 * 0.8 * 1.1).epsilon(1e-10));

  // M_s positive definite.
  const Eigen::SelfAdjointEigenSolver<MatrixXd> es{MatrixXd(ms)};
  CHECK(es.eigenvalues().minCoeff() > 0);
}

TEST_CASE("plate eigenfrequencies: Cauchy convergence under nested refinement") {
  const MaterialProperties mat = reference_material();
  std::vector<VectorXd> spectra;
  for (const Index divisions : {4, 8, 16}) {
    const PlateMesh mesh = build_plate_mesh(1.0, 1.0, divisions, divisions);
    const auto [ks, ms] = assemble_plate(mesh, mat);
    Eigen::GeneralizedSelfAdjointEigenSolver<MatrixXd> es{MatrixXd(ks), MatrixXd(ms)};
    VectorXd lam = es.eigenvalues();
    // drop the three rigid modes (1, x, y)
    std::vector<double> elastic;
    for (Index i = 0; i < lam.size(); ++i)
      if (lam[i] > 1.0) elastic.push_back(std::sqrt(lam[i]) / (2.0 * kPi));
    VectorXd first5(5);
    for (int i = 0; i < 5; ++i) first5[i] = elastic[static_cast<std::size_t>(i)];
    spectra.push_back(first5);
  }
  for (int i = 0; i < 5; ++i) {
    const double coarse_gap = std::abs(spectra[0][i] - spectra[1][i]);
    const double fine_gap = std::abs(spectra[1][i] - spectra[2][i]);
    CHECK(fine_gap < coarse_gap);  // discretization error decreases
    CHECK(spectra[0][i] >= spectra[1][i] - 1e-9);  // conforming: from above
    CHECK(spectra[1][i] >= spectra[2][i] - 1e-9);
  }
}

TEST_CASE("cavity assembly: null space and first axial mode") {
  const MaterialProperties mat = reference_material();
  const CavityMesh mesh = build_cavity_mesh(1.0, 1.0, 1.0, 8, 8, 8);
  const auto [kf, mf] = assemble_cavity(mesh, mat);

  CHECK(max_asymmetry(kf) <= 1e-12 * max_abs(kf));
  CHECK(max_asymmetry(mf) <= 1e-12 * max_abs(mf));

  const VectorXd ones = VectorXd::Ones(mesh.dof_count());
  CHECK((kf * ones).cwiseAbs().maxCoeff() <= 1e-12 * max_abs(kf));

  Eigen::GeneralizedSelfAdjointEigenSolver<MatrixXd> es{MatrixXd(kf), MatrixXd(mf)};
  double first = 0;
  for (Index i = 0; i < es.eigenvalues().size(); ++i)
    if (es.eigenvalues()[i] > 1.0) {
      first = std::sqrt(es.eigenvalues()[i]) / (2.0 * kPi);
      break;
    }
  // rigid-wall box: f_100 = c / (2 L) = 170 Hz
  CHECK(std::abs(first - 170.0) / 170.0 < 0.02);
}

TEST_CASE("coupling matrix: partition of unity and block layout") {
  const MaterialProperties mat = reference_material();
  const PlateMesh plate = build_plate_mesh(0.9, 0.7, 4, 3);
  const CavityMesh cavity = build_cavity_mesh(0.9, 0.7, 0.5, 4, 3, 3);
  const SpMat csf = assemble_coupling(plate, cavity);

  // Row sums over w-family rows equal nodal patch areas.
  const MatrixXd dense = MatrixXd(csf);
  const double ax = plate.dx(), ay = plate.dy();
  for (Index iy = 0; iy <= plate.ny; ++iy)
    for (Index ix = 0; ix <= plate.nx; ++ix) {
      const Index node = plate.node_index(ix, iy);
      const double fx = (ix == 0 || ix == plate.nx) ? 0.5 : 1.0;
      const double fy = (iy == 0 || iy == plate.ny) ? 0.5 : 1.0;
      const double patch = fx * fy * ax * ay;
      const double row_sum = dense.row(plate.dof(node, PlateMesh::kW)).sum();
      CHECK(row_sum == doctest::Approx(patch).epsilon(1e-10));
    }

  // Empty interface -> zero matrix.
  const SpMat empty = assemble_coupling_elements(plate, cavity, {});
  CHECK(empty.nonZeros() == 0);

  // Global block structure.
  const CoupledSystem sys = assemble_coupled(plate, cavity, mat);
  const Index n_s = sys.n_s;
  for (Index k = 0; k < sys.K.outerSize(); ++k)
    for (SpMat::InnerIterator it(sys.K, k); it; ++it)
      CHECK_FALSE((it.row() >= n_s && it.col() < n_s));  // zero block of K
  for (Index k = 0; k < sys.M.outerSize(); ++k)
    for (SpMat::InnerIterator it(sys.M, k); it; ++it)
      CHECK_FALSE((it.row() < n_s && it.col() >= n_s));  // zero block of M

  // Coupling reciprocity: M's coupling block is rho_f times the transpose of
  // K's (with K's sign flipped).
  const MatrixXd kd = MatrixXd(sys.K);
  const MatrixXd md = MatrixXd(sys.M);
  const MatrixXd k_coup = kd.topRightCorner(n_s, sys.n_f);
  const MatrixXd m_coup = md.bottomLeftCorner(sys.n_f, n_s);
  CHECK((m_coup - mat.density_fluid * (-k_coup).transpose()).cwiseAbs().maxCoeff() <=
        1e-12 * k_coup.cwiseAbs().maxCoeff());
}

TEST_CASE("dynamic stiffness: omega = 0, pattern union, asymmetry") {
  const MaterialProperties mat = reference_material();
  const PlateMesh plate = build_plate_mesh(1.0, 1.0, 3, 3);
  const CavityMesh cavity = build_cavity_mesh(1.0, 1.0, 1.0, 3, 3, 3);
  const CoupledSystem sys = assemble_coupled(plate, cavity, mat);

  const SparseOperator a0 = dynamic_stiffness(sys, 0.0);
  const MatrixXcd a0d = MatrixXcd(a0.mat);
  CHECK((a0d - MatrixXd(sys.K).cast<Complex>()).cwiseAbs().maxCoeff() <=
        1e-14 * max_abs(sys.K));

  // First expansion point: omega = 2*pi*114 = 716.283 rad/s.
  const double omega114 = 2.0 * kPi * 114.0;
  CHECK(omega114 == doctest::Approx(716.283).epsilon(1e-5));
  const SparseOperator a = dynamic_stiffness(sys, omega114);
  const MatrixXcd ad = MatrixXcd(a.mat);
  const MatrixXcd expect =
      MatrixXd(sys.K).cast<Complex>() - omega114 * omega114 * MatrixXd(sys.M).cast<Complex>();
  CHECK((ad - expect).cwiseAbs().maxCoeff() <= 1e-12 * expect.cwiseAbs().maxCoeff());

  // A is not symmetric, but its pattern is pattern(K) union pattern(M).
  CHECK((ad - ad.transpose()).cwiseAbs().maxCoeff() > 1e-6 * ad.cwiseAbs().maxCoeff());
  std::set<std::pair<Index, Index>> pattern_km, pattern_a;
  for (Index k = 0; k < sys.K.outerSize(); ++k)
    for (SpMat::InnerIterator it(sys.K, k); it; ++it)
      pattern_km.emplace(it.row(), it.col());
  for (Index k = 0; k < sys.M.outerSize(); ++k)
    for (SpMat::InnerIterator it(sys.M, k); it; ++it)
      pattern_km.emplace(it.row(), it.col());
  for (Index k = 0; k < a.mat.outerSize(); ++k)
    for (SpMatC::InnerIterator it(a.mat, k); it; ++it)
      pattern_a.emplace(it.row(), it.col());
  CHECK((pattern_a == pattern_km));

  CHECK_THROWS_AS(dynamic_stiffness(sys, -1.0), ContractError);
}

TEST_CASE("loss factor scales the structural block only") {
  MaterialProperties mat = reference_material();
  mat.loss_factor = 0.02;
  const PlateMesh plate = build_plate_mesh(1.0, 1.0, 3, 3);
  const CavityMesh cavity = build_cavity_mesh(1.0, 1.0, 1.0, 3, 3, 3);
  const CoupledSystem sys = assemble_coupled(plate, cavity, mat);

  const MatrixXcd a0 = MatrixXcd(dynamic_stiffness(sys, 0.0).mat);
  const MatrixXd k = MatrixXd(sys.K);
  const Index n_s = sys.n_s;
  CHECK((a0.topLeftCorner(n_s, n_s).imag() - 0.02 * k.topLeftCorner(n_s, n_s))
            .cwiseAbs()
            .maxCoeff() <= 1e-12 * max_abs(sys.K));
  CHECK(a0.bottomRightCorner(sys.n_f, sys.n_f).imag().cwiseAbs().maxCoeff() == 0.0);
  CHECK(a0.topRightCorner(n_s, sys.n_f).imag().cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("coupled eigenfrequencies stable under mesh doubling") {
  const MaterialProperties mat = reference_material();
  const PlateMesh p1 = build_plate_mesh(1.0, 1.0, 4, 4);
  const CavityMesh c1 = build_cavity_mesh(1.0, 1.0, 1.0, 4, 4, 4);
  const PlateMesh p2 = build_plate_mesh(1.0, 1.0, 8, 8);
  const CavityMesh c2 = build_cavity_mesh(1.0, 1.0, 1.0, 8, 8, 8);

  const auto f1 = coupled_eigenfrequencies(assemble_coupled(p1, c1, mat), 3.0, 5, 60);
  const auto f2 = coupled_eigenfrequencies(assemble_coupled(p2, c2, mat), 3.0, 5, 60);
  REQUIRE(f1.size() == 5);
  REQUIRE(f2.size() == 5);
  for (int i = 0; i < 5; ++i)
    CHECK(std::abs(f1[i] - f2[i]) / f2[i] < 0.02);
}
