// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>

#include "platecav/rng.hpp"
#include "platecav/tbl.hpp"

using namespace platecav;

namespace {

SpectrumModel default_model() { return SpectrumModel{}; }

}  // namespace

TEST_CASE("spectrum: spanwise symmetry, nonnegativity, configuration errors") {
  const SpectrumModel m = default_model();
  const double omega = 2.0 * kPi * 200.0;
  RandomStream rs(7);
  for (int i = 0; i < 10000; ++i) {
    const double kx = 60.0 * (rs.next_uniform01() - 0.5);
    const double ky = 60.0 * (rs.next_uniform01() - 0.5);
    const double w = 2.0 * kPi * (16.0 + 484.0 * rs.next_uniform01());
    const double phi = wall_pressure_spectrum(m, kx, ky, w);
    CHECK(phi >= 0.0);
    CHECK(wall_pressure_spectrum(m, kx, ky, omega) ==
          doctest::Approx(wall_pressure_spectrum(m, kx, -ky, omega)).epsilon(1e-14));
  }

  SpectrumModel bad = m;
  bad.u_c = -1.0;
  CHECK_THROWS_AS(wall_pressure_spectrum(bad, 1.0, 1.0, omega), ConfigError);
}

TEST_CASE("spectrum: convective ridge peaks at omega / U_c") {
  const SpectrumModel m = default_model();
  for (const double f : {100.0, 250.0, 400.0}) {
    const double omega = 2.0 * kPi * f;
    const double kc = omega / m.u_c;
    // dense scan over kx at fixed ky
    const int n = 4001;
    const double kmax = 3.0 * kc;
    double best_k = 0, best_v = -1;
    for (int i = 0; i < n; ++i) {
      const double kx = -kmax + 2.0 * kmax * i / (n - 1);
      const double v = wall_pressure_spectrum(m, kx, 0.3, omega);
      if (v > best_v) {
        best_v = v;
        best_k = kx;
      }
    }
    const double grid_step = 2.0 * kmax / (n - 1);
    CHECK(std::abs(best_k - kc) <= grid_step);
  }
}

TEST_CASE("point spectrum peaks near 100 Hz with the default parameters") {
  const SpectrumModel m = default_model();
  double best_f = 0, best_v = -1;
  for (double f = 10.0; f <= 1000.0; f += 1.0) {
    const double v = point_spectrum(m, 2.0 * kPi * f);
    if (v > best_v) {
      best_v = v;
      best_f = f;
    }
  }
  CHECK(best_f > 70.0);
  CHECK(best_f < 140.0);
}

TEST_CASE("tabulated spectrum loader") {
  const std::string path = "/tmp/platecav_test_spectrum.csv";
  {
    std::ofstream out(path);
    out << "f_hz,kx,ky,phi_pp\n";
    out << "100,1.0,0.0,2.5\n";
    out << "100,2.0,0.0,1.5\n";
    out << "200,1.0,0.0,4.0\n";
  }
  const SpectrumModel m = load_tabulated_spectrum(path);
  CHECK(wall_pressure_spectrum(m, 1.0, 0.0, 2.0 * kPi * 100.0) == doctest::Approx(2.5));
  CHECK(wall_pressure_spectrum(m, 2.0, 0.0, 2.0 * kPi * 100.0) == doctest::Approx(1.5));
  CHECK(wall_pressure_spectrum(m, 1.0, 0.0, 2.0 * kPi * 200.0) == doctest::Approx(4.0));
  std::remove(path.c_str());
}

TEST_CASE("draw_phases: determinism, range, KS uniformity, mean") {
  const MatrixXd a = draw_phases(42, 16, 16);
  const MatrixXd b = draw_phases(42, 16, 16);
  CHECK((a - b).cwiseAbs().maxCoeff() == 0.0);
  const MatrixXd c = draw_phases(43, 16, 16);
  CHECK((a - c).cwiseAbs().maxCoeff() > 0.0);

  const int n = 100000;
  RandomStream rs(2024);
  std::vector<double> u(n);
  for (int i = 0; i < n; ++i) u[i] = rs.next_uniform01();
  std::sort(u.begin(), u.end());
  double ks = 0;
  for (int i = 0; i < n; ++i) {
    const double ecdf_hi = static_cast<double>(i + 1) / n;
    const double ecdf_lo = static_cast<double>(i) / n;
    ks = std::max(ks, std::max(std::abs(ecdf_hi - u[i]), std::abs(u[i] - ecdf_lo)));
  }
  // 1% critical value of the one-sample KS statistic: 1.63 / sqrt(n)
  CHECK(ks < 1.63 / std::sqrt(static_cast<double>(n)));

  const MatrixXd big = draw_phases(7, 400, 250);
  const double mean = big.mean();
  const double sigma = 2.0 * kPi / std::sqrt(12.0) / std::sqrt(1e5);
  CHECK(std::abs(mean - kPi) < 3.0 * sigma);
  CHECK(big.minCoeff() >= 0.0);
  CHECK(big.maxCoeff() < 2.0 * kPi);
}

TEST_CASE("synthesis: zero amplitudes, single component modulus") {
  const WavenumberGrid grid = WavenumberGrid::symmetric(30.0, 30.0, 8, 8);
  MatrixXd pts(5, 2);
  pts << 0.1, 0.2, 0.4, 0.9, 0.5, 0.5, 0.0, 0.0, 1.0, 1.0;
  const PlaneWaveSynthesizer synth(grid, pts);

  const MatrixXd zero_amp = MatrixXd::Zero(8, 8);
  const MatrixXd phases = draw_phases(3, 8, 8);
  CHECK(synth.evaluate(zero_amp, phases).cwiseAbs().maxCoeff() == 0.0);

  // single component: |p| = sqrt(Phi dkx dky) / (2 pi) everywhere
  const WavenumberGrid g1 = WavenumberGrid::symmetric(5.0, 5.0, 1, 1);
  const SpectrumModel m = default_model();
  const double omega = 2.0 * kPi * 150.0;
  const MatrixXd phases1 = MatrixXd::Zero(1, 1);
  const VectorXcd p = synthesize_pressure_field(m, g1, omega, pts, phases1);
  const double phi = wall_pressure_spectrum(m, g1.kx[0], g1.ky[0], omega);
  const double expected = std::sqrt(phi * g1.dkx * g1.dky) / (2.0 * kPi);
  for (Index i = 0; i < p.size(); ++i)
    CHECK(std::abs(p[i]) == doctest::Approx(expected).epsilon(1e-12));

  MatrixXd bad_phases(2, 1);
  CHECK_THROWS_AS(synth.evaluate(zero_amp, bad_phases), ContractError);
}

TEST_CASE("synthesis: one-term ensemble mean decays like 1/sqrt(I)") {
  // Monte-Carlo on the single-component case: each term carries a zero-mean
  // random phase factor.
  const int draws = 10000;
  RandomStream rs(99);
  Complex acc(0, 0);
  double var_acc = 0;
  const double amp = 0.7;
  for (int i = 0; i < draws; ++i) {
    const double phi = 2.0 * kPi * rs.next_uniform01();
    const Complex z = std::polar(amp, phi);
    acc += z;
    var_acc += std::norm(z);
  }
  const double mean_mag = std::abs(acc) / draws;
  const double std_one = std::sqrt(var_acc / draws);
  CHECK(mean_mag <= 3.0 * std_one / std::sqrt(static_cast<double>(draws)));
}

TEST_CASE("global phase offset leaves every |p| unchanged") {
  const WavenumberGrid grid = WavenumberGrid::symmetric(20.0, 20.0, 6, 6);
  MatrixXd pts(7, 2);
  for (Index i = 0; i < 7; ++i) {
    pts(i, 0) = 0.13 * static_cast<double>(i);
    pts(i, 1) = 0.07 * static_cast<double>(i) + 0.05;
  }
  const SpectrumModel m = default_model();
  const double omega = 2.0 * kPi * 220.0;
  const MatrixXd phases = draw_phases(11, 6, 6);
  const MatrixXd shifted = phases.array() + 1.234;
  const VectorXcd p0 = synthesize_pressure_field(m, grid, omega, pts, phases);
  const VectorXcd p1 = synthesize_pressure_field(m, grid, omega, pts, shifted);
  for (Index i = 0; i < p0.size(); ++i)
    CHECK(std::abs(p0[i]) == doctest::Approx(std::abs(p1[i])).epsilon(1e-10));
}

TEST_CASE("nearest-neighbor transfer") {
  const PlateMesh plate = build_plate_mesh(1.0, 1.0, 4, 4);

  // coincident grids -> identity
  MatrixXd coincident(plate.node_count(), 2);
  for (Index node = 0; node < plate.node_count(); ++node) {
    const auto xy = plate.node_coord(node);
    coincident(node, 0) = xy[0];
    coincident(node, 1) = xy[1];
  }
  VectorXcd vals(plate.node_count());
  for (Index i = 0; i < vals.size(); ++i)
    vals[i] = Complex(static_cast<double>(i), -static_cast<double>(i));
  const VectorXcd nodal = transfer_to_mesh(coincident, vals, plate);
  CHECK((nodal - vals).cwiseAbs().maxCoeff() == 0.0);

  // single source -> constant field
  MatrixXd one(1, 2);
  one << 0.3, 0.8;
  VectorXcd single(1);
  single << Complex(2.5, -1.0);
  const VectorXcd constant = transfer_to_mesh(one, single, plate);
  for (Index i = 0; i < constant.size(); ++i) CHECK(constant[i] == single[0]);

  // randomized check against an exhaustive scan written independently
  RandomStream rs(5);
  MatrixXd cloud(100, 2);
  for (Index i = 0; i < 100; ++i) {
    cloud(i, 0) = rs.next_uniform01();
    cloud(i, 1) = rs.next_uniform01();
  }
  const auto map = nearest_source_map(cloud, plate);
  for (Index node = 0; node < plate.node_count(); ++node) {
    const auto xy = plate.node_coord(node);
    Index best = -1;
    double best_d = 1e300;
    for (Index s = 0; s < cloud.rows(); ++s) {
      const double d = std::hypot(cloud(s, 0) - xy[0], cloud(s, 1) - xy[1]);
      if (d < best_d - 1e-15 || (std::abs(d - best_d) <= 1e-15 && s < best)) {
        best_d = d;
        best = s;
      }
    }
    CHECK(map[static_cast<std::size_t>(node)] == best);
  }

  MatrixXd empty(0, 2);
  CHECK_THROWS_AS(transfer_to_mesh(empty, VectorXcd(), plate), ConfigError);
}

TEST_CASE("consistent load vector") {
  const PlateMesh plate = build_plate_mesh(0.8, 0.5, 6, 5);
  const double area = 0.8 * 0.5;

  // unit pressure: w-family entries sum to the plate area
  const VectorXcd ones = VectorXcd::Ones(plate.node_count());
  const VectorXcd f1 = assemble_force_vector(ones, plate);
  Complex w_sum = 0;
  for (Index node = 0; node < plate.node_count(); ++node)
    w_sum += f1[plate.dof(node, PlateMesh::kW)];
  CHECK(w_sum.real() == doctest::Approx(area).epsilon(1e-12));
  CHECK(std::abs(w_sum.imag()) < 1e-15);

  // zero pressure -> zero vector
  CHECK(assemble_force_vector(VectorXcd::Zero(plate.node_count()), plate)
            .cwiseAbs()
            .maxCoeff() == 0.0);

  // linear pressure p = x: resultant = integral of x = area * lx / 2,
  // exactly (the bilinear interpolation reproduces x and the quadrature is
  // exact for these polynomials)
  VectorXcd px(plate.node_count());
  for (Index node = 0; node < plate.node_count(); ++node)
    px[node] = plate.node_coord(node)[0];
  const VectorXcd fx = assemble_force_vector(px, plate);
  Complex resultant = 0;
  for (Index node = 0; node < plate.node_count(); ++node)
    resultant += fx[plate.dof(node, PlateMesh::kW)];
  CHECK(std::abs(resultant.real() - area * 0.8 / 2.0) < 1e-10);

  // linearity to machine precision
  RandomStream rs(17);
  VectorXcd pa(plate.node_count()), pb(plate.node_count());
  for (Index i = 0; i < pa.size(); ++i) {
    pa[i] = Complex(rs.next_uniform01() - 0.5, rs.next_uniform01() - 0.5);
    pb[i] = Complex(rs.next_uniform01() - 0.5, rs.next_uniform01() - 0.5);
  }
  const Complex ca(1.7, -0.3), cb(-0.4, 2.2);
  const VectorXcd lhs = assemble_force_vector(ca * pa + cb * pb, plate);
  const VectorXcd rhs =
      ca * assemble_force_vector(pa, plate) + cb * assemble_force_vector(pb, plate);
  CHECK((lhs - rhs).cwiseAbs().maxCoeff() <=
        1e-12 * rhs.cwiseAbs().maxCoeff());
}

TEST_CASE("ensemble generation: determinism, zero fluid rows, rank bound") {
  const PlateMesh plate = build_plate_mesh(1.0, 1.0, 4, 4);
  const SpectrumModel m = default_model();
  const WavenumberGrid grid = WavenumberGrid::symmetric(30.0, 30.0, 8, 8);
  const MatrixXd src = source_grid_points(1.0, 1.0, 9, 9);
  const Index n_total = plate.dof_count() + 125;

  const LoadEnsemble e1 =
      generate_ensemble_at(m, grid, plate, src, 120.0, 52, n_total, 4, 99);
  const LoadEnsemble e2 =
      generate_ensemble_at(m, grid, plate, src, 120.0, 52, n_total, 4, 99);
  CHECK((e1.samples - e2.samples).cwiseAbs().maxCoeff() == 0.0);

  const LoadEnsemble e3 =
      generate_ensemble_at(m, grid, plate, src, 120.0, 53, n_total, 4, 99);
  CHECK((e1.samples - e3.samples).cwiseAbs().maxCoeff() > 0.0);

  const VectorXcd full = e1.full_sample(1);
  CHECK(full.tail(125).cwiseAbs().maxCoeff() == 0.0);
  CHECK(full.size() == n_total);

  CHECK_THROWS_AS(
      generate_ensemble_at(m, grid, plate, src, 120.0, 0, n_total, 1, 99),
      ContractError);
}

TEST_CASE("ensemble file round trip is exact") {
  const PlateMesh plate = build_plate_mesh(1.0, 1.0, 3, 3);
  const SpectrumModel m = default_model();
  const WavenumberGrid grid = WavenumberGrid::symmetric(30.0, 30.0, 6, 6);
  const MatrixXd src = source_grid_points(1.0, 1.0, 7, 7);
  const LoadEnsemble e = generate_ensemble_at(m, grid, plate, src, 88.0, 3,
                                              plate.dof_count() + 64, 3, 5);

  const std::string path = "/tmp/platecav_test_ensemble.ens";
  write_ensemble_binary(path, e);
  const LoadEnsemble r = read_ensemble_binary(path);
  CHECK(r.f_hz == e.f_hz);
  CHECK(r.freq_index == e.freq_index);
  CHECK(r.n == e.n);
  CHECK(r.n_s == e.n_s);
  CHECK(r.seed == e.seed);
  CHECK((r.samples - e.samples).cwiseAbs().maxCoeff() == 0.0);
  std::remove(path.c_str());
}
