// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>

#include <Eigen/Dense>

#include "platecav/rng.hpp"
#include "platecav/types.hpp"

namespace platecav::testing {

// Dense LU solver with the same interface as FomSolver; counts solves so the
// accounting invariants can be asserted against toy systems.
class DenseToySolver {
 public:
  explicit DenseToySolver(MatrixXcd a) : a_(std::move(a)), lu_(a_) {}

  VectorXcd solve(const VectorXcd& b) {
    ++solves;
    return lu_.solve(b);
  }
  MatrixXcd solve_block(const MatrixXcd& b) {
    solves += b.cols();
    return lu_.solve(b);
  }
  const MatrixXcd& matrix() const { return a_; }

  long solves = 0;

 private:
  MatrixXcd a_;
  Eigen::PartialPivLU<MatrixXcd> lu_;
};

struct IdentitySolver {
  VectorXcd solve(const VectorXcd& b) { return b; }
  MatrixXcd solve_block(const MatrixXcd& b) { return b; }
};

inline double uniform_pm1(RandomStream& rs) {
  return 2.0 * rs.next_uniform01() - 1.0;
}

inline MatrixXcd random_complex_matrix(Index rows, Index cols, std::uint64_t seed) {
  RandomStream rs(seed);
  MatrixXcd m(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i)
      m(i, j) = Complex(uniform_pm1(rs), uniform_pm1(rs));
  return m;
}

inline VectorXcd random_complex_vector(Index n, std::uint64_t seed) {
  return random_complex_matrix(n, 1, seed).col(0);
}

// Random Hermitian positive semidefinite matrix F F^H with rank factors.
inline MatrixXcd random_hermitian_psd(Index n, Index rank, std::uint64_t seed) {
  const MatrixXcd f = random_complex_matrix(n, rank, seed);
  return f * f.adjoint();
}

// Well-conditioned complex system for propagation oracles.
inline MatrixXcd random_well_conditioned(Index n, std::uint64_t seed) {
  MatrixXcd a = random_complex_matrix(n, n, seed);
  a += Complex(3.0 + static_cast<double>(n) * 0.5, 0.7) * MatrixXcd::Identity(n, n);
  return a;
}

// Taylor coefficients of an analytic y(mu) around mu = 0 from equispaced
// samples on the circle |mu| = h (trigonometric differentiation). This is the
// finite-difference stencil used for the moment-matching order checks: the
// weights exp(-i j theta_m) / (N h^j) recover j! c_j with aliasing error
// O((h/R)^(N-j)), which keeps high-order derivatives at full precision where
// real-axis stencils would lose them to roundoff.
inline VectorXcd circle_stencil_derivatives(
    const std::function<Complex(Complex)>& y, double h, int n_samples,
    int max_order) {
  std::vector<Complex> samples(static_cast<std::size_t>(n_samples));
  for (int m = 0; m < n_samples; ++m) {
    const double theta = 2.0 * 3.14159265358979323846 * m / n_samples;
    samples[static_cast<std::size_t>(m)] = y(h * std::polar(1.0, theta));
  }
  VectorXcd derivs(max_order + 1);
  double factorial = 1.0;
  for (int j = 0; j <= max_order; ++j) {
    if (j > 0) factorial *= j;
    Complex acc(0, 0);
    for (int m = 0; m < n_samples; ++m) {
      const double theta = 2.0 * 3.14159265358979323846 * m / n_samples;
      acc += samples[static_cast<std::size_t>(m)] * std::polar(1.0, -j * theta);
    }
    derivs[j] = factorial * acc / (static_cast<double>(n_samples) * std::pow(h, j));
  }
  return derivs;
}

}  // namespace platecav::testing
