// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <memory>

#include <Eigen/SparseLU>

#include "platecav/assembly.hpp"
#include "platecav/types.hpp"

namespace platecav {

// Instrumented solve counters. sparse_solves counts forward/backward
// substitution applications (one per right-hand-side column); reduced_solves
// counts dense reduced-order solves and never touches the sparse counter.
struct SolveStats {
  long factorizations = 0;
  long sparse_solves = 0;
  long reduced_solves = 0;

  SolveStats& operator+=(const SolveStats& o) {
    factorizations += o.factorizations;
    sparse_solves += o.sparse_solves;
    reduced_solves += o.reduced_solves;
    return *this;
  }
};

// Sparse direct solver for A(omega) = K - omega^2 M. The operator is
// equilibrated before factorization (two-sided diagonal scaling); residuals
// are always measured against the original operator and every solve is
// checked against residual_tol. A breach throws NumericalError naming the
// frequency, so a sweep can flag and skip the step instead of silently
// degrading.
class FomSolver {
 public:
  FomSolver(const CoupledSystem& sys, double omega, double residual_tol = 1e-8,
            bool equilibrate = true);
  // Takes ownership of a pre-assembled operator (lets callers time assembly
  // and factorization separately).
  FomSolver(SparseOperator op, double omega, double residual_tol = 1e-8,
            bool equilibrate = true);

  VectorXcd solve(const VectorXcd& b);
  MatrixXcd solve_block(const MatrixXcd& B);

  double omega() const { return omega_; }
  Index n() const { return A_.rows(); }
  const SpMatC& matrix() const { return A_; }
  const SolveStats& stats() const { return stats_; }
  double last_residual() const { return last_residual_; }

 private:
  VectorXcd solve_one(const VectorXcd& b);

  SpMatC A_;
  VectorXd row_scale_, col_scale_;
  Eigen::SparseLU<SpMatC> lu_;
  SolveStats stats_;
  double omega_ = 0;
  double rtol_ = 1e-8;
  double last_residual_ = 0;
};

// M * X for real sparse M and complex dense X, via two real products.
MatrixXcd sparse_mul_complex(const SpMat& m, const MatrixXcd& x);

}  // namespace platecav
