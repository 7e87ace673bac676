// SPDX-License-Identifier: Apache-2.0
#include "platecav/solver.hpp"

#include <cmath>
#include <string>

namespace platecav {

namespace {

std::string describe_omega(double omega) {
  return "omega = " + std::to_string(omega) + " rad/s (f = " +
         std::to_string(omega / (2.0 * kPi)) + " Hz)";
}

}  // namespace

FomSolver::FomSolver(const CoupledSystem& sys, double omega, double residual_tol,
                     bool equilibrate)
    : FomSolver(dynamic_stiffness(sys, omega), omega, residual_tol, equilibrate) {}

FomSolver::FomSolver(SparseOperator op, double omega, double residual_tol,
                     bool equilibrate)
    : omega_(omega), rtol_(residual_tol) {
  A_ = std::move(op.mat);
  const Index n = A_.rows();

  row_scale_ = VectorXd::Ones(n);
  col_scale_ = VectorXd::Ones(n);
  if (equilibrate) {
    VectorXd rmax = VectorXd::Zero(n), cmax = VectorXd::Zero(n);
    for (Index k = 0; k < A_.outerSize(); ++k)
      for (SpMatC::InnerIterator it(A_, k); it; ++it) {
        const double v = std::abs(it.value());
        rmax[it.row()] = std::max(rmax[it.row()], v);
      }
    for (Index i = 0; i < n; ++i) row_scale_[i] = rmax[i] > 0 ? 1.0 / rmax[i] : 1.0;
    for (Index k = 0; k < A_.outerSize(); ++k)
      for (SpMatC::InnerIterator it(A_, k); it; ++it) {
        const double v = std::abs(it.value()) * row_scale_[it.row()];
        cmax[it.col()] = std::max(cmax[it.col()], v);
      }
    for (Index j = 0; j < n; ++j) col_scale_[j] = cmax[j] > 0 ? 1.0 / cmax[j] : 1.0;
  }

  SpMatC scaled = A_;
  for (Index k = 0; k < scaled.outerSize(); ++k)
    for (SpMatC::InnerIterator it(scaled, k); it; ++it)
      it.valueRef() *= row_scale_[it.row()] * col_scale_[it.col()];

  lu_.compute(scaled);
  if (lu_.info() != Eigen::Success)
    throw NumericalError("sparse factorization failed at " + describe_omega(omega_));
  ++stats_.factorizations;
}

VectorXcd FomSolver::solve_one(const VectorXcd& b) {
  const VectorXcd bs = row_scale_.cast<Complex>().asDiagonal() * b;
  VectorXcd x = lu_.solve(bs);
  x = col_scale_.cast<Complex>().asDiagonal() * x;
  ++stats_.sparse_solves;

  const double bnorm = b.norm();
  if (bnorm > 0) {
    last_residual_ = (A_ * x - b).norm() / bnorm;
    if (!(last_residual_ <= rtol_))
      throw NumericalError("solve residual " + std::to_string(last_residual_) +
                           " exceeds tolerance at " + describe_omega(omega_));
  } else {
    last_residual_ = 0.0;
  }
  return x;
}

VectorXcd FomSolver::solve(const VectorXcd& b) { return solve_one(b); }

MatrixXcd FomSolver::solve_block(const MatrixXcd& B) {
  MatrixXcd X(B.rows(), B.cols());
  for (Index j = 0; j < B.cols(); ++j) X.col(j) = solve_one(B.col(j));
  return X;
}

MatrixXcd sparse_mul_complex(const SpMat& m, const MatrixXcd& x) {
  MatrixXcd out(m.rows(), x.cols());
  out.real() = m * x.real();
  out.imag() = m * x.imag();
  return out;
}

}  // namespace platecav
