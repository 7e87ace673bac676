// SPDX-License-Identifier: Apache-2.0
#include "platecav/moments.hpp"

#include <cmath>

#include <Eigen/SVD>

namespace platecav {

MomentPair estimate_moments(const LoadEnsemble& ensemble) {
  const Index count = ensemble.sample_count();
  if (count < 2) throw ContractError("covariance estimation needs I >= 2");

  const VectorXcd mean_s = ensemble.samples.rowwise().mean();

  FactoredCovariance cov;
  cov.n = ensemble.n;
  cov.row_offset = 0;
  cov.factor = (ensemble.samples.colwise() - mean_s) /
               std::sqrt(static_cast<double>(count - 1));

  MomentPair mp;
  mp.mean = VectorXcd::Zero(ensemble.n);
  mp.mean.head(ensemble.n_s) = mean_s;
  mp.covariance = std::move(cov);
  return mp;
}

void normalize_column_phases(MatrixXcd& u, MatrixXcd& v) {
  for (Index j = 0; j < u.cols(); ++j) {
    Index arg = 0;
    double best = -1.0;
    for (Index i = 0; i < u.rows(); ++i) {
      const double m = std::abs(u(i, j));
      if (m > best) {  // first maximum wins on ties
        best = m;
        arg = i;
      }
    }
    if (best <= 0.0) continue;
    const Complex rot = std::conj(u(arg, j) / best);
    u.col(j) *= rot;
    if (j < v.cols()) v.col(j) *= rot;
  }
}

void normalize_column_phases(MatrixXcd& u) {
  MatrixXcd none(u.rows(), 0);
  normalize_column_phases(u, none);
}

namespace {

Index select_rank(const VectorXd& s, Index l_max, double energy_tol) {
  const double total = s.sum();
  if (total <= 0.0) return 0;
  double partial = 0.0;
  Index l = s.size();
  for (Index i = 0; i < s.size(); ++i) {
    partial += s[i];
    if (partial >= energy_tol * total) {
      l = i + 1;
      break;
    }
  }
  return std::min(l, l_max);
}

LowRankFactorization from_factored(const FactoredCovariance& cov, Index l_max,
                                   double energy_tol) {
  // Thin SVD of the n x I factor; covariance singular values are the squared
  // factor singular values. The dense n x n covariance is never formed.
  Eigen::BDCSVD<MatrixXcd> svd(cov.factor, Eigen::ComputeThinU);
  const VectorXd s2 = svd.singularValues().array().square();
  const Index l = select_rank(s2, l_max, energy_tol);

  LowRankFactorization lr;
  lr.hermitian = true;
  lr.S = s2.head(l);
  lr.U = MatrixXcd::Zero(cov.n, l);
  lr.U.middleRows(cov.row_offset, cov.factor.rows()) = svd.matrixU().leftCols(l);
  normalize_column_phases(lr.U);
  lr.V = lr.U;
  lr.energy_captured = s2.sum() > 0 ? lr.S.sum() / s2.sum() : 1.0;
  return lr;
}

LowRankFactorization from_dense(const MatrixXcd& sigma, Index l_max,
                                double energy_tol) {
  if (sigma.rows() != sigma.cols())
    throw ContractError("dense covariance must be square");
  Eigen::BDCSVD<MatrixXcd> svd(sigma, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const VectorXd s = svd.singularValues();
  const Index l = select_rank(s, l_max, energy_tol);

  LowRankFactorization lr;
  lr.S = s.head(l);
  lr.U = svd.matrixU().leftCols(l);
  lr.V = svd.matrixV().leftCols(l);
  normalize_column_phases(lr.U, lr.V);
  lr.hermitian = l == 0 || (lr.U - lr.V).cwiseAbs().maxCoeff() <=
                              1e-10 * std::max(1.0, lr.U.cwiseAbs().maxCoeff());
  if (lr.hermitian) lr.V = lr.U;
  lr.energy_captured = s.sum() > 0 ? lr.S.sum() / s.sum() : 1.0;
  return lr;
}

}  // namespace

LowRankFactorization truncated_svd(const MomentPair& moments, Index l_max,
                                   double energy_tol) {
  if (l_max < 0) throw ContractError("l_max must be nonnegative");
  if (energy_tol <= 0 || energy_tol > 1)
    throw ContractError("energy tolerance must lie in (0, 1]");
  if (std::holds_alternative<FactoredCovariance>(moments.covariance))
    return from_factored(std::get<FactoredCovariance>(moments.covariance), l_max,
                         energy_tol);
  return from_dense(std::get<MatrixXcd>(moments.covariance), l_max, energy_tol);
}

MatrixXcd reconstruct_covariance(const SolutionCovariance& sc,
                                 const std::vector<Index>& rows,
                                 const std::vector<Index>& cols) {
  const Index n = sc.dim();
  MatrixXcd ur(static_cast<Index>(rows.size()), sc.rank());
  MatrixXcd vc(static_cast<Index>(cols.size()), sc.rank());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] < 0 || rows[i] >= n) throw ContractError("row index out of range");
    ur.row(static_cast<Index>(i)) = sc.U.row(rows[i]);
  }
  for (std::size_t j = 0; j < cols.size(); ++j) {
    if (cols[j] < 0 || cols[j] >= n) throw ContractError("column index out of range");
    vc.row(static_cast<Index>(j)) = sc.V.row(cols[j]);
  }
  return ur * sc.S.cast<Complex>().asDiagonal() * vc.adjoint();
}

MatrixXcd reconstruct_covariance_full(const SolutionCovariance& sc) {
  return sc.U * sc.S.cast<Complex>().asDiagonal() * sc.V.adjoint();
}

namespace {

// tr(Sigma_a^H Sigma_b) through rank-sized Gram matrices.
Complex factored_inner(const SolutionCovariance& a, const SolutionCovariance& b) {
  if (a.dim() != b.dim())
    throw ContractError("covariance dimensions differ");
  if (a.rank() == 0 || b.rank() == 0) return 0.0;
  const MatrixXcd gvv = b.V.adjoint() * a.V;  // lb x la
  const MatrixXcd guu = a.U.adjoint() * b.U;  // la x lb
  const MatrixXcd t = gvv * a.S.cast<Complex>().asDiagonal() * guu *
                      b.S.cast<Complex>().asDiagonal();
  return t.trace();
}

}  // namespace

double covariance_frobenius(const SolutionCovariance& a) {
  return std::sqrt(std::max(0.0, factored_inner(a, a).real()));
}

double covariance_frobenius_distance(const SolutionCovariance& a,
                                     const SolutionCovariance& b) {
  const double aa = factored_inner(a, a).real();
  const double bb = factored_inner(b, b).real();
  const double ab = factored_inner(a, b).real();
  return std::sqrt(std::max(0.0, aa + bb - 2.0 * ab));
}

}  // namespace platecav
