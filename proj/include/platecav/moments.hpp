// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <variant>
#include <vector>

#include "platecav/tbl.hpp"
#include "platecav/types.hpp"

namespace platecav {

// Covariance held in factored form: Sigma = E F F^H E^T where E embeds the
// factor rows at row_offset into the ambient dimension n. The dense n x n
// matrix is never formed on this path.
struct FactoredCovariance {
  Index n = 0;
  Index row_offset = 0;
  MatrixXcd factor;
};

struct MomentPair {
  VectorXcd mean;
  std::variant<FactoredCovariance, MatrixXcd> covariance;

  Index dim() const { return mean.size(); }
};

// Truncated SVD of a covariance: Sigma ~= U diag(S) V^H with S the singular
// values of the covariance itself (factored path: squared factor singular
// values). For Hermitian PSD input V equals U. Column phases are normalized
// so each U column's largest-magnitude entry is real positive; V follows the
// same rotation so the product is invariant.
struct LowRankFactorization {
  MatrixXcd U;  // n x l, orthonormal columns
  VectorXd S;   // descending, nonnegative
  MatrixXcd V;  // n x l
  bool hermitian = true;
  double energy_captured = 1.0;

  Index rank() const { return S.size(); }
};

// Propagated factors: Sigma_x ~= U diag(S) V^H with U = A^-1 U_f (columns are
// generally not orthonormal).
struct SolutionCovariance {
  MatrixXcd U;
  VectorXd S;
  MatrixXcd V;
  bool hermitian = true;

  Index rank() const { return S.size(); }
  Index dim() const { return U.rows(); }
};

// Sample mean and factored covariance (1/(I-1) normalization).
MomentPair estimate_moments(const LoadEnsemble& ensemble);

// l = smallest rank whose singular-value partial sum reaches
// energy_tol * (total sum), capped at l_max.
LowRankFactorization truncated_svd(const MomentPair& moments, Index l_max,
                                   double energy_tol);

// Phase convention shared by every factorization path.
void normalize_column_phases(MatrixXcd& u, MatrixXcd& v);
void normalize_column_phases(MatrixXcd& u);

template <typename Solver>
VectorXcd solve_mean(Solver& solver, const VectorXcd& f_mean) {
  return solver.solve(f_mean);
}

// A U_x,i = U_i per column; the Hermitian path reuses U_x for V_x so exactly
// rank() solves are performed, 2*rank() otherwise.
template <typename Solver>
SolutionCovariance propagate_factors(Solver& solver,
                                     const LowRankFactorization& factors) {
  SolutionCovariance out;
  out.S = factors.S;
  out.hermitian = factors.hermitian;
  out.U = solver.solve_block(factors.U);
  out.V = factors.hermitian ? out.U : solver.solve_block(factors.V);
  return out;
}

// Requested block of U diag(S) V^H; never materializes more than the block.
MatrixXcd reconstruct_covariance(const SolutionCovariance& sc,
                                 const std::vector<Index>& rows,
                                 const std::vector<Index>& cols);
MatrixXcd reconstruct_covariance_full(const SolutionCovariance& sc);

// Frobenius norms via rank x rank Gram matrices; nothing dense in n.
double covariance_frobenius(const SolutionCovariance& a);
double covariance_frobenius_distance(const SolutionCovariance& a,
                                     const SolutionCovariance& b);

}  // namespace platecav
