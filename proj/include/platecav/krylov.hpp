// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include <Eigen/LU>

#include "platecav/assembly.hpp"
#include "platecav/solver.hpp"
#include "platecav/types.hpp"

namespace platecav {

// Expansion configuration for the moment-matching basis. One input block per
// expansion point (mean vector plus low-rank covariance factors at that
// point).
struct ExpansionConfig {
  std::vector<double> frequencies_hz;
  int order = 20;              // moments matched per input per point
  double deflation_tol = 1e-10;
  std::vector<MatrixXcd> inputs;  // inputs[p] is n x m_p

  void validate(Index n) const;
};

struct ColumnTag {
  int point = 0;
  int level = 0;
  Index input = 0;
};

struct DeflationEvent {
  ColumnTag tag;
  double rel_norm = 0;
};

// Frequency-independent orthonormal basis; the same object is reused at
// every sweep frequency and never mutated after construction.
struct ProjectionBasis {
  MatrixXcd V;  // n x r, V^H V = I
  std::vector<double> expansion_hz;
  int order = 0;
  Index candidate_count = 0;  // columns before deflation
  std::vector<DeflationEvent> deflations;

  Index r() const { return V.cols(); }
  Index n() const { return V.rows(); }
};

// Second-order Krylov block at expansion frequency sigma. In the shifted
// variable mu = omega^2 - sigma^2 the operator is A(sigma) - mu M, so the
// transfer-function moments are s_k = (A(sigma)^-1 M)^k A(sigma)^-1 g. One
// sparse factorization of A(sigma) serves all m*order solves. Levels are
// normalized columnwise (spans are scale invariant) and interleaved
// level-by-level in the returned block.
MatrixXcd krylov_block(const CoupledSystem& sys, double sigma_omega,
                       const MatrixXcd& inputs, int order,
                       SolveStats* stats = nullptr);

// Block classical Gram-Schmidt with reorthogonalization. Columns whose
// post-projection norm falls below tol * (original norm) are deflated and
// logged; everything else is normalized into the basis.
ProjectionBasis orthonormalize(const MatrixXcd& candidates, double tol,
                               const std::vector<ColumnTag>* tags = nullptr);

ProjectionBasis build_basis(const CoupledSystem& sys, const ExpansionConfig& cfg,
                            SolveStats* stats = nullptr);

// Galerkin projection K_r = V^H K V, M_r = V^H M V (loss factor folded into
// K_r, matching dynamic_stiffness at omega = 0).
struct ReducedSystem {
  MatrixXcd K_r;
  MatrixXcd M_r;

  Index r() const { return K_r.rows(); }
};

ReducedSystem reduce(const CoupledSystem& sys, const ProjectionBasis& basis);

VectorXcd solve_reduced(const ReducedSystem& rs, double omega,
                        const VectorXcd& rhs_reduced);

VectorXcd lift(const ProjectionBasis& basis, const VectorXcd& x_r);

// Dense solver over the reduced operator at a fixed frequency. solve() takes
// and returns full-space vectors (project, solve, lift); no sparse solve is
// ever performed.
class RomSolver {
 public:
  RomSolver(const ProjectionBasis& basis, const ReducedSystem& rs, double omega,
            double residual_tol = 1e-8);

  VectorXcd solve(const VectorXcd& b_full);
  MatrixXcd solve_block(const MatrixXcd& B_full);
  VectorXcd solve_reduced_rhs(const VectorXcd& rhs_reduced);

  double omega() const { return omega_; }
  const SolveStats& stats() const { return stats_; }

 private:
  const ProjectionBasis& basis_;
  MatrixXcd op_;
  Eigen::PartialPivLU<MatrixXcd> lu_;
  SolveStats stats_;
  double omega_;
  double rtol_;
};

// Matrix Market array export of V plus a plain-text metadata sidecar
// (expansion points, order, candidate count, deflation log).
void save_basis(const ProjectionBasis& basis, const std::string& matrix_path,
                const std::string& meta_path);
ProjectionBasis load_basis(const std::string& matrix_path,
                           const std::string& meta_path);

}  // namespace platecav
