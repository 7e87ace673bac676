// SPDX-License-Identifier: Apache-2.0
#include "platecav/krylov.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "platecav/matrixmarket.hpp"

namespace platecav {

void ExpansionConfig::validate(Index n) const {
  if (frequencies_hz.empty()) throw ConfigError("no expansion points configured");
  if (order < 1) throw ConfigError("expansion order must be >= 1");
  if (deflation_tol <= 0) throw ConfigError("deflation tolerance must be positive");
  if (inputs.size() != frequencies_hz.size())
    throw ContractError("one input block per expansion point required");
  for (const auto& block : inputs) {
    if (block.cols() == 0) throw ContractError("empty input block");
    if (block.rows() != n) throw ContractError("input block has wrong dimension");
  }
}

MatrixXcd krylov_block(const CoupledSystem& sys, double sigma_omega,
                       const MatrixXcd& inputs, int order, SolveStats* stats) {
  if (inputs.cols() == 0) throw ContractError("krylov_block needs inputs");
  if (order < 1) throw ContractError("krylov_block needs order >= 1");

  FomSolver solver(sys, sigma_omega);
  const Index m = inputs.cols();
  MatrixXcd block(sys.n(), m * static_cast<Index>(order));

  auto normalize_columns = [](MatrixXcd& x) {
    for (Index j = 0; j < x.cols(); ++j) {
      const double norm = x.col(j).norm();
      if (norm > 0) x.col(j) /= norm;
    }
  };

  MatrixXcd level = solver.solve_block(inputs);
  normalize_columns(level);
  block.leftCols(m) = level;
  for (int k = 1; k < order; ++k) {
    level = solver.solve_block(sparse_mul_complex(sys.M, level));
    normalize_columns(level);
    block.middleCols(static_cast<Index>(k) * m, m) = level;
  }

  if (stats) *stats += solver.stats();
  return block;
}

ProjectionBasis orthonormalize(const MatrixXcd& candidates, double tol,
                               const std::vector<ColumnTag>* tags) {
  if (candidates.cols() == 0) throw ContractError("no candidate columns");
  if (tol <= 0) throw ContractError("deflation tolerance must be positive");
  if (tags && static_cast<Index>(tags->size()) != candidates.cols())
    throw ContractError("one tag per candidate column required");

  const Index n = candidates.rows();
  const Index m = candidates.cols();
  VectorXd original_norms(m);
  for (Index j = 0; j < m; ++j) original_norms[j] = candidates.col(j).norm();

  ProjectionBasis basis;
  basis.candidate_count = m;
  MatrixXcd v(n, std::min(n, m));
  Index r = 0;

  constexpr Index kBlock = 64;
  for (Index start = 0; start < m; start += kBlock) {
    const Index width = std::min(kBlock, m - start);
    MatrixXcd w = candidates.middleCols(start, width);

    // Two classical Gram-Schmidt passes against the accepted basis, then
    // modified Gram-Schmidt inside the block.
    for (int pass = 0; pass < 2; ++pass) {
      if (r == 0) break;
      w.noalias() -= v.leftCols(r) * (v.leftCols(r).adjoint() * w);
    }

    const Index block_first = r;
    for (Index j = 0; j < width; ++j) {
      VectorXcd col = w.col(j);
      for (int pass = 0; pass < 2; ++pass)
        for (Index k = block_first; k < r; ++k)
          col -= v.col(k) * v.col(k).dot(col);

      const Index global = start + j;
      const double norm = col.norm();
      const double orig = original_norms[global];
      if (norm <= tol * orig || norm == 0.0 || r >= v.cols()) {
        DeflationEvent ev;
        if (tags) ev.tag = (*tags)[static_cast<std::size_t>(global)];
        else ev.tag = ColumnTag{0, 0, global};
        ev.rel_norm = orig > 0 ? norm / orig : 0.0;
        basis.deflations.push_back(ev);
        continue;
      }
      v.col(r) = col / norm;
      ++r;
    }
  }

  if (r == 0) throw NumericalError("all candidate columns were deflated");
  basis.V = v.leftCols(r);
  return basis;
}

ProjectionBasis build_basis(const CoupledSystem& sys, const ExpansionConfig& cfg,
                            SolveStats* stats) {
  cfg.validate(sys.n());

  Index total = 0;
  for (const auto& block : cfg.inputs)
    total += block.cols() * static_cast<Index>(cfg.order);

  MatrixXcd candidates(sys.n(), total);
  std::vector<ColumnTag> tags;
  tags.reserve(static_cast<std::size_t>(total));

  Index at = 0;
  for (std::size_t p = 0; p < cfg.frequencies_hz.size(); ++p) {
    const double sigma = 2.0 * kPi * cfg.frequencies_hz[p];
    const Index m = cfg.inputs[p].cols();
    candidates.middleCols(at, m * cfg.order) =
        krylov_block(sys, sigma, cfg.inputs[p], cfg.order, stats);
    for (int level = 0; level < cfg.order; ++level)
      for (Index input = 0; input < m; ++input)
        tags.push_back(ColumnTag{static_cast<int>(p), level, input});
    at += m * cfg.order;
  }

  ProjectionBasis basis = orthonormalize(candidates, cfg.deflation_tol, &tags);
  basis.expansion_hz = cfg.frequencies_hz;
  basis.order = cfg.order;
  return basis;
}

ReducedSystem reduce(const CoupledSystem& sys, const ProjectionBasis& basis) {
  if (basis.n() != sys.n())
    throw ContractError("basis dimension does not match the system");
  ReducedSystem rs;
  if (sys.loss_factor == 0.0) {
    rs.K_r = basis.V.adjoint() * sparse_mul_complex(sys.K, basis.V);
  } else {
    const SpMatC kc = dynamic_stiffness(sys, 0.0).mat;  // K with loss factor
    rs.K_r = basis.V.adjoint() * (kc * basis.V);
  }
  rs.M_r = basis.V.adjoint() * sparse_mul_complex(sys.M, basis.V);
  return rs;
}

VectorXcd solve_reduced(const ReducedSystem& rs, double omega,
                        const VectorXcd& rhs_reduced) {
  if (rhs_reduced.size() != rs.r())
    throw ContractError("reduced right-hand side has wrong dimension");
  const MatrixXcd op = rs.K_r - (omega * omega) * rs.M_r;
  const VectorXcd x = op.partialPivLu().solve(rhs_reduced);
  const double bnorm = rhs_reduced.norm();
  if (bnorm > 0) {
    const double rel = (op * x - rhs_reduced).norm() / bnorm;
    if (!(rel <= 1e-8))
      throw NumericalError("reduced solve residual " + std::to_string(rel) +
                           " at omega = " + std::to_string(omega));
  }
  return x;
}

VectorXcd lift(const ProjectionBasis& basis, const VectorXcd& x_r) {
  if (x_r.size() != basis.r()) throw ContractError("reduced vector has wrong size");
  return basis.V * x_r;
}

RomSolver::RomSolver(const ProjectionBasis& basis, const ReducedSystem& rs,
                     double omega, double residual_tol)
    : basis_(basis), omega_(omega), rtol_(residual_tol) {
  op_ = rs.K_r - (omega * omega) * rs.M_r;
  lu_.compute(op_);
}

VectorXcd RomSolver::solve_reduced_rhs(const VectorXcd& rhs_reduced) {
  VectorXcd y = lu_.solve(rhs_reduced);
  ++stats_.reduced_solves;
  const double bnorm = rhs_reduced.norm();
  if (bnorm > 0) {
    const double rel = (op_ * y - rhs_reduced).norm() / bnorm;
    if (!(rel <= rtol_))
      throw NumericalError("reduced solve residual " + std::to_string(rel) +
                           " exceeds tolerance at omega = " + std::to_string(omega_));
  }
  return y;
}

VectorXcd RomSolver::solve(const VectorXcd& b_full) {
  return basis_.V * solve_reduced_rhs(basis_.V.adjoint() * b_full);
}

MatrixXcd RomSolver::solve_block(const MatrixXcd& B_full) {
  MatrixXcd out(B_full.rows(), B_full.cols());
  for (Index j = 0; j < B_full.cols(); ++j) out.col(j) = solve(B_full.col(j));
  return out;
}

void save_basis(const ProjectionBasis& basis, const std::string& matrix_path,
                const std::string& meta_path) {
  write_market_dense_complex(matrix_path, basis.V,
                             {"projection basis V, orthonormal columns"});
  std::ofstream meta(meta_path);
  if (!meta) throw IoError("cannot write basis metadata: " + meta_path);
  meta << "n = " << basis.n() << '\n';
  meta << "r = " << basis.r() << '\n';
  meta << "order = " << basis.order << '\n';
  meta << "candidate_count = " << basis.candidate_count << '\n';
  meta << "expansion_hz =";
  for (std::size_t i = 0; i < basis.expansion_hz.size(); ++i)
    meta << (i ? "," : " ") << format_g17(basis.expansion_hz[i]);
  meta << '\n';
  meta << "deflation_count = " << basis.deflations.size() << '\n';
  for (const auto& d : basis.deflations)
    meta << "deflated = " << d.tag.point << ' ' << d.tag.level << ' '
         << d.tag.input << ' ' << format_g17(d.rel_norm) << '\n';
  if (!meta) throw IoError("write failed: " + meta_path);
}

ProjectionBasis load_basis(const std::string& matrix_path,
                           const std::string& meta_path) {
  ProjectionBasis basis;
  basis.V = read_market_dense_complex(matrix_path);

  std::ifstream meta(meta_path);
  if (!meta) throw IoError("cannot open basis metadata: " + meta_path);
  std::string line;
  while (std::getline(meta, line)) {
    std::istringstream ss(line);
    std::string key, eq;
    if (!(ss >> key >> eq) || eq != "=") continue;
    if (key == "order") ss >> basis.order;
    else if (key == "candidate_count") ss >> basis.candidate_count;
    else if (key == "expansion_hz") {
      std::string rest;
      std::getline(ss, rest);
      std::stringstream rs(rest);
      std::string tok;
      while (std::getline(rs, tok, ','))
        if (!tok.empty()) basis.expansion_hz.push_back(std::strtod(tok.c_str(), nullptr));
    } else if (key == "deflated") {
      DeflationEvent ev;
      ss >> ev.tag.point >> ev.tag.level >> ev.tag.input >> ev.rel_norm;
      basis.deflations.push_back(ev);
    }
  }
  return basis;
}

}  // namespace platecav
