#pragma once

// Change-of-basis iterations: optimize over DD(U) / SDD(U) = {U'QU : Q in
// DD / SDD} and update U by a Cholesky factor of the last solution.

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "dsos/atoms.hpp"
#include "dsos/colgen.hpp"
#include "dsos/conic.hpp"
#include "dsos/linalg.hpp"

namespace dsos {

struct SdpData {
  SymMatrix C;
  std::vector<SymMatrix> A;
  Eigen::VectorXd b;

  int dim() const { return static_cast<int>(C.rows()); }
};

struct InnerResult {
  SolveStatus status = SolveStatus::Stalled;
  double bound = 0.0;  // C . X
  SymMatrix X;
  SymMatrix Q;  // X = U'QU
};

// min C.X s.t. A_i.X = b_i, X in DD(U) or SDD(U). Empty U is the identity.
InnerResult inner_step(const SdpData& d, const Eigen::MatrixXd& U, ConeTag tag,
                       const SolverOptions& opts = {});

// Upper triangular U with U'U = X + mu I (regularization 1e-9). Throws
// NotPositiveDefinite if X has an eigenvalue below -1e-8 (scaled by max(1, |X|)).
Eigen::MatrixXd update_basis(const SymMatrix& X);

struct PhaseOneResult {
  bool feasible = false;
  std::vector<double> alphas;
  // Basis for which the original problem is feasible: chol of the iterate X
  // with alpha <= 0, so X itself lies in DD(U_start) through Q = I.
  Eigen::MatrixXd U_start;
};

// Iterates min alpha s.t. A_i.X = b_i, X + alpha I in DD(U_k), alpha >= -1,
// with U_{k+1} = chol(X_k + alpha_k I).
PhaseOneResult phase_one(const std::vector<SymMatrix>& A, const Eigen::VectorXd& b, int n,
                         ConeTag tag, int max_iters);

struct OuterResult {
  SolveStatus status = SolveStatus::Stalled;
  double bound = 0.0;  // b'y = min C.X over the outer relaxation
  Eigen::VectorXd y;
  SymMatrix S;  // C - sum y_i A_i = U' Q U
  SymMatrix X;  // primal solution of the relaxation
};

// Solves the dual max b'y s.t. C - sum y_i A_i in DD(U) / SDD(U) directly.
OuterResult outer_step(const SdpData& d, const Eigen::MatrixXd& U, ConeTag tag,
                       const SolverOptions& opts = {});

struct BasisSequence {
  ConeTag tag = ConeTag::DD;
  std::vector<Eigen::MatrixXd> bases;  // U_0 = I, U_1, ...
  std::vector<double> bounds;
  std::vector<IterationRecord> log;
  SolveStatus status = SolveStatus::Optimal;
  SymMatrix last_X;
  Eigen::VectorXd last_y;
};

struct SequenceOptions {
  int iters = 10;
  double rel_floor = 1e-6;  // stop when |bound_k - bound_{k-1}| <= floor (1 + |bound_{k-1}|)
  SolverOptions solver;
};

// Upper bounds (nonincreasing) on min C.X over X psd.
BasisSequence inner_sequence(const SdpData& d, ConeTag tag, const SequenceOptions& opts = {},
                             const Eigen::MatrixXd& U0 = {});
// Lower bounds (nondecreasing) on the same value.
BasisSequence outer_sequence(const SdpData& d, ConeTag tag, const SequenceOptions& opts = {});

}  // namespace dsos
