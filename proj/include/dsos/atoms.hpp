#pragma once

// Conic programs whose cone variable is a conic combination of fixed psd
// atoms u u' (rank one, linear weights) and V L V' (V is N x 2, L a psd 2x2
// block, one rotated second-order cone each). Every LP/SOCP over DD(U) or
// SDD(U) in the library is assembled here.

#include <array>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "dsos/conic.hpp"
#include "dsos/linalg.hpp"

namespace dsos {

enum class ConeTag { DD, SDD };
const char* to_string(ConeTag t);

using SparseVec = std::vector<std::pair<int, double>>;

SparseVec sparsify(const Eigen::VectorXd& v, double drop = 0.0);
Eigen::VectorXd densify(const SparseVec& v, int n);

// Linear map from symmetric N x N matrices to R^rows:
//   out_r = sum_{k <= l} w(k,l,r) Q_kl.
// Polynomial Gram maps have one row per pair; constraint maps A_i . X may
// have several.
class PairMap {
 public:
  PairMap() = default;
  PairMap(int dim, int rows);

  void add(int k, int l, int row, double w);
  int dim() const { return dim_; }
  int rows() const { return rows_; }
  const std::vector<std::pair<int, double>>& terms(int k, int l) const;

  Eigen::VectorXd apply(const SymMatrix& Q) const;
  // The matrix M with <M, Q> = y . apply(Q) for every symmetric Q.
  SymMatrix adjoint(const Eigen::VectorXd& y) const;
  // apply() of the symmetrized outer product (u v' + v u')/2.
  // Rows that go from zero to nonzero are appended to touched.
  void accumulate_outer(const SparseVec& u, const SparseVec& v, double scale,
                        std::vector<double>& out, std::vector<int>* touched = nullptr) const;

 private:
  int index(int k, int l) const { return k <= l ? k * dim_ + l : l * dim_ + k; }
  int dim_ = 0;
  int rows_ = 0;
  std::vector<std::vector<std::pair<int, double>>> terms_;
};

// Maps with one row per matrix entry (k <= l), row order row-major upper.
PairMap entry_map(int n);
int entry_row(int n, int k, int l);
// Maps X to (A_i . X)_i.
PairMap constraint_map(const std::vector<SymMatrix>& A);

using PairAtom = std::array<SparseVec, 2>;

// Atoms are given in the coordinates of the cone matrix Q; the physical
// matrix is U' Q U, so each atom u enters as U' u.
struct AtomBlock {
  const PairMap* map = nullptr;
  int row_offset = 0;
  Eigen::MatrixXd U;  // empty: identity
  SymMatrix cost;     // empty: zero
  std::vector<SparseVec> rank1;
  std::vector<PairAtom> pairs;

  int dim() const { return map->dim(); }
};

// U_{N,2} (DD) or the diagonal atoms plus V_{N,2} (SDD). allowed(k, l)
// filters index pairs; null keeps all of them.
void add_base_atoms(AtomBlock& block, ConeTag tag,
                    const std::function<bool(int, int)>& allowed = nullptr);

struct ExtraColumn {
  ConeType type = ConeType::Free;  // Free or NonNeg
  double cost = 0.0;
  SparseVec entries;  // global row indices
};

// min  sum_blocks sum_atoms cost + sum extras cost
// s.t. sum_blocks map(U' Q U) + sum extras entries = rhs.
struct AtomProgram {
  int rows = 0;
  Eigen::VectorXd rhs;
  std::vector<AtomBlock> blocks;
  std::vector<ExtraColumn> extras;
};

struct AtomSolution {
  SolveStatus status = SolveStatus::Stalled;
  double value = 0.0;  // primal objective
  Eigen::VectorXd extras;
  Eigen::VectorXd y;  // row multipliers
  std::vector<Eigen::VectorXd> rank1_weights;
  std::vector<std::vector<Eigen::Matrix2d>> pair_weights;
  std::vector<SymMatrix> Q;     // cone matrix per block (atom coordinates)
  std::vector<SymMatrix> gram;  // U' Q U per block
  std::vector<SymMatrix> dual;  // cost - adjoint(y), physical coordinates
  int iterations = 0;
};

AtomSolution solve_atoms(const AtomProgram& prog, const SolverOptions& opts = {});

// Reduced cost matrix of a block in atom coordinates: U (cost - adjoint(y)) U'.
SymMatrix atom_dual(const AtomBlock& block, const SymMatrix& physical_dual);

}  // namespace dsos
