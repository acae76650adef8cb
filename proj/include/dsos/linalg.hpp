#pragma once

#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace dsos {

// Dense symmetric matrix. Symmetry is kept by every producer in the library.
using SymMatrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

class NotPositiveDefinite : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NoConvergence : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct EigenDecomposition {
  Vector values;          // ascending
  Eigen::MatrixXd vectors;  // columns are eigenvectors
};

constexpr double kDefaultDdTol = 1e-8;

// Upper triangular U with U^T U = M + mu I, mu = reg * max(trace(M)/dim, 1).
Eigen::MatrixXd cholesky(const SymMatrix& M, double reg = 0.0);

// Cyclic Jacobi eigendecomposition.
EigenDecomposition eig_sym(const SymMatrix& M);

bool is_dd(const SymMatrix& M, double tol = kDefaultDdTol);
// Smallest value of M_ii - sum_{j != i} |M_ij| over rows.
double dd_margin(const SymMatrix& M);
bool is_sdd(const SymMatrix& M, double tol = kDefaultDdTol);

struct DdAtom {
  double weight;
  Vector v;  // at most two nonzero entries, each +-1
};

std::vector<DdAtom> dd_extreme_decomposition(const SymMatrix& M,
                                             double tol = kDefaultDdTol);

// Symmetrizes in place: (M + M^T)/2.
SymMatrix symmetrize(const Eigen::MatrixXd& M);

}  // namespace dsos
