#include "dsos/linalg.hpp"

#include <algorithm>
#include <cmath>

#include "dsos/conic.hpp"

namespace dsos {

Eigen::MatrixXd cholesky(const SymMatrix& M, double reg) {
  const int n = static_cast<int>(M.rows());
  if (M.cols() != n) throw std::invalid_argument("cholesky: matrix not square");
  double mu = 0.0;
  if (reg > 0.0) mu = reg * std::max(M.trace() / n, 1.0);
  SymMatrix A = symmetrize(M);
  A.diagonal().array() += mu;
  Eigen::LLT<Eigen::MatrixXd> llt(A);
  if (llt.info() != Eigen::Success) {
    throw NotPositiveDefinite("cholesky: matrix is not positive definite");
  }
  Eigen::MatrixXd U = llt.matrixU();
  for (int i = 0; i < n; ++i) {
    if (!(U(i, i) > 0.0)) throw NotPositiveDefinite("cholesky: nonpositive pivot");
  }
  return U;
}

EigenDecomposition eig_sym(const SymMatrix& M) {
  const int n = static_cast<int>(M.rows());
  Eigen::MatrixXd A = symmetrize(M);
  Eigen::MatrixXd V = Eigen::MatrixXd::Identity(n, n);
  const double scale = std::max(A.norm(), 1e-300);
  auto off_norm = [&]() {
    double s = 0.0;
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < j; ++i) s += 2.0 * A(i, j) * A(i, j);
    return std::sqrt(s);
  };
  int sweep = 0;
  while (off_norm() > 1e-12 * scale) {
    if (++sweep > 100) throw NoConvergence("eig_sym: Jacobi did not converge");
    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        double apq = A(p, q);
        if (std::abs(apq) < 1e-300) continue;
        double theta = (A(q, q) - A(p, p)) / (2.0 * apq);
        double t = (theta >= 0 ? 1.0 : -1.0) /
                   (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        double c = 1.0 / std::sqrt(t * t + 1.0);
        double s = t * c;
        for (int k = 0; k < n; ++k) {
          double akp = A(k, p), akq = A(k, q);
          A(k, p) = c * akp - s * akq;
          A(k, q) = s * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          double apk = A(p, k), aqk = A(q, k);
          A(p, k) = c * apk - s * aqk;
          A(q, k) = s * apk + c * aqk;
        }
        A(p, q) = A(q, p) = 0.0;
        for (int k = 0; k < n; ++k) {
          double vkp = V(k, p), vkq = V(k, q);
          V(k, p) = c * vkp - s * vkq;
          V(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return A(a, a) < A(b, b); });
  EigenDecomposition out;
  out.values.resize(n);
  out.vectors.resize(n, n);
  for (int i = 0; i < n; ++i) {
    out.values(i) = A(order[i], order[i]);
    out.vectors.col(i) = V.col(order[i]);
  }
  return out;
}

double dd_margin(const SymMatrix& M) {
  const int n = static_cast<int>(M.rows());
  double margin = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    double off = 0.0;
    for (int j = 0; j < n; ++j)
      if (j != i) off += std::abs(M(i, j));
    margin = std::min(margin, M(i, i) - off);
  }
  return margin;
}

bool is_dd(const SymMatrix& M, double tol) { return dd_margin(M) >= -tol; }

bool is_sdd(const SymMatrix& M, double tol) {
  const int n = static_cast<int>(M.rows());
  if (n == 0) return true;
  for (int i = 0; i < n; ++i)
    if (M(i, i) < -tol) return false;
  if (is_dd(M, tol)) return true;
  // max t s.t. d_i M_ii - sum_j d_j |M_ij| - t >= 0, sum d = n, d >= 0.
  // Variables: t (free), d (n, nonneg), slack (n, nonneg).
  ProgramBuilder pb;
  int t = pb.add_free(1);
  int d = pb.add_nonneg(n);
  int sl = pb.add_nonneg(n);
  pb.set_cost(t, -1.0);
  for (int i = 0; i < n; ++i) {
    int row = pb.add_row(0.0);
    for (int j = 0; j < n; ++j) {
      double a = (i == j) ? M(i, i) : -std::abs(M(i, j));
      if (a != 0.0) pb.add_coef(row, d + j, a);
    }
    pb.add_coef(row, t, -1.0);
    pb.add_coef(row, sl + i, -1.0);
  }
  int norm_row = pb.add_row(static_cast<double>(n));
  for (int j = 0; j < n; ++j) pb.add_coef(norm_row, d + j, 1.0);
  ConicSolution sol = solve(pb.build());
  if (sol.status != SolveStatus::Optimal && sol.status != SolveStatus::Stalled) {
    throw std::runtime_error("is_sdd: scaling LP failed");
  }
  return sol.x(t) >= -tol;
}

std::vector<DdAtom> dd_extreme_decomposition(const SymMatrix& M, double tol) {
  const int n = static_cast<int>(M.rows());
  if (!is_dd(M, tol)) throw std::invalid_argument("dd_extreme_decomposition: not dd");
  std::vector<DdAtom> atoms;
  Vector residual = M.diagonal();
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      double m = 0.5 * (M(i, j) + M(j, i));
      if (m == 0.0) continue;
      Vector v = Vector::Zero(n);
      v(i) = 1.0;
      v(j) = m > 0 ? 1.0 : -1.0;
      atoms.push_back({std::abs(m), v});
      residual(i) -= std::abs(m);
      residual(j) -= std::abs(m);
    }
  }
  for (int i = 0; i < n; ++i) {
    if (residual(i) <= 0.0) continue;
    Vector v = Vector::Zero(n);
    v(i) = 1.0;
    atoms.push_back({residual(i), v});
  }
  return atoms;
}

SymMatrix symmetrize(const Eigen::MatrixXd& M) {
  return 0.5 * (M + M.transpose());
}

}  // namespace dsos
