#pragma once

#include <functional>
#include <map>
#include <vector>

#include <Eigen/Dense>

#include "dsos/atoms.hpp"
#include "dsos/conic.hpp"
#include "dsos/linalg.hpp"
#include "dsos/poly.hpp"

namespace dsos {

// Hessian bases live in 2n variables (x, y) and are linear in y.
// HessianUpTo is y times all monomials of degree <= d-1, used for
// non-homogeneous polynomials.
enum class BasisKind { Exact, UpTo, Hessian, HessianUpTo };

struct MonomialBasis {
  BasisKind kind = BasisKind::Exact;
  int nvars = 0;  // variables of the entries (2n for Hessian kinds)
  int degree = 0;
  std::vector<Monomial> entries;

  int size() const { return static_cast<int>(entries.size()); }
};

// For Hessian kinds, n is the number of x variables and d the half degree of
// the polynomial whose Hessian is represented (entries have x-degree d-1).
MonomialBasis basis(int n, int d, BasisKind kind);

// Coefficients of z' U' Q U z as a linear function of Q. Rows are the
// distinct products z_k z_l in graded-lex order.
struct GramMap {
  MonomialBasis basis;
  Eigen::MatrixXd U;  // empty: identity
  std::vector<Monomial> monomials;
  std::map<Monomial, int, GradedLex> row_of;
  PairMap pairs;

  int rows() const { return static_cast<int>(monomials.size()); }
  int row(const Monomial& m) const;
  Polynomial apply(const SymMatrix& Q) const;
  // Row vector of p's coefficients; throws if p has a monomial outside the map.
  Eigen::VectorXd coefficients(const Polynomial& p) const;
  bool covers(const Polynomial& p) const;
};

GramMap gram_map(const MonomialBasis& b, const Eigen::MatrixXd& U = {});

struct GramCertificate {
  MonomialBasis basis;
  Eigen::MatrixXd U;  // empty: identity
  SymMatrix Q;
  ConeTag tag = ConeTag::DD;
};

Polynomial reconstruct(const GramCertificate& cert);
// max |coefficient error| / (1 + max |coefficient of p|).
double certificate_error(const GramCertificate& cert, const Polynomial& p);
// Reconstruction within 1e-7 and Q in its cone within 1e-8.
bool validate(const GramCertificate& cert, const Polynomial& p);

struct MembershipResult {
  bool feasible = false;
  SolveStatus status = SolveStatus::Stalled;
  // Optimal value of min a s.t. p + a z'U'Uz has a Gram matrix in the cone.
  double shift = 0.0;
  GramCertificate cert;
  // Row multipliers and the dual matrix -adjoint(y) (physical coordinates).
  // When shift > 0, -y is a functional that is nonnegative on the cone and
  // negative on p.
  Eigen::VectorXd y;
  SymMatrix dual;
};

// Picks Exact for forms and UpTo otherwise.
MembershipResult membership(const Polynomial& p, ConeTag tag, const Eigen::MatrixXd& U = {});
MembershipResult membership_in_basis(const Polynomial& p, const MonomialBasis& b, ConeTag tag,
                                     const Eigen::MatrixXd& U = {});
MembershipResult r_membership(const Polynomial& p, int r, ConeTag tag);

// y' H_p(x) y as a polynomial in (x, y).
Polynomial hessian_biform(const Polynomial& p);
MonomialBasis hessian_basis_for(const Polynomial& p);
MembershipResult convexity_membership(const Polynomial& p, ConeTag tag);

struct InteriorConvex {
  Polynomial p;
  MonomialBasis basis;  // HessianUpTo(n, d)
  SymMatrix Q;          // Gram of y'H_p y in basis, strictly dd
  double margin = 0.0;
};

InteriorConvex interior_dsos_convex_with_gram(int n, int two_d);
Polynomial interior_dsos_convex(int n, int two_d);

// Pairs (k, l) of basis entries whose product z_k z_l can carry a nonzero
// Gram entry after averaging over the sign symmetries of the given
// polynomials. Null means no reduction applies.
std::function<bool(int, int)> parity_filter(const MonomialBasis& b,
                                            const std::vector<Polynomial>& polys);

}  // namespace dsos
