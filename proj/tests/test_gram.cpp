#include <gtest/gtest.h>

#include <random>

#include "dsos/gram.hpp"
#include "test_util.hpp"

namespace dsos {
namespace {

using testing::mono;

long binom(int n, int k) {
  long r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

Polynomial motzkin() {
  Polynomial p(3);
  p.add_term(mono({4, 2, 0}), 1.0);
  p.add_term(mono({2, 4, 0}), 1.0);
  p.add_term(mono({2, 2, 2}), -3.0);
  p.add_term(mono({0, 0, 6}), 1.0);
  return p;
}

// x1^4 + x2^4 - lambda (x1^2 + x2^2)^2
Polynomial lambda_family(double lambda) {
  Polynomial p(2);
  p.add_term(mono({4, 0}), 1.0);
  p.add_term(mono({0, 4}), 1.0);
  return p - lambda * sum_squares_power(2, 2);
}

TEST(Gram, BasisSizes) {
  for (int n = 1; n <= 4; ++n) {
    for (int d = 1; d <= 3; ++d) {
      EXPECT_EQ(basis(n, d, BasisKind::Exact).size(), binom(n + d - 1, d));
      EXPECT_EQ(basis(n, d, BasisKind::UpTo).size(), binom(n + d, d));
      EXPECT_EQ(basis(n, d, BasisKind::Hessian).size(), n * binom(n + d - 2, d - 1));
      EXPECT_EQ(basis(n, d, BasisKind::HessianUpTo).size(), n * binom(n + d - 1, d - 1));
    }
  }
}

TEST(Gram, BasisIsGradedLexSorted) {
  auto b = basis(3, 2, BasisKind::UpTo);
  for (int k = 1; k < b.size(); ++k) EXPECT_TRUE(GradedLex()(b.entries[k - 1], b.entries[k]));
  EXPECT_EQ(b.entries.front(), mono({0, 0, 0}));
}

TEST(Gram, MapOfSquareOfSum) {
  auto g = gram_map(basis(2, 1, BasisKind::Exact));
  ASSERT_EQ(g.rows(), 3);
  SymMatrix Q(2, 2);
  Q << 1, 1, 1, 1;
  Polynomial p = g.apply(Q);
  EXPECT_DOUBLE_EQ(p.coeff(mono({2, 0})), 1.0);
  EXPECT_DOUBLE_EQ(p.coeff(mono({1, 1})), 2.0);
  EXPECT_DOUBLE_EQ(p.coeff(mono({0, 2})), 1.0);
}

// Oracle: expand (U z)' Q (U z) directly by polynomial multiplication.
TEST(Gram, MapWithChangeOfBasisMatchesExpansion) {
  std::mt19937 rng(3);
  auto b = basis(3, 2, BasisKind::UpTo);
  const int N = b.size();
  Eigen::MatrixXd U = testing::random_sym(rng, N) + Eigen::MatrixXd::Identity(N, N) * 0.3;
  SymMatrix Q = testing::random_sym(rng, N);
  Polynomial direct(3);
  std::vector<Polynomial> w(N, Polynomial(3));
  for (int i = 0; i < N; ++i)
    for (int k = 0; k < N; ++k) w[i] += U(i, k) * Polynomial::term(b.entries[k], 1.0);
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) direct += Q(i, j) * (w[i] * w[j]);
  Polynomial via = gram_map(b, U).apply(Q);
  EXPECT_LE((via - direct).max_abs_coeff(), 1e-10);
}

TEST(Gram, CoefficientsRejectOutsideMonomials) {
  auto g = gram_map(basis(2, 1, BasisKind::Exact));
  Polynomial p(2);
  p.add_term(mono({1, 0}), 1.0);
  EXPECT_FALSE(g.covers(p));
  EXPECT_THROW(g.coefficients(p), std::invalid_argument);
}

TEST(Gram, SquareOfSumIsDsos) {
  Polynomial p = sum_squares_power(2, 1) + 2.0 * Polynomial::term(mono({1, 1}), 1.0);
  auto r = membership(p, ConeTag::DD);
  ASSERT_TRUE(r.feasible);
  EXPECT_TRUE(validate(r.cert, p));
  SymMatrix expect(2, 2);
  expect << 1, 1, 1, 1;
  EXPECT_LE((r.cert.Q - expect).cwiseAbs().maxCoeff(), 1e-6);
}

// Every 2x2 principal submatrix psd: D lies in the dual of the sdd cone.
bool in_sdd_dual(const SymMatrix& D, double tol) {
  for (int i = 0; i < D.rows(); ++i) {
    if (D(i, i) < -tol) return false;
    for (int j = i + 1; j < D.rows(); ++j)
      if (D(i, i) * D(j, j) - D(i, j) * D(i, j) < -tol) return false;
  }
  return true;
}

TEST(Gram, MotzkinNotDsos) {
  Polynomial m = motzkin();
  EXPECT_FALSE(membership(m, ConeTag::DD).feasible);
  EXPECT_FALSE(membership(m, ConeTag::SDD).feasible);
}

// One multiplier is not enough for the scaled cones: the LP/SOCP dual gives
// a separating functional, checked here entry by entry.
TEST(Gram, MotzkinOneMultiplierHasSeparatingFunctional) {
  Polynomial m1 = motzkin() * sum_squares_power(3, 1);
  auto r = r_membership(motzkin(), 1, ConeTag::SDD);
  ASSERT_EQ(r.status, SolveStatus::Optimal);
  EXPECT_FALSE(r.feasible);
  EXPECT_GT(r.shift, 1e-3);
  EXPECT_TRUE(in_sdd_dual(r.dual, 1e-8 * (1 + r.dual.cwiseAbs().maxCoeff())));
  auto g = gram_map(r.cert.basis);
  EXPECT_NEAR(-r.y.dot(g.coefficients(m1)), -r.shift, 1e-6);
}

TEST(Gram, MotzkinIsTwoDsos) {
  for (ConeTag tag : {ConeTag::DD, ConeTag::SDD}) {
    auto r = r_membership(motzkin(), 2, tag);
    ASSERT_TRUE(r.feasible) << to_string(tag);
    EXPECT_TRUE(validate(r.cert, motzkin() * sum_squares_power(3, 2)));
  }
}

TEST(Gram, LambdaThreshold) {
  for (double lambda : {0.0, 0.25, 0.49, 0.5}) {
    auto r = membership(lambda_family(lambda), ConeTag::DD);
    EXPECT_TRUE(r.feasible) << lambda;
    EXPECT_TRUE(validate(r.cert, lambda_family(lambda))) << lambda;
  }
  for (double lambda : {0.51, 0.6, 1.0}) {
    EXPECT_FALSE(membership(lambda_family(lambda), ConeTag::DD).feasible) << lambda;
  }
}

TEST(Gram, ShiftIsScaleEquivariant) {
  Polynomial p = lambda_family(0.7);
  auto a = membership(p, ConeTag::DD);
  auto b = membership(3.0 * p, ConeTag::DD);
  ASSERT_EQ(a.status, SolveStatus::Optimal);
  ASSERT_EQ(b.status, SolveStatus::Optimal);
  EXPECT_NEAR(b.shift, 3.0 * a.shift, 1e-6);
  EXPECT_GT(a.shift, 0.0);
}

TEST(Gram, OddPolynomialOutsideBasisIsInfeasible) {
  Polynomial p = sum_squares_power(2, 1);
  p.add_term(mono({1, 0}), 1.0);
  p.add_term(mono({0, 0}), 1.0);
  auto r = membership(p, ConeTag::DD);
  // x1 is reachable through the UpTo basis; (x1 + 1/2)^2 + x2^2 + 3/4 is dsos.
  EXPECT_TRUE(r.feasible);
  Polynomial q(2);
  q.add_term(mono({3, 0}), 1.0);
  q.add_term(mono({4, 0}), 1.0);
  EXPECT_FALSE(membership(q, ConeTag::SDD).feasible);
}

// dsos => sdsos => nonnegative on sampled points.
TEST(Gram, ConeChainOnRandomQuartics) {
  std::mt19937 rng(11);
  int dsos_count = 0;
  for (int t = 0; t < 30; ++t) {
    Polynomial p = testing::random_form(rng, 3, 4) + 1.5 * sum_squares_power(3, 2);
    auto d = membership(p, ConeTag::DD);
    auto s = membership(p, ConeTag::SDD);
    if (d.feasible) {
      ++dsos_count;
      EXPECT_TRUE(s.feasible) << t;
      EXPECT_TRUE(validate(d.cert, p));
    }
    EXPECT_LE(s.shift, d.shift + 1e-7) << t;
    if (s.feasible) {
      EXPECT_TRUE(validate(s.cert, p));
      for (int k = 0; k < 200; ++k) EXPECT_GE(eval(p, testing::random_point(rng, 3)), -1e-9);
    }
  }
  EXPECT_GT(dsos_count, 0);
}

TEST(Gram, ParityFilterKeepsEvenPairs) {
  auto b = basis(2, 1, BasisKind::Exact);
  auto f = parity_filter(b, {sum_squares_power(2, 1)});
  ASSERT_TRUE(f);
  EXPECT_TRUE(f(0, 0));
  EXPECT_FALSE(f(0, 1));
  Polynomial p = sum_squares_power(2, 1) + Polynomial::term(mono({1, 1}), 1.0);
  auto g = parity_filter(b, {p});
  ASSERT_TRUE(g);
  EXPECT_TRUE(g(0, 1));
  Polynomial q = p + Polynomial::term(mono({1, 0}), 1.0);
  EXPECT_FALSE(parity_filter(basis(2, 1, BasisKind::UpTo), {q}));
}

TEST(Gram, HessianBiformOfQuadratic) {
  Polynomial p = sum_squares_power(2, 1);
  Polynomial h = hessian_biform(p);
  ASSERT_EQ(h.nvars(), 4);
  EXPECT_DOUBLE_EQ(h.coeff(mono({0, 0, 2, 0})), 2.0);
  EXPECT_DOUBLE_EQ(h.coeff(mono({0, 0, 0, 2})), 2.0);
  EXPECT_EQ(h.size(), 2u);
}

TEST(Gram, HessianBiformMatchesPointwiseHessian) {
  std::mt19937 rng(4);
  Polynomial p = testing::random_form(rng, 3, 4);
  Polynomial h = hessian_biform(p);
  for (int k = 0; k < 10; ++k) {
    auto x = testing::random_point(rng, 3), y = testing::random_point(rng, 3);
    Eigen::MatrixXd H = testing::hessian_at(p, x);
    Eigen::Map<Eigen::VectorXd> yv(y.data(), 3);
    std::vector<double> xy = x;
    xy.insert(xy.end(), y.begin(), y.end());
    EXPECT_NEAR(eval(h, xy), yv.dot(H * yv), 1e-9);
  }
}

TEST(Gram, ConvexityMembership) {
  auto r = convexity_membership(sum_squares_power(2, 1), ConeTag::DD);
  EXPECT_TRUE(r.feasible);
  auto q = convexity_membership(sum_squares_power(2, 2), ConeTag::SDD);
  EXPECT_TRUE(q.feasible);
  EXPECT_FALSE(convexity_membership(sum_squares_power(3, 4), ConeTag::DD).feasible);
  Polynomial nc(2);
  nc.add_term(mono({2, 0}), 1.0);
  nc.add_term(mono({0, 2}), -1.0);
  EXPECT_FALSE(convexity_membership(nc, ConeTag::SDD).feasible);
}

TEST(Gram, InteriorQuadratic) {
  auto ic = interior_dsos_convex_with_gram(2, 2);
  EXPECT_LE((ic.p - sum_squares_power(2, 1)).max_abs_coeff(), 1e-12);
  EXPECT_LE((ic.Q - 2.0 * SymMatrix::Identity(2, 2)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Gram, InteriorPolynomialsHaveStrictlyDdHessianGram) {
  for (int n = 1; n <= 4; ++n) {
    for (int two_d : {2, 4, 6}) {
      if (n == 4 && two_d == 6) continue;
      auto ic = interior_dsos_convex_with_gram(n, two_d);
      GramCertificate cert{ic.basis, {}, ic.Q, ConeTag::DD};
      Polynomial h = hessian_biform(ic.p);
      EXPECT_LE(certificate_error(cert, h), 1e-10) << n << " " << two_d;
      EXPECT_GT(ic.margin, 0.0) << n << " " << two_d;
      EXPECT_GT(dd_margin(ic.Q), 0.0);
    }
  }
}

TEST(Gram, InteriorHessiansArePsdOnSamples) {
  std::mt19937 rng(8);
  Polynomial p = interior_dsos_convex(3, 6);
  for (int k = 0; k < 50; ++k) {
    Eigen::MatrixXd H = testing::hessian_at(p, testing::random_point(rng, 3, 2.0));
    EXPECT_GE(H.selfadjointView<Eigen::Lower>().eigenvalues().minCoeff(), -1e-9);
  }
}

TEST(Gram, InteriorQuarticInThreeVariablesIsDsosConvex) {
  Polynomial p = interior_dsos_convex(3, 4);
  auto r = convexity_membership(p, ConeTag::DD);
  ASSERT_TRUE(r.feasible);
  EXPECT_TRUE(validate(r.cert, hessian_biform(p)));
}

TEST(Gram, CertificateValidationRejectsWrongGram) {
  Polynomial p = sum_squares_power(2, 1);
  GramCertificate cert{basis(2, 1, BasisKind::Exact), {}, SymMatrix::Identity(2, 2), ConeTag::DD};
  EXPECT_TRUE(validate(cert, p));
  cert.Q(0, 1) = cert.Q(1, 0) = 2.0;
  EXPECT_FALSE(validate(cert, p));
}

}  // namespace
}  // namespace dsos
